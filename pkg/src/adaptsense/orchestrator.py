"""The adaptive sensing loop.

Per mini time slot: acquire a measurement block, recover a spectral
estimate from the cumulative training subset, compute the verification
statistic on the testing subset, and stop acquiring as soon as the
statistic falls within the configured band around the noise level.
Detection and throughput evaluation run on the estimate at the
termination slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import acquisition, detection, recovery, throughput, validation
from .config import ScenarioConfig, realize
from .detection import DetectionResult
from .recovery import SolverSettings, SpectralEstimate
from .signal_model import NyquistSignal, synthesize
from .throughput import LinkModel
from .validation import VerificationRecord

# Default secondary link for throughput reporting.
DEFAULT_LINK = LinkModel(transmit_power_dbm=40.0, distance_km=0.05)

# Fraction of the slot schedule before which the estimate comes from the
# l1 solve alone; from this point on the band-refinement pipeline runs
# (with its full candidate set from FULL_EFFORT_FRACTION on).  Early
# slots cannot satisfy the halting band anyway (far too few
# measurements), so the cheap estimate keeps the loop honest at a
# fraction of the cost.
REFINE_FROM_FRACTION = 0.4
FULL_EFFORT_FRACTION = 0.6

# Support-budget schedules (fractions of the training row count) for the
# mid- and full-effort recovery pipeline, and the top-bin prune budgets
# tried at full effort.
MID_GROWTH = (0.50, 0.65, 0.80)
FULL_GROWTH = (0.45, 0.60, 0.72, 0.84)
PRUNE_FRACTIONS = (0.62,)


@dataclass(frozen=True)
class SensingOutcome:
    terminated_slot: int
    halted: bool
    estimate: SpectralEstimate
    verification_trace: tuple[VerificationRecord, ...]
    detection: DetectionResult
    throughput_adaptive: float
    throughput_baseline: float
    oracle_error_trace: tuple[float, ...]
    signal_norm: float
    noise_variance: float


@dataclass
class _SlotResult:
    estimate: SpectralEstimate
    rho: float


def _recover_slot(slot: int, config: ScenarioConfig,
                  state: acquisition.AcquisitionState,
                  ensemble: acquisition.MeasurementEnsemble,
                  settings: SolverSettings,
                  rows_ifft: np.ndarray,
                  carried: tuple) -> _SlotResult:
    R, V, phi, psi = acquisition.split(state)
    # The time signal is real, so only the real part of the training
    # measurements carries signal; its noise variance is delta^2 per
    # sample, giving the quantile threshold below.
    R_real = np.real(R)
    r = len(R_real)
    eps = (config.recovery_threshold
           * np.sqrt(ensemble.noise_variance * r) * (1 + 2 / np.sqrt(2 * r)))
    refine_from = max(1, int(np.ceil(REFINE_FROM_FRACTION * config.mini_slots)))
    full_from = max(1, int(np.ceil(FULL_EFFORT_FRACTION * config.mini_slots)))
    m_l = slot * ensemble.block_size
    train_ifft = rows_ifft[:m_l][~ensemble.test_mask[:m_l]]
    if slot >= full_from:
        growth, prune = FULL_GROWTH, PRUNE_FRACTIONS
    elif slot >= refine_from:
        growth, prune = MID_GROWTH, None
    else:
        # Early slots cannot halt anyway; a short l1 solve with no
        # support refinement keeps the trace honest at minimal cost.
        growth, prune = (), None
        settings = replace(settings, continuation_steps=6,
                           admm_inner_iterations=20)
    estimate, rho = recovery.cross_validated_estimate(
        R_real, phi, V, psi, eps, settings, growth=growth,
        rows_ifft=train_ifft, carried=carried, prune_fraction=prune)
    return _SlotResult(estimate=estimate, rho=rho)


def adaptive_sense(config: ScenarioConfig,
                   signal: NyquistSignal | None = None,
                   settings: SolverSettings | None = None,
                   link: LinkModel = DEFAULT_LINK,
                   target_pfa: float = 0.01) -> SensingOutcome:
    """Run one full sensing frame and evaluate it.

    The oracle error trace is recorded for evaluation only; no decision
    in the loop reads it.
    """
    config = realize(config) if config.subbands is None else config
    if signal is None:
        signal = synthesize(config)
    settings = settings or SolverSettings(
        method="admm", continuation_steps=10, lambda_decay=0.18)
    ensemble = acquisition.build_ensemble(config, signal)
    state = acquisition.new_state(ensemble, noise_seed=config.noise_seed)
    tolerance = config.accuracy * 2.0 * ensemble.noise_variance
    rows_ifft = np.fft.ifft(ensemble.rows, axis=1, norm="ortho")

    trace: list[VerificationRecord] = []
    errors: list[float] = []
    result = None
    terminated = config.mini_slots
    halted = False
    carried: tuple = ()
    for slot in range(1, config.mini_slots + 1):
        acquisition.acquire_slot(state, ensemble, signal)
        result = _recover_slot(slot, config, state, ensemble, settings,
                               rows_ifft, carried)
        carried = (result.estimate.spectrum,)
        _, V, _, _ = acquisition.split(state)
        record = VerificationRecord(
            slot=slot, rho=result.rho, test_count=len(V),
            noise_level=2.0 * ensemble.noise_variance,
            tolerance=tolerance,
            halted=validation.halting_check(result.rho, len(V),
                                            ensemble.noise_variance, tolerance),
            bound=validation.bernstein_bound(len(V), tolerance,
                                             ensemble.noise_variance,
                                             ensemble.noise_bound))
        trace.append(record)
        errors.append(recovery.oracle_recovery_error(
            signal.spectrum, result.estimate.spectrum))
        if record.halted:
            terminated = slot
            halted = True
            break

    det = detection.energy_detect(result.estimate.spectrum, config, target_pfa)
    c_star = throughput.adaptive_throughput(
        terminated, signal.occupied, link, config, false_alarm_rate=target_pfa)
    c_base = throughput.baseline_throughput(
        signal.occupied, link, config, false_alarm_rate=target_pfa)
    return SensingOutcome(
        terminated_slot=terminated,
        halted=halted,
        estimate=result.estimate,
        verification_trace=tuple(trace),
        detection=det,
        throughput_adaptive=c_star,
        throughput_baseline=c_base,
        oracle_error_trace=tuple(errors),
        signal_norm=float(np.linalg.norm(signal.spectrum)),
        noise_variance=ensemble.noise_variance)
