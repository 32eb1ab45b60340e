"""Block-wise compressed acquisition with a training/testing split.

A fixed Gaussian measurement matrix is drawn once per scenario.  Its
M_L rows are grouped into L equal blocks, one per mini time slot, and
each row is pre-assigned to either the training subset (used for
recovery) or the testing subset (used for validation) before any data
is seen.  Acquiring slot l appends that block's measurements
y_i = (row_i . x) + n_i with circular complex Gaussian noise of
per-component variance delta^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .signal_model import NyquistSignal


@dataclass(frozen=True)
class MeasurementEnsemble:
    """Immutable per-scenario measurement apparatus.

    rows          -- the full M_L x N standard-normal matrix
    test_mask     -- per-row flag, True = testing subset
    noise_variance-- per-real-component measurement noise variance delta^2
    noise_bound   -- amplitude bound U used only in the concentration bound
    block_size    -- rows added per mini time slot
    mini_slots    -- number of slots L
    """

    rows: np.ndarray
    test_mask: np.ndarray
    noise_variance: float
    noise_bound: float
    block_size: int
    mini_slots: int

    def slot_rows(self, slot: int) -> slice:
        """Row range of mini slot ``slot`` (1-based)."""
        return slice((slot - 1) * self.block_size, slot * self.block_size)


@dataclass
class AcquisitionState:
    """Mutable cumulative measurement record, advanced one slot at a time."""

    ensemble: MeasurementEnsemble
    slot: int = 0
    samples: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=complex))
    noise: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=complex))
    _rng: np.random.Generator | None = None


def _assign_test_rows(num_measurements, block_size, mini_slots, test_fraction):
    """Pre-assign rows to the testing subset so that after slot l the
    cumulative testing count is round(test_fraction * M_l).  Within each
    block the trailing rows are the testing ones."""
    mask = np.zeros(num_measurements, dtype=bool)
    assigned = 0
    for l in range(1, mini_slots + 1):
        want = round(test_fraction * l * block_size)
        add = want - assigned
        if add < 0 or add > block_size:
            raise ValueError("test_fraction produces an infeasible split")
        mask[l * block_size - add:l * block_size] = True
        assigned = want
    return mask


def build_ensemble(config: ScenarioConfig,
                   signal: NyquistSignal | None = None) -> MeasurementEnsemble:
    """Draw the scenario's measurement matrix and fix the split.

    The noise variance is referenced to the measured signal power:
    delta^2 = P_meas / (2 * 10^(SMNR/10)) with P_meas the empirical mean
    of |row . x|^2 over the training rows of slot 1.  Passing
    ``signal=None`` sets delta^2 for a unit-power measurement (useful
    for pure-noise studies).
    """
    rng = np.random.default_rng(config.matrix_seed)
    m_total = config.num_measurements
    rows = rng.standard_normal((m_total, config.num_samples))
    test_mask = _assign_test_rows(m_total, config.block_size,
                                  config.mini_slots, config.test_fraction)
    if signal is not None:
        first = rows[:config.block_size][~test_mask[:config.block_size]]
        p_meas = float(np.mean(np.abs(first @ signal.samples) ** 2))
    else:
        p_meas = 1.0
    delta_sq = p_meas / (2.0 * 10.0 ** (config.smnr_db / 10.0))
    return MeasurementEnsemble(
        rows=rows, test_mask=test_mask, noise_variance=delta_sq,
        noise_bound=4.0 * np.sqrt(delta_sq),
        block_size=config.block_size, mini_slots=config.mini_slots)


def new_state(ensemble: MeasurementEnsemble,
              noise_seed: int = 0) -> AcquisitionState:
    state = AcquisitionState(ensemble=ensemble)
    state._rng = np.random.default_rng(noise_seed)
    return state


def acquire_slot(state: AcquisitionState, ensemble: MeasurementEnsemble,
                 signal: NyquistSignal) -> AcquisitionState:
    """Append the next slot's measurement block to the cumulative record."""
    if ensemble is not state.ensemble:
        raise ValueError("state was created for a different ensemble")
    if state.slot >= ensemble.mini_slots:
        raise ValueError("all mini time slots already acquired")
    block = ensemble.rows[ensemble.slot_rows(state.slot + 1)]
    sigma = np.sqrt(ensemble.noise_variance)
    noise = sigma * (state._rng.standard_normal(block.shape[0])
                     + 1j * state._rng.standard_normal(block.shape[0]))
    state.samples = np.concatenate([state.samples,
                                    block @ signal.samples + noise])
    state.noise = np.concatenate([state.noise, noise])
    state.slot += 1
    return state


def split(state: AcquisitionState):
    """Return the aligned training/testing views after the current slot:
    (R_l, V_l, Phi_l, Psi_l)."""
    if state.slot < 1:
        raise ValueError("no measurements acquired yet")
    m_l = state.slot * state.ensemble.block_size
    mask = state.ensemble.test_mask[:m_l]
    rows = state.ensemble.rows[:m_l]
    return (state.samples[~mask], state.samples[mask],
            rows[~mask], rows[mask])
