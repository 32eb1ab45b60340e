"""Per-subchannel energy detection on a recovered spectrum.

Each of the J subchannels owns N/J contiguous DFT bins.  Its occupancy
statistic is the summed bin energy; the decision threshold is calibrated
from a chi-square model of the noise-only statistic whose scale is
estimated from the quietest quartile of subchannels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .config import ScenarioConfig


@dataclass(frozen=True)
class DetectionResult:
    decisions: np.ndarray        # bool per subchannel, True = occupied
    test_statistics: np.ndarray  # per-subchannel spectral energy
    threshold: float
    target_pfa: float


def subchannel_energies(X_hat: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """Summed |X|^2 per subchannel.

    Bins are mapped to subchannels by positive frequency: subchannel j
    covers [(j-1)W/J, jW/J), and since the time signal is real the
    mirrored negative-frequency bins carry the same energy, so both
    halves of the spectrum are folded in.
    """
    n = config.num_samples
    if len(X_hat) != n:
        raise ValueError("estimate length does not match scenario N")
    energy = np.abs(np.asarray(X_hat)) ** 2
    folded = energy[:n // 2 + 1].copy()
    folded[1:(n + 1) // 2] += energy[-1:n // 2:-1]
    # Frequency of bin k is k * f_N / N; keep bins below W.
    bin_hz = config.nyquist_rate_hz / n
    j_of_bin = np.minimum(
        (np.arange(folded.size) * bin_hz
         // config.subchannel_bandwidth_hz).astype(int),
        config.num_subchannels - 1)
    out = np.zeros(config.num_subchannels)
    np.add.at(out, j_of_bin, folded)
    return out


def energy_detect(X_hat: np.ndarray, config: ScenarioConfig,
                  target_pfa: float = 0.01) -> DetectionResult:
    """Threshold the per-subchannel energies at the (1 - target_pfa)
    quantile of a chi-square noise model."""
    if config.num_subchannels < 4:
        raise ValueError("need at least 4 subchannels to estimate the noise floor")
    if not 0.0 < target_pfa < 1.0:
        raise ValueError("target_pfa must lie in (0, 1)")
    energies = subchannel_energies(X_hat, config)
    quietest = np.sort(energies)[:max(config.num_subchannels // 4, 1)]
    # The spectrum of a real signal is conjugate-symmetric, so a
    # subchannel's folded noise energy carries one real degree of
    # freedom per bin (N/J in total), not two.
    dof = config.bins_per_subchannel
    # Per-degree-of-freedom noise scale from the quiet quartile.  The
    # lowest-quartile mean of chi-square energies underestimates the
    # scale; divide by the truncated-mean ratio E[X | X <= q25] / E[X]
    # of the chi-square model to debias it.
    q25 = stats.chi2.ppf(0.25, dof)
    trunc_ratio = stats.chi2.cdf(q25, dof + 2) / 0.25
    floor = float(np.mean(quietest)) / dof / trunc_ratio
    threshold = floor * stats.chi2.ppf(1.0 - target_pfa, dof)
    return DetectionResult(
        decisions=energies > threshold,
        test_statistics=energies,
        threshold=float(threshold),
        target_pfa=target_pfa)


def confusion(decisions: np.ndarray, occupied) -> tuple[float, float]:
    """(false-alarm rate over idle subchannels, detection rate over the
    occupied set).  Degenerate cases (no idle / no occupied subchannels)
    report 0.0 / 1.0 respectively."""
    decisions = np.asarray(decisions, dtype=bool)
    occ_mask = np.zeros(decisions.size, dtype=bool)
    for j in occupied:
        occ_mask[j - 1] = True
    idle = ~occ_mask
    fa = float(decisions[idle].mean()) if idle.any() else 0.0
    pd = float(decisions[occ_mask].mean()) if occ_mask.any() else 1.0
    return fa, pd
