"""Validation of a spectral estimate from the testing subset.

The testing residual's mean squared magnitude concentrates near the
measurement-noise level 2*delta^2 exactly when the estimate is close to
the true spectrum, which gives a data-driven stopping rule for the
acquisition loop, plus a Bernstein-type bound on how often the rule
misfires for a (near-)exact estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signal_model import inverse_dft


@dataclass(frozen=True)
class VerificationRecord:
    """Per-slot validation outcome."""

    slot: int
    rho: float
    test_count: int
    noise_level: float       # 2*delta^2, the expected normalized residual
    tolerance: float         # absolute halting band half-width epsilon
    halted: bool
    bound: float             # concentration bound on the miss probability

    @property
    def normalized(self) -> float:
        return self.rho / self.test_count


def verification_parameter(V, Psi, X_hat) -> float:
    """Squared l2 norm of the testing residual V - Psi . idft(X_hat)."""
    V = np.asarray(V)
    Psi = np.asarray(Psi)
    X_hat = np.asarray(X_hat)
    if Psi.shape != (V.shape[0], X_hat.shape[0]):
        raise ValueError(
            f"shape mismatch: V {V.shape}, Psi {Psi.shape}, X_hat {X_hat.shape}")
    residual = V - Psi @ inverse_dft(X_hat)
    return float(np.vdot(residual, residual).real)


def halting_check(rho: float, test_count: int, noise_variance: float,
                  tolerance: float) -> bool:
    """True iff |rho/v - 2*delta^2| <= tolerance."""
    if test_count <= 0:
        raise ValueError("test_count must be positive")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    return abs(rho / test_count - 2.0 * noise_variance) <= tolerance


def bernstein_bound(test_count: int, tolerance: float, noise_variance: float,
                    noise_bound: float) -> float:
    """Probability bound on |rho/v - 2*delta^2| > tolerance for an exact
    estimate under noise with per-component amplitude bound U:

        2 * exp(-3 v eps^2 / (24 delta^4 + 2 (U^2 + delta^2) eps))

    clamped to [0, 1].  Monotonically decreasing in both v and eps.
    """
    if test_count <= 0 or tolerance <= 0 or noise_variance <= 0:
        raise ValueError("arguments must be positive")
    d2 = noise_variance
    num = 3.0 * test_count * tolerance ** 2
    den = 24.0 * d2 ** 2 + 2.0 * (noise_bound ** 2 + d2) * tolerance
    return min(1.0, 2.0 * math.exp(-num / den))


def validate_slot(slot: int, V, Psi, X_hat, noise_variance: float,
                  tolerance: float, noise_bound: float) -> VerificationRecord:
    """Bundle the full per-slot validation: statistic, halting flag and
    concentration bound."""
    rho = verification_parameter(V, Psi, X_hat)
    v = len(V)
    return VerificationRecord(
        slot=slot, rho=rho, test_count=v,
        noise_level=2.0 * noise_variance, tolerance=tolerance,
        halted=halting_check(rho, v, noise_variance, tolerance),
        bound=bernstein_bound(v, tolerance, noise_variance, noise_bound))
