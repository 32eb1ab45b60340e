"""Sparse recovery: operator identities, solver behavior, support
refinement and the cross-validated candidate pipeline."""

import numpy as np
import pytest

from adaptsense.recovery import (
    SolverSettings,
    _mfista_stage,
    _operator_norm_sq,
    band_support,
    cross_validated_estimate,
    operator_adjoint,
    operator_apply,
    oracle_recovery_error,
    recover,
    refine_on_support,
    soft_threshold,
    support_least_squares,
    top_bin_support,
)
from adaptsense.signal_model import inverse_dft, unitary_dft


def _planted(rng, n, k, m, real_signal=False):
    """Random rows plus an exactly k-sparse planted spectrum."""
    rows = rng.standard_normal((m, n))
    X = np.zeros(n, dtype=complex)
    if real_signal:
        # Conjugate-symmetric support so the time signal is real.
        half = rng.choice(np.arange(1, n // 2), size=k // 2, replace=False)
        coef = rng.standard_normal(k // 2) + 1j * rng.standard_normal(k // 2)
        X[half] = coef
        X[(-half) % n] = np.conj(coef)
    else:
        support = rng.choice(n, size=k, replace=False)
        X[support] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    x = inverse_dft(X)
    if real_signal:
        x = np.real(x)
    return rows, X, rows @ x


# Settings validation ------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    {"max_iterations": 0},
    {"continuation_steps": 0},
    {"admm_inner_iterations": 0},
    {"stop_tolerance": 0.0},
    {"stop_tolerance": 1.5},
    {"tol_slack": 0.0},
    {"lambda_decay": 1.0},
    {"method": "cg"},
])
def test_solver_settings_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SolverSettings(**kwargs)


# Operator ----------------------------------------------------------------

def test_operator_matches_dense_matrix(rng):
    # [DERIVED] oracle: form Phi F^{-1} explicitly and compare.
    n, m = 32, 12
    rows = rng.standard_normal((m, n))
    dense = rows @ np.fft.ifft(np.eye(n), axis=0, norm="ortho")
    X = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    np.testing.assert_allclose(operator_apply(rows, X), dense @ X,
                               rtol=1e-12, atol=1e-12)
    u = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    np.testing.assert_allclose(operator_adjoint(rows, u),
                               dense.conj().T @ u, rtol=1e-12, atol=1e-12)


def test_operator_adjoint_identity(rng):
    rows = rng.standard_normal((20, 64))
    X = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    u = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    lhs = np.vdot(u, operator_apply(rows, X))
    rhs = np.vdot(operator_adjoint(rows, u), X)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_operator_dimension_mismatch(rng):
    rows = rng.standard_normal((4, 8))
    with pytest.raises(ValueError):
        operator_apply(rows, np.zeros(9))
    with pytest.raises(ValueError):
        operator_adjoint(rows, np.zeros(5))


def test_operator_norm_bounds_the_operator(rng):
    rows = rng.standard_normal((10, 24))
    sigma_sq = _operator_norm_sq(rows)
    # [DERIVED] ||A||_2^2 equals the top eigenvalue of Phi Phi^T
    # because F^{-1} is unitary.
    exact = float(np.linalg.eigvalsh(rows @ rows.T).max())
    assert sigma_sq == pytest.approx(exact, rel=1e-6)


# Soft threshold and error metric ------------------------------------------

def test_soft_threshold_shrinks_magnitude_keeps_phase():
    v = np.array([3.0, -2.0, 0.5j, 1e-9])
    out = soft_threshold(v, 1.0)
    np.testing.assert_allclose(out, [2.0, -1.0, 0.0, 0.0], atol=1e-12)
    z = 2.0 * np.exp(1j * 0.7)
    out = soft_threshold(np.array([z]), 0.5)
    assert np.angle(out[0]) == pytest.approx(0.7)
    assert abs(out[0]) == pytest.approx(1.5)


def test_oracle_recovery_error_basics():
    X = np.array([1.0, 2.0, 3.0])
    assert oracle_recovery_error(X, X) == 0.0
    assert oracle_recovery_error(X, X + 2.0) == pytest.approx(2.0 * np.sqrt(3))
    with pytest.raises(ValueError):
        oracle_recovery_error(X, X[:2])


# Convex solve --------------------------------------------------------------

def test_recover_zero_data_returns_zero_estimate(rng):
    rows = rng.standard_normal((8, 32))
    est = recover(np.zeros(8), rows, eps=0.1)
    assert est.converged
    assert not np.any(est.spectrum)
    assert est.residual_norm == 0.0


def test_recover_row_count_mismatch(rng):
    with pytest.raises(ValueError):
        recover(np.ones(5), rng.standard_normal((4, 16)), eps=0.1)


@pytest.mark.parametrize("method", ["fista", "admm"])
def test_recover_planted_sparse_noiseless(rng, method):
    rows, X, R = _planted(rng, 64, 4, 40)
    settings = SolverSettings(method=method, continuation_steps=10)
    est = recover(R, rows, eps=0.0, settings=settings)
    assert oracle_recovery_error(X, est.spectrum) <= 1e-3 * np.linalg.norm(X)


def test_recover_targets_the_residual_level(rng):
    rows, X, clean = _planted(rng, 64, 4, 40)
    noise = 0.05 * rng.standard_normal(40)
    eps = float(np.linalg.norm(noise))
    est = recover(clean + noise, rows, eps=eps,
                  settings=SolverSettings(method="admm", continuation_steps=10))
    assert est.converged
    assert est.residual_norm <= eps * 1.06


def test_mfista_objective_is_monotone(rng):
    rows, _, R = _planted(rng, 48, 4, 24)
    lam = 0.1 * float(np.abs(operator_adjoint(rows, R)).max())
    lip = 1.01 * _operator_norm_sq(rows)
    settings = SolverSettings(max_iterations=150)
    _, trace, _ = _mfista_stage(R, rows, lam, np.zeros(48, dtype=complex),
                                lip, settings)
    diffs = np.diff(trace)
    assert np.all(diffs <= 1e-10 * max(trace[0], 1.0))


def test_recover_full_sampling_is_exact(rng):
    # With M = N the system is square and well-conditioned almost surely.
    n = 32
    rows = rng.standard_normal((n, n)) + np.eye(n) * 0.5
    X = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    R = operator_apply(rows, X)
    est = recover(R, rows, eps=0.0,
                  settings=SolverSettings(method="admm",
                                          continuation_steps=14))
    # First-order solver with a finite iteration budget: "exact" up to
    # the continuation floor.
    assert est.residual_norm <= 1e-3 * np.linalg.norm(R)


# Support selection ----------------------------------------------------------

def test_band_support_is_conjugate_symmetric_and_within_budget(rng):
    n = 200
    score = np.abs(rng.standard_normal(n)) * 1e-3
    score[40:55] = 10.0
    score[n - 54:n - 39] = 10.0
    support = band_support(score, budget=60)
    assert support.size <= 60
    mirrored = np.sort((-support) % n)
    np.testing.assert_array_equal(np.sort(support), mirrored)
    core = np.arange(40, 55)
    assert np.isin(core, support).all()


def test_top_bin_support_picks_the_largest_bins():
    n = 64
    score = np.zeros(n)
    score[5] = score[59] = 8.0
    score[20] = score[44] = 5.0
    support = top_bin_support(score, budget=12, window=1)
    assert {5, 59, 20, 44} <= set(support.tolist())
    # The budget is approximate: closing the set under conjugation may
    # re-add mirrors of tied bins after the trim.
    assert support.size <= 2 * 12
    mirrored = np.sort((-support) % n)
    np.testing.assert_array_equal(np.sort(support), mirrored)


# Support least squares -------------------------------------------------------

def _dense_support_fit(support, R_real, rows):
    """Independent oracle: numerically build the real design matrix of
    the conjugate-symmetric support parameterization and solve by lstsq."""
    n = rows.shape[1]
    half = np.asarray(support)[np.asarray(support) <= n // 2]
    self_conj = (half == 0) | (2 * half == n)

    def embed(c):
        X = np.zeros(n, dtype=complex)
        X[half] = c
        X[(-half) % n] = np.conj(c)
        X[half[self_conj]] = c[self_conj].real
        return rows @ np.real(inverse_dft(X))

    cols = []
    for j in range(half.size):
        e = np.zeros(half.size, dtype=complex)
        e[j] = 1.0
        cols.append(embed(e))
    for j in np.flatnonzero(~self_conj):
        e = np.zeros(half.size, dtype=complex)
        e[j] = 1j
        cols.append(embed(e))
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, R_real, rcond=None)
    k = half.size
    c = coef[:k].astype(complex)
    c[~self_conj] += 1j * coef[k:]
    X = np.zeros(n, dtype=complex)
    X[half] = c
    X[(-half) % n] = np.conj(c)
    X[half[self_conj]] = c[self_conj].real
    return X


def test_support_least_squares_matches_dense_oracle(rng):
    n, m = 64, 40
    rows, X_true, R = _planted(rng, n, 6, m, real_signal=True)
    support = np.flatnonzero(np.abs(X_true) > 0)
    support = np.union1d(support, [0, 3, n - 3])
    rows_ifft = np.fft.ifft(rows, axis=1, norm="ortho")
    X_fast = support_least_squares(support, R, rows_ifft)
    X_dense = _dense_support_fit(support, R, rows)
    # atol covers the 1e-8-scale ridge term in the fast normal-equations
    # path, which shifts the oracle's exactly-zero coefficients.
    np.testing.assert_allclose(X_fast, X_dense, rtol=1e-6, atol=1e-6)


def test_support_least_squares_recovers_planted_signal(rng):
    rows, X_true, R = _planted(rng, 64, 6, 40, real_signal=True)
    support = np.flatnonzero(np.abs(X_true) > 0)
    rows_ifft = np.fft.ifft(rows, axis=1, norm="ortho")
    X_hat = support_least_squares(support, R, rows_ifft)
    assert oracle_recovery_error(X_true, X_hat) <= 1e-6 * np.linalg.norm(X_true)


def test_refine_on_support_agrees_with_least_squares(rng):
    n, m = 64, 40
    rows, X_true, R = _planted(rng, n, 6, m, real_signal=True)
    support = np.union1d(np.flatnonzero(np.abs(X_true) > 0), [1, n - 1])
    rows_ifft = np.fft.ifft(rows, axis=1, norm="ortho")
    X_cg = refine_on_support(support, R, rows, iterations=300)
    X_ne = support_least_squares(support, R, rows_ifft)
    # atol absorbs the CG stopping tolerance on near-zero coefficients.
    np.testing.assert_allclose(X_cg, X_ne, rtol=1e-4, atol=1e-5)


def test_refined_spectrum_is_conjugate_symmetric(rng):
    rows, X_true, R = _planted(rng, 64, 6, 40, real_signal=True)
    support = np.flatnonzero(np.abs(X_true) > 0)
    rows_ifft = np.fft.ifft(rows, axis=1, norm="ortho")
    X_hat = support_least_squares(support, R, rows_ifft)
    x_time = inverse_dft(X_hat)
    assert np.max(np.abs(x_time.imag)) <= 1e-10 * np.linalg.norm(x_time)


# Cross-validated pipeline -----------------------------------------------------

def _cv_problem(rng, n=128, k=6, m=80, v=12, noise=1e-3):
    rows_all = rng.standard_normal((m + v, n))
    X = np.zeros(n, dtype=complex)
    half = np.array([9, 10, 11, 30, 31, 32])[:k]
    coef = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    X[half] = coef
    X[(-half) % n] = np.conj(coef)
    x = np.real(inverse_dft(X))
    y = rows_all @ x + noise * rng.standard_normal(m + v)
    return X, rows_all[:m], y[:m], rows_all[m:], y[m:]


def test_cross_validated_estimate_reports_its_own_testing_residual(rng):
    X, rows, R, psi, V = _cv_problem(rng)
    eps = 1e-3 * np.sqrt(len(R)) * 1.3
    est, rho = cross_validated_estimate(R, rows, V, psi, eps,
                                        growth=(0.3, 0.5), carried=())
    resid = V - psi @ np.real(inverse_dft(est.spectrum))
    assert rho == pytest.approx(float(np.vdot(resid, resid).real), rel=1e-12)


def test_cross_validated_estimate_finds_planted_bands(rng):
    X, rows, R, psi, V = _cv_problem(rng)
    eps = 1e-3 * np.sqrt(len(R)) * 1.3
    est, _ = cross_validated_estimate(R, rows, V, psi, eps,
                                      growth=(0.3, 0.5), carried=())
    assert oracle_recovery_error(X, est.spectrum) <= 0.05 * np.linalg.norm(X)


def test_carried_candidate_never_hurts_the_selection(rng):
    X, rows, R, psi, V = _cv_problem(rng)
    eps = 1e-3 * np.sqrt(len(R)) * 1.3
    _, rho_plain = cross_validated_estimate(R, rows, V, psi, eps,
                                            growth=(0.3,), carried=())
    _, rho_carried = cross_validated_estimate(R, rows, V, psi, eps,
                                              growth=(0.3,), carried=(X,))
    assert rho_carried <= rho_plain + 1e-12


def test_cross_validated_estimate_zero_data(rng):
    rows = rng.standard_normal((40, 64))
    psi = rng.standard_normal((5, 64))
    est, rho = cross_validated_estimate(np.zeros(40), rows,
                                        np.zeros(5), psi, eps=1.0)
    assert not np.any(est.spectrum)
    assert rho == 0.0
