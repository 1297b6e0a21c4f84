import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constrained_mrac.errors import DimensionMismatch, MatchingViolated, NotHurwitz, NotSymmetric
from constrained_mrac.linalg import (
    controllability_matrix,
    derive_matching_gains,
    derive_nonlinear_gain,
    eig_extrema_sym,
    is_controllable,
    is_hurwitz,
    solve_lyapunov,
)

from helpers import random_hurwitz

A_EX = np.array([[-0.5, 1.0, 1.85], [-1.2, -1.7, -0.6], [2.5, 0.0, -0.4]])
A_M_EX = np.array([[-2.0, 1.5, 1.1], [-1.2, -1.7, -0.6], [-0.5, 1.0, -1.9]])
B_EX = np.array([0.5, 0.0, 1.0])
B_M_EX = np.array([0.5, 0.0, 1.0])

# Bartels-Stewart solution (scipy.linalg.solve_continuous_lyapunov), computed once and frozen
P_EX = np.array(
    [
        [2.4398911163612680e-01, -2.5765424334162361e-04, 2.4661923639513153e-02],
        [-2.5765424334162415e-04, 3.1288081517637145e-01, 3.2283867164842828e-02],
        [2.4661923639513156e-02, 3.2283867164842807e-02, 2.6724094510766261e-01],
    ]
)
# smallest root of the characteristic polynomial of P_EX
LAMBDA_MIN_EX = 0.22431740243584822


def test_scalar_lyapunov():
    pair = solve_lyapunov([[-1.0]], [[2.0]])
    assert pair.P == pytest.approx(np.array([[1.0]]))


def test_diagonal_lyapunov():
    pair = solve_lyapunov(np.diag([-1.0, -2.0]))
    np.testing.assert_allclose(pair.P, np.diag([0.5, 0.25]), atol=1e-15)


def test_example_lyapunov_matches_oracle():
    pair = solve_lyapunov(A_M_EX)
    assert pair.residual_norm < 1e-9
    np.testing.assert_allclose(pair.P, P_EX, rtol=1e-12, atol=1e-15)
    assert np.array_equal(pair.P, pair.P.T)


def test_lyapunov_rejects_unstable():
    with pytest.raises(NotHurwitz):
        solve_lyapunov(A_EX)


def test_lyapunov_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_lyapunov(-np.eye(2), np.eye(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_lyapunov_residual_property(n, seed):
    rng = np.random.default_rng(seed)
    A_m = random_hurwitz(rng, n)
    R = rng.normal(size=(n, n))
    Q = R @ R.T + 0.1 * np.eye(n)
    pair = solve_lyapunov(A_m, Q)
    assert pair.residual_norm <= 1e-9 * (1 + np.linalg.norm(Q, "fro"))
    assert eig_extrema_sym(pair.P)[0] > 0


def test_eig_extrema_simple():
    assert eig_extrema_sym(np.eye(3)) == (1.0, 1.0)
    assert eig_extrema_sym(np.diag([0.5, 0.25])) == (0.25, 0.5)


def test_eig_extrema_example_against_charpoly():
    lo, hi = eig_extrema_sym(P_EX)
    assert lo == pytest.approx(LAMBDA_MIN_EX, abs=1e-9)
    assert hi == pytest.approx(0.3311174304080774, abs=1e-9)


def test_eig_extrema_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        eig_extrema_sym([[1.0, 2.0], [0.0, 1.0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_rayleigh_quotients_inside_extrema(n, seed):
    rng = np.random.default_rng(seed)
    R = rng.normal(size=(n, n))
    S = R + R.T
    lo, hi = eig_extrema_sym(S)
    v = rng.normal(size=(100, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    q = np.einsum("ij,jk,ik->i", v, S, v)
    assert np.all(q >= lo - 1e-8) and np.all(q <= hi + 1e-8)


def test_hurwitz_checks():
    assert is_hurwitz(A_M_EX)
    assert not is_hurwitz(A_EX)
    assert not is_hurwitz(np.zeros((3, 3)))
    assert max(np.linalg.eigvals(A_EX).real) > 1.0


def test_matching_example_gains():
    K, l = derive_matching_gains(A_EX, A_M_EX, B_EX, 0.5, B_M_EX)
    np.testing.assert_allclose(K, [-6.0, 2.0, -3.0], atol=1e-12)
    assert l == pytest.approx(2.0, abs=1e-12)


def test_matching_identity():
    K, l = derive_matching_gains(A_EX, A_EX, B_EX, 0.5, B_EX * 0.5)
    np.testing.assert_allclose(K, 0.0, atol=1e-15)
    assert l == pytest.approx(1.0)


def test_matching_rank_obstruction():
    A_m = A_EX.copy()
    A_m[1, 0] += 1.0  # second row is unreachable through B = [0.5, 0, 1]
    with pytest.raises(MatchingViolated):
        derive_matching_gains(A_EX, A_m, B_EX, 0.5, B_M_EX)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_matching_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    B = rng.normal(size=n)
    lam = rng.uniform(0.2, 3.0) * rng.choice([-1, 1])
    K = rng.normal(size=n) * 3
    l = rng.uniform(-4, 4)
    A_m = A + lam * np.outer(B, K)
    B_m = B * lam * l
    K_est, l_est = derive_matching_gains(A, A_m, B, lam, B_m)
    assert np.max(np.abs(A + lam * np.outer(B, K_est) - A_m)) <= 1e-8
    assert np.max(np.abs(B * lam * l_est - B_m)) <= 1e-8


def test_nonlinear_gain():
    B = np.array([0.0, 1.0])
    K1 = np.array([1.0, -0.5])
    A1 = -np.outer(B, K1)
    np.testing.assert_allclose(derive_nonlinear_gain(A1, B, 1.0), K1)
    with pytest.raises(MatchingViolated):
        derive_nonlinear_gain(np.eye(2), B, 1.0)


def test_controllability():
    assert is_controllable(A_EX, B_EX * 0.5)
    assert not is_controllable(np.diag([-1.0, -2.0]), np.array([1.0, 0.0]))
    C = controllability_matrix(A_EX, B_EX)
    np.testing.assert_allclose(C[:, 1], A_EX @ B_EX)
