import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constrained_mrac.adaptation import EstimateState
from constrained_mrac.controller import (
    SAT_HIGH,
    SAT_LOW,
    UNSATURATED,
    ControllerVariant,
    assumption_margin,
    baseline_control,
    constrained_control,
    g_sup_bound,
    nominal_control,
    reference_modification,
)

X0_EX = np.array([0.3, -0.2, 0.2])


def test_nominal_control_values():
    est = EstimateState(K_hat=[0.1, 0.1, 0.1], l_hat=3.0)
    assert nominal_control(est, X0_EX, 0.0) == pytest.approx(0.03)
    assert nominal_control(EstimateState(np.zeros(3), 1.0), X0_EX, 0.7) == pytest.approx(0.7)
    nl = EstimateState(K_hat=[0.0, 0.0], l_hat=1.0, K1_hat=[1.0, 0.0])
    assert nominal_control(nl, [0.2, 0.3], 0.0, phi_x=np.array([0.5, 9.0])) == pytest.approx(0.5)


def test_baseline_is_unsaturated_nominal():
    est = EstimateState(K_hat=[10.0, 0.0, 0.0], l_hat=3.0)
    assert baseline_control(est, [1.0, 0.0, 0.0], 1.0) == 13.0


@pytest.mark.parametrize("u,expected", [(2.9, 0.0), (4.0, -0.5), (-5.0, 1.0), (3.0, 0.0), (-3.0, 0.0)])
def test_reference_modification(u, expected):
    assert reference_modification(u, 3.0, 2.0) == pytest.approx(expected)


def _decision(u, M_u=3.0, l_hat=2.0):
    # choose K_hat so that the nominal input equals u exactly
    est = EstimateState(K_hat=[u, 0.0], l_hat=l_hat)
    return constrained_control(est, np.array([1.0, 0.0]), 0.0, M_u)


def test_constrained_control_branches():
    d = _decision(2.0)
    assert (d.u_applied, d.g, d.mode) == (2.0, 0.0, UNSATURATED)
    d = _decision(4.0)
    assert (d.u_applied, d.mode) == (3.0, SAT_HIGH)
    assert d.total_reference(1.0) == pytest.approx(0.5)
    d = _decision(-5.0)
    assert (d.u_applied, d.mode) == (-3.0, SAT_LOW)
    d = _decision(3.0)  # tie goes to the saturating branch
    assert d.mode == SAT_HIGH and d.g == 0.0 and d.u_applied == 3.0
    assert np.isnan(d.margin)


def test_margin_values():
    est = EstimateState(K_hat=[0.1, 0.1, 0.1], l_hat=3.0)
    assert assumption_margin(est, X0_EX, 2.4, 3.0, 1) == pytest.approx(10.17)
    est0 = EstimateState(np.zeros(3), 2.5)
    assert assumption_margin(est0, X0_EX, 2.4, 3.0, 1) == pytest.approx(3.0 + 2.5 * 2.4)
    d = constrained_control(est, X0_EX, 0.0, 3.0, f_M=2.4, sign_l=1)
    assert d.margin == pytest.approx(10.17)


def test_g_sup_bound_values():
    assert g_sup_bound(2.4, 3.0, 1.0, 10.0, 2.0, 4.0) == pytest.approx(4.8)
    assert g_sup_bound(2.4, 29.6, 1.0, 10.0, 2.0, 4.0) == 0.0
    assert g_sup_bound(0.0, 3.0, 1.0, 10.0, 2.0, 4.0) == 0.0


def test_variant_properties():
    assert ControllerVariant("state_and_input").modifies_reference
    assert not ControllerVariant.STATE_ONLY.modifies_reference
    assert not ControllerVariant.BASELINE_MRAC.uses_barrier
    assert ControllerVariant.NONLINEAR_STATE_AND_INPUT.uses_barrier


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    st.floats(0.1, 5),
    st.sampled_from([-1, 1]),
    st.lists(st.floats(-3, 3), min_size=3, max_size=3),
    st.floats(-3, 3),
    st.floats(0.01, 30),
)
def test_saturation_identity(K, l_abs, sign, X, f, M_u):
    est = EstimateState(K_hat=K, l_hat=sign * l_abs)
    d = constrained_control(est, np.array(X), f, M_u)
    u = nominal_control(est, np.array(X), f)
    assert d.u_applied == min(max(u, -M_u), M_u)
    assert (d.mode == UNSATURATED) == (abs(u) < M_u)
    if abs(u) > M_u:
        assert d.g != 0.0
    elif abs(u) < M_u:
        assert d.g == 0.0


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=2),
    st.floats(0.5, 4),
    st.sampled_from([-1, 1]),
    st.lists(st.floats(-2, 2), min_size=2, max_size=2),
    st.floats(0.1, 3),
    st.floats(-1, 1),
    st.floats(0.01, 40),
)
def test_total_reference_bounded_when_margin_holds(K, l_abs, sign, X, f_M, f_frac, M_u):
    est = EstimateState(K_hat=K, l_hat=sign * l_abs)
    f = f_frac * f_M
    d = constrained_control(est, np.array(X), f, M_u, f_M=f_M, sign_l=sign)
    if d.margin >= 0:
        assert abs(d.total_reference(f)) <= f_M + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_offline_condition_implies_margin(seed):
    # M_u >= M_K M_x - m_l f_M keeps the margin nonnegative for ||X|| <= M_x
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    M_K, M_x, m_l, f_M = rng.uniform(0.5, 5), rng.uniform(0.5, 3), rng.uniform(0.2, 1), rng.uniform(0.1, 3)
    M_l = m_l * rng.uniform(1, 4)
    M_u = max(M_K * M_x - m_l * f_M, 0.0) + rng.uniform(0, 0.1)
    sign = int(rng.choice([-1, 1]))
    for _ in range(100):
        K = rng.normal(size=n)
        K *= M_K * rng.uniform(0, 1) / np.linalg.norm(K)
        X = rng.normal(size=n)
        X *= M_x * rng.uniform(0, 1) / np.linalg.norm(X)
        est = EstimateState(K, sign * rng.uniform(m_l, M_l))
        assert assumption_margin(est, X, f_M, M_u, sign) >= -1e-12
