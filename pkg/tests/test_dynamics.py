import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constrained_mrac.dynamics import (
    NONLINEARITIES,
    NonlinearitySpec,
    PlantModel,
    ReferenceSignalSpec,
    SineTerm,
    TargetModel,
    eval_nonlinearity,
    eval_reference,
    plant_deriv,
    rk4_step,
    target_deriv,
)
from constrained_mrac.errors import DimensionMismatch
from constrained_mrac.scenario import load_bundled

X0_EX = np.array([0.3, -0.2, 0.2])


@pytest.fixture(scope="module")
def example():
    return load_bundled("example_3state")


def test_plant_origin_is_equilibrium(example):
    assert np.all(plant_deriv(example.plant, np.zeros(3), 0.0) == 0.0)


def test_plant_example_free_response(example):
    # rows of A dotted with X0 by hand: -0.15-0.2+0.37, -0.36+0.34-0.12, 0.75-0.08
    np.testing.assert_allclose(plant_deriv(example.plant, X0_EX, 0.0), [0.02, -0.14, 0.67], atol=1e-15)


def test_plant_pure_input_channel():
    plant = PlantModel(A=np.zeros((3, 3)), B=[1.0, 0.0, 0.0], lam=2.0, X0=np.zeros(3))
    np.testing.assert_array_equal(plant_deriv(plant, np.zeros(3), 3.0), [6.0, 0.0, 0.0])


def test_plant_rejects_bad_state(example):
    with pytest.raises(DimensionMismatch):
        plant_deriv(example.plant, np.zeros(2), 0.0)


def test_target_derivatives(example):
    t = example.target
    assert np.all(target_deriv(t, np.zeros(3), 0.0) == 0.0)
    f0 = eval_reference(example.reference, 0.0)
    assert f0 == 0.0
    np.testing.assert_allclose(target_deriv(t, X0_EX, f0), [-0.68, -0.14, -0.73], atol=1e-15)
    base = t.A_m @ X0_EX
    np.testing.assert_allclose(target_deriv(t, X0_EX, 0.8) - base, base - target_deriv(t, X0_EX, -0.8), atol=1e-15)


def test_reference_values(example):
    assert eval_reference(example.reference, math.pi / 4) == pytest.approx(1.4 + math.sin(5 * math.pi / 8), abs=1e-15)
    const = ReferenceSignalSpec(offset=0.7)
    assert eval_reference(const, 12.3) == 0.7
    assert example.reference.amplitude_bound == pytest.approx(2.4)


def test_tabulated_reference():
    with pytest.raises(ValueError):
        ReferenceSignalSpec(table_t=(0.0, 1.0), table_f=(0.0, 1.0))
    spec = ReferenceSignalSpec(table_t=(0.0, 1.0, 2.0), table_f=(0.0, 2.0, 1.0), unchecked_amplitude=True)
    assert eval_reference(spec, 0.5) == pytest.approx(1.0)
    assert eval_reference(spec, 5.0) == 1.0
    assert spec.amplitude_bound == 2.0


def test_nonlinearity_values():
    spec = NonlinearitySpec.uniform("tanh", 3)
    assert np.all(eval_nonlinearity(spec, np.zeros(3)) == 0.0)
    big = eval_nonlinearity(spec, np.array([1e3, -1e3, 40.0]))
    assert np.all(np.abs(big) <= 1.0)
    mixed = NonlinearitySpec(("tanh", "sin", "cos_minus_one", "softsat"))
    X = np.array([0.7, -1.3, 2.1, -4.0])
    expected = [math.tanh(0.7), math.sin(-1.3), math.cos(2.1) - 1.0, -4.0 / 5.0]
    np.testing.assert_allclose(eval_nonlinearity(mixed, X), expected, rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        NonlinearitySpec(("exp",))


@pytest.mark.parametrize("name", sorted(NONLINEARITIES))
def test_nonlinearity_lipschitz_audit(name):
    rng = np.random.default_rng(7)
    spec = NonlinearitySpec.uniform(name, 3)
    X = rng.normal(scale=3.0, size=(1000, 3))
    Y = rng.normal(scale=3.0, size=(1000, 3))
    for x, y in zip(X, Y):
        lhs = np.linalg.norm(eval_nonlinearity(spec, x) - eval_nonlinearity(spec, y))
        assert lhs <= np.linalg.norm(x - y) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_plant_linearity(alpha, u, seed):
    rng = np.random.default_rng(seed)
    plant = PlantModel(A=rng.normal(size=(3, 3)), B=rng.normal(size=3), lam=rng.uniform(0.1, 2), X0=np.zeros(3))
    X = rng.normal(size=3)
    np.testing.assert_allclose(plant_deriv(plant, alpha * X, alpha * u), alpha * plant_deriv(plant, X, u), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_matching_error_dynamics(r, seed):
    # with the matching gains, the error obeys E' = A_m E
    example = load_bundled("example_3state")
    rng = np.random.default_rng(seed)
    X, X_m = rng.normal(size=3), rng.normal(size=3)
    K, l = example.truth["K"], example.truth["l"]
    u = K @ X + l * r
    dE = plant_deriv(example.plant, X, u) - target_deriv(example.target, X_m, r)
    np.testing.assert_allclose(dE, example.target.A_m @ (X - X_m), atol=1e-12)


def test_rk4_scalar_decay_polynomial():
    h = 0.1
    y = rk4_step(lambda t, y: -y, 0.0, np.array([1.0, -2.0]), h)
    factor = 1 - h + h**2 / 2 - h**3 / 6 + h**4 / 24
    np.testing.assert_allclose(y, [factor, -2 * factor], rtol=1e-15)


def test_models_validate_shapes():
    with pytest.raises(DimensionMismatch):
        TargetModel(A_m=-np.eye(2), B_m=[1.0, 0.0, 0.0], X_m0=[0.0, 0.0])
    with pytest.raises(ValueError):
        PlantModel(A=np.eye(2), B=[1.0, 0.0], lam=0.0, X0=[0.0, 0.0])
    with pytest.raises(ValueError):
        PlantModel(A=np.eye(2), B=[1.0, 0.0], lam=1.0, X0=[0.0, 0.0], A1=np.eye(2))
    assert SineTerm(1.0, 2.0).phase == 0.0
