"""Shared scenario builders for the test-suite."""

import math

import numpy as np

from constrained_mrac.adaptation import AdaptationGains, EstimateState
from constrained_mrac.controller import ControllerVariant
from constrained_mrac.dynamics import PlantModel, ReferenceSignalSpec, SineTerm, TargetModel
from constrained_mrac.linalg import eig_extrema_sym, solve_lyapunov
from constrained_mrac.scenario import ConstraintSpec, ProjectionBounds, ScenarioConfig


def random_hurwitz(rng, n, shift=(0.5, 2.0)):
    R = rng.normal(size=(n, n))
    top = np.max(np.linalg.eigvals(R).real)
    return R - (top + rng.uniform(*shift)) * np.eye(n)


def random_admissible(rng, n, T=10.0, dt=1e-3, variant=ControllerVariant.STATE_AND_INPUT):
    """Random matching-consistent scenario that passes validate_scenario.

    M_xm comes from the Lyapunov bound on the target, which holds for any
    reference with |f| <= f_M, so the reference-bound check passes too.
    """
    A_m = random_hurwitz(rng, n)
    B = rng.normal(size=n)
    lam = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    b = B * lam
    M_K = rng.uniform(3.0, 10.0)
    K = rng.normal(size=n)
    K *= M_K * rng.uniform(0.2, 0.8) / np.linalg.norm(K)
    m_l = rng.uniform(0.5, 1.0)
    M_l = m_l * rng.uniform(2.0, 4.0)
    sign_l = int(rng.choice([-1, 1]))
    l = sign_l * rng.uniform(m_l, M_l)
    A = A_m - np.outer(b, K)
    B_m = b * l

    f_M = 1.0
    share = rng.dirichlet([1.0, 1.0]) * f_M * rng.uniform(0.6, 1.0)
    terms = tuple(SineTerm(float(a), float(rng.uniform(0.5, 3.0)), float(rng.uniform(0, 2 * math.pi))) for a in share)

    X_m0 = rng.normal(size=n) * 0.1
    pair = solve_lyapunov(A_m)
    p_min, p_max = eig_extrema_sym(pair.P)
    forced = 2.0 * np.linalg.norm(pair.P @ B_m) * f_M
    M_xm = 1.05 * math.sqrt(p_max / p_min) * max(np.linalg.norm(X_m0), forced)
    M_e = M_xm * rng.uniform(0.1, 0.5)
    M_x = M_xm + M_e
    M = M_e * math.sqrt(p_min)

    direction = rng.normal(size=n)
    direction /= math.sqrt(direction @ pair.P @ direction)
    X0 = X_m0 + direction * M * math.sqrt(rng.uniform(0.0, 0.5))

    offline = M_K * M_x - m_l * f_M
    M_u = max(offline * rng.uniform(0.03, 0.6), 0.1)

    k0 = rng.normal(size=n)
    k0 *= M_K * rng.uniform(0.0, 0.9) / np.linalg.norm(k0)
    return ScenarioConfig(
        plant=PlantModel(A=A, B=B, lam=lam, X0=X0),
        target=TargetModel(A_m=A_m, B_m=B_m, X_m0=X_m0),
        constraints=ConstraintSpec(M_x=M_x, M_u=M_u, M_xm=M_xm, f_M=f_M),
        bounds=ProjectionBounds(M_K=M_K, m_l=m_l, M_l=M_l, sign_l=sign_l),
        gains=AdaptationGains(Gamma_K=rng.uniform(0.1, 2.0), Gamma_l=rng.uniform(0.05, 1.0)),
        initial=EstimateState(K_hat=k0, l_hat=sign_l * rng.uniform(m_l, M_l)),
        reference=ReferenceSignalSpec(terms=terms),
        dt=dt,
        T=T,
        variant=variant,
        truth={"K": K, "l": float(l)},
        name=f"random_n{n}",
    )


def with_active_saturation(config, rng, low=0.5, high=0.9):
    """Same scenario with M_u set below the peak nominal input of a free run."""
    from constrained_mrac.simulator import run

    _, summary = run(config.with_input_bound(1e6))
    peak = summary.sup_u_nominal
    return config.with_input_bound(max(peak * rng.uniform(low, high), 1e-3))
