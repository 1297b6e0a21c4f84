"""Barrier gradient term and projection-based update laws for K_hat, l_hat, K1_hat."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BarrierSaturated, BarrierViolated

BARRIER_FLOOR = 1e-12
BOUNDARY_BAND = 1e-9


@dataclass(frozen=True)
class EstimateState:
    K_hat: np.ndarray
    l_hat: float
    K1_hat: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "K_hat", np.asarray(self.K_hat, dtype=float))
        object.__setattr__(self, "l_hat", float(self.l_hat))
        if self.K1_hat is not None:
            object.__setattr__(self, "K1_hat", np.asarray(self.K1_hat, dtype=float))


@dataclass(frozen=True)
class AdaptationGains:
    Gamma_K: float
    Gamma_l: float
    Gamma_K1: float = None

    def __post_init__(self):
        if self.Gamma_K <= 0 or self.Gamma_l <= 0:
            raise ValueError("adaptation gains must be strictly positive")
        if self.Gamma_K1 is not None and self.Gamma_K1 <= 0:
            raise ValueError("Gamma_K1 must be strictly positive")


def barrier_mu(epe, epb, sign_l, M_sq):
    """mu from the scalars E^T P E and E^T P B_m.

    Raises BarrierViolated outside the barrier and warns with
    BarrierSaturated when the squared denominator is floored.
    """
    if not epe < M_sq:
        raise BarrierViolated(epe, M_sq)
    denom = (M_sq - epe) ** 2
    if denom < BARRIER_FLOOR:
        warnings.warn(f"barrier denominator floored ({denom:.3e})", BarrierSaturated, stacklevel=2)
        denom = BARRIER_FLOOR
    return 2.0 * M_sq * epb * sign_l / denom


def compute_mu(E, pair, B_m, sign_l, M):
    """mu = 2 M^2 E^T P B_m sign(l) / (M^2 - E^T P E)^2.

    The same expression gives the modified-error version when E is X - X_m^s.
    """
    E = np.asarray(E, dtype=float)
    PE = pair.P @ E
    return barrier_mu(float(E @ PE), float(PE @ B_m), sign_l, M * M)


def quadratic_mu(E, pair, B_m, sign_l):
    """Gradient term of the plain quadratic Lyapunov function (no barrier)."""
    E = np.asarray(E, dtype=float)
    return 2.0 * float(E @ (pair.P @ B_m)) * sign_l


def _ball_projected(theta, v, radius):
    # v is the unprojected derivative; flow is outward iff theta . v > 0
    norm_sq = float(theta.dot(theta))
    if norm_sq < (radius * (1.0 - BOUNDARY_BAND)) ** 2:
        return v
    radial = float(theta.dot(v))
    if radial <= 0.0:
        return v
    return v - theta * (radial / norm_sq)


def k_hat_deriv(K_hat, mu, X, Gamma_K, M_K):
    """-Gamma_K mu X, projected tangentially when on the ||K_hat|| = M_K sphere with outward flow."""
    v = -Gamma_K * mu * np.asarray(X, dtype=float)
    return _ball_projected(np.asarray(K_hat, dtype=float), v, M_K)


def k1_hat_deriv(K1_hat, mu, phi_x, Gamma_K1, M_K1):
    """Same law as k_hat_deriv with Phi(X) as the regressor and M_K1 as the radius."""
    v = -Gamma_K1 * mu * np.asarray(phi_x, dtype=float)
    return _ball_projected(np.asarray(K1_hat, dtype=float), v, M_K1)


def l_hat_deriv(l_hat, mu, r, Gamma_l, m_l, M_l):
    """-Gamma_l mu r, frozen when |l_hat| sits on a bound and the flow points outside.

    ``r`` is the total reference: f for the state-only controller, f + g
    once the reference is modified.
    """
    drive = mu * r * l_hat
    a = abs(l_hat)
    if a <= m_l * (1.0 + BOUNDARY_BAND) and drive > 0.0:
        return 0.0
    if a >= M_l * (1.0 - BOUNDARY_BAND) and drive < 0.0:
        return 0.0
    return -Gamma_l * mu * r


def project_estimates(est, bounds):
    """Pull estimates that drifted past their bounds during a discrete step back inside.

    Returns (estimate, corrected) where ``corrected`` tells whether anything moved.
    """
    corrected = False
    K_hat = est.K_hat
    norm = math.sqrt(float(K_hat.dot(K_hat)))
    if norm > bounds.M_K * (1.0 + BOUNDARY_BAND):
        K_hat = K_hat * (bounds.M_K / norm)
        corrected = True

    l_hat = est.l_hat
    a = abs(l_hat)
    sign = bounds.sign_l
    if a < bounds.m_l * (1.0 - BOUNDARY_BAND) or np.sign(l_hat) != sign:
        l_hat = sign * bounds.m_l
        corrected = True
    elif a > bounds.M_l * (1.0 + BOUNDARY_BAND):
        l_hat = sign * bounds.M_l
        corrected = True

    K1_hat = est.K1_hat
    if K1_hat is not None and bounds.M_K1 is not None:
        norm1 = math.sqrt(float(K1_hat.dot(K1_hat)))
        if norm1 > bounds.M_K1 * (1.0 + BOUNDARY_BAND):
            K1_hat = K1_hat * (bounds.M_K1 / norm1)
            corrected = True

    if not corrected:
        return est, False
    return EstimateState(K_hat, l_hat, K1_hat), True
