"""Control laws, reference modification g, and the online stability margin."""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import IdentityViolated

IDENTITY_TOL = 1e-12


class ControllerVariant(str, enum.Enum):
    STATE_ONLY = "state_only"
    STATE_AND_INPUT = "state_and_input"
    NONLINEAR_STATE_AND_INPUT = "nonlinear_state_and_input"
    BASELINE_MRAC = "baseline_mrac"

    @property
    def modifies_reference(self):
        return self in (ControllerVariant.STATE_AND_INPUT, ControllerVariant.NONLINEAR_STATE_AND_INPUT)

    @property
    def uses_barrier(self):
        return self is not ControllerVariant.BASELINE_MRAC


UNSATURATED = "unsaturated"
SAT_HIGH = "sat_high"
SAT_LOW = "sat_low"


@dataclass(frozen=True)
class ControlDecision:
    u_nominal: float
    g: float
    u_applied: float
    margin: float
    mode: str

    def total_reference(self, f):
        """f + g, the signal driving the modified target and the l_hat law."""
        return f + self.g


def feedback_term(est, X, phi_x=None):
    """K_hat^T X (+ K1_hat^T Phi(X))."""
    value = float(est.K_hat @ X)
    if phi_x is not None and est.K1_hat is not None:
        value += float(est.K1_hat @ phi_x)
    return value


def nominal_control(est, X, f, phi_x=None):
    """u = K_hat^T X + l_hat f (+ K1_hat^T Phi(X) in the nonlinear variant)."""
    X = np.asarray(X, dtype=float)
    return feedback_term(est, X, phi_x) + est.l_hat * f


def reference_modification(u_nominal, M_u, l_hat):
    """Additive reference correction g; |u| == M_u goes to the saturating branch."""
    if u_nominal >= M_u:
        return (M_u - u_nominal) / l_hat
    if u_nominal <= -M_u:
        return (-M_u - u_nominal) / l_hat
    return 0.0


def assumption_margin(est, X, f_M, M_u, sign_l, phi_x=None):
    """M_u - (|K_hat^T X (+ K1_hat^T Phi)| - l_hat sign(l) f_M); >= 0 means the condition holds."""
    return M_u - (abs(feedback_term(est, np.asarray(X, dtype=float), phi_x)) - est.l_hat * sign_l * f_M)


def constrained_control(est, X, f, M_u, phi_x=None, *, f_M=None, sign_l=1):
    """Saturating control with the matching reference modification.

    The applied input is clamp(u, -M_u, M_u); g is chosen so that
    u + l_hat g reproduces it, and that identity is checked.
    """
    u = nominal_control(est, X, f, phi_x)
    g = reference_modification(u, M_u, est.l_hat)
    if u >= M_u:
        u_applied, mode = M_u, SAT_HIGH
    elif u <= -M_u:
        u_applied, mode = -M_u, SAT_LOW
    else:
        u_applied, mode = u, UNSATURATED
    if abs(u + est.l_hat * g - u_applied) > IDENTITY_TOL * max(1.0, abs(u)):
        raise IdentityViolated(f"u + l_hat*g = {u + est.l_hat * g!r} but clamp(u) = {u_applied!r}")
    margin = float("nan") if f_M is None else assumption_margin(est, X, f_M, M_u, sign_l, phi_x)
    return ControlDecision(u_nominal=u, g=g, u_applied=u_applied, margin=margin, mode=mode)


def baseline_control(est, X, f):
    """Conventional MRAC input: same structure as nominal_control, never saturated."""
    return nominal_control(est, X, f)


def g_sup_bound(f_M, M_u, m_l, M_K, M_x, M_l):
    """Uniform bound on |g| using C = M_K M_x + M_l f_M."""
    C = M_K * M_x + M_l * f_M
    return min(2.0 * f_M, max((C - M_u) / m_l, 0.0))
