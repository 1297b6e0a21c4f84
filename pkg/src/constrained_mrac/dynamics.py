"""Plant, target and reference-signal models and their vector fields."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import as_square, as_vector, is_hurwitz

# Every primitive is globally Lipschitz with constant 1 and vanishes at 0
# (except where noted), which keeps the nonlinear matching assumption checkable.
NONLINEARITIES = {
    "tanh": np.tanh,
    "sin": np.sin,
    "cos_minus_one": lambda x: np.cos(x) - 1.0,
    "softsat": lambda x: x / (1.0 + np.abs(x)),
}


@dataclass(frozen=True)
class NonlinearitySpec:
    """Elementwise nonlinearity Phi(X); one primitive name per state component."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        unknown = [c for c in comps if c not in NONLINEARITIES]
        if unknown:
            raise ValueError(f"unknown nonlinearity {unknown}; choose from {sorted(NONLINEARITIES)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def uniform(cls, name, n):
        return cls((name,) * n)

    @property
    def n(self):
        return len(self.components)


@dataclass(frozen=True)
class PlantModel:
    A: np.ndarray
    B: np.ndarray
    lam: float
    X0: np.ndarray
    A1: np.ndarray = None
    nonlinearity: NonlinearitySpec = None

    def __post_init__(self):
        A = as_square(self.A, "A")
        n = A.shape[0]
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", as_vector(self.B, n, "B"))
        object.__setattr__(self, "X0", as_vector(self.X0, n, "X0"))
        if self.lam == 0:
            raise ValueError("input gain lambda must be nonzero")
        object.__setattr__(self, "lam", float(self.lam))
        if (self.A1 is None) != (self.nonlinearity is None):
            raise ValueError("A1 and nonlinearity must be given together")
        if self.A1 is not None:
            A1 = as_square(self.A1, "A1")
            if A1.shape != A.shape:
                raise DimensionMismatch("A1 must have the same shape as A")
            object.__setattr__(self, "A1", A1)
            if self.nonlinearity.n != n:
                raise DimensionMismatch(f"nonlinearity has {self.nonlinearity.n} components, expected {n}")

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def is_nonlinear(self):
        return self.A1 is not None

    @property
    def b(self):
        """Effective input vector B*lambda."""
        return self.B * self.lam


@dataclass(frozen=True)
class TargetModel:
    A_m: np.ndarray
    B_m: np.ndarray
    X_m0: np.ndarray

    def __post_init__(self):
        A_m = as_square(self.A_m, "A_m")
        n = A_m.shape[0]
        object.__setattr__(self, "A_m", A_m)
        object.__setattr__(self, "B_m", as_vector(self.B_m, n, "B_m"))
        object.__setattr__(self, "X_m0", as_vector(self.X_m0, n, "X_m0"))

    @property
    def n(self):
        return self.A_m.shape[0]

    @property
    def hurwitz(self):
        return is_hurwitz(self.A_m)


@dataclass(frozen=True)
class SineTerm:
    amplitude: float
    omega: float
    phase: float = 0.0


@dataclass(frozen=True)
class ReferenceSignalSpec:
    """Sum of sinusoids plus a constant, or a tabulated signal.

    Tabulated signals are linearly interpolated (held constant beyond the
    table ends) and are only accepted with ``unchecked_amplitude`` set,
    since their amplitude bound is the user's responsibility.
    """

    terms: tuple = ()
    offset: float = 0.0
    table_t: tuple = None
    table_f: tuple = None
    unchecked_amplitude: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.table_t is not None:
            if not self.unchecked_amplitude:
                raise ValueError("tabulated reference requires unchecked_amplitude=True")
            t = np.asarray(self.table_t, dtype=float)
            f = np.asarray(self.table_f, dtype=float)
            if t.shape != f.shape or t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
                raise ValueError("reference table needs matching, strictly increasing samples")
            object.__setattr__(self, "table_t", tuple(t))
            object.__setattr__(self, "table_f", tuple(f))

    @property
    def amplitude_bound(self):
        """Sufficient bound sup|f| <= sum|a_i| + |c| (exact max for tables)."""
        if self.table_t is not None:
            return float(np.max(np.abs(self.table_f)))
        return sum(abs(term.amplitude) for term in self.terms) + abs(self.offset)


def eval_reference(spec, t):
    """f(t) = sum a_i sin(w_i t + phi_i) + c."""
    if spec.table_t is not None:
        return float(np.interp(t, spec.table_t, spec.table_f))
    value = spec.offset
    for term in spec.terms:
        value += term.amplitude * math.sin(term.omega * t + term.phase)
    return value


def eval_nonlinearity(spec, X):
    X = np.asarray(X, dtype=float)
    if X.shape != (spec.n,):
        raise DimensionMismatch(f"state has shape {X.shape}, nonlinearity expects ({spec.n},)")
    names = spec.components
    if all(name == names[0] for name in names):
        return NONLINEARITIES[names[0]](X)
    return np.array([NONLINEARITIES[name](x) for name, x in zip(names, X)])


def plant_deriv(plant, X, u):
    """AX + B lam u (+ A1 Phi(X) for the nonlinear plant)."""
    X = np.asarray(X, dtype=float)
    if X.shape != (plant.n,):
        raise DimensionMismatch(f"state has shape {X.shape}, expected ({plant.n},)")
    dX = plant.A @ X + plant.b * u
    if plant.A1 is not None:
        dX = dX + plant.A1 @ eval_nonlinearity(plant.nonlinearity, X)
    return dX


def target_deriv(target, X_m, r):
    """A_m X_m + B_m r; r is f for the original target or f + g for the modified one."""
    X_m = np.asarray(X_m, dtype=float)
    if X_m.shape != (target.n,):
        raise DimensionMismatch(f"state has shape {X_m.shape}, expected ({target.n},)")
    return target.A_m @ X_m + target.B_m * r


def rk4_step(fun, t, y, h):
    """One classical Runge-Kutta step of y' = fun(t, y)."""
    k1 = fun(t, y)
    k2 = fun(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = fun(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = fun(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
