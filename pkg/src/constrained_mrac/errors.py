"""Exception and warning types raised across the package."""


class MracError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MracError, ValueError):
    pass


class NotHurwitz(MracError):
    def __init__(self, max_real_part):
        self.max_real_part = float(max_real_part)
        super().__init__(f"matrix is not Hurwitz (max real part of eigenvalues = {self.max_real_part:.6g})")


class SingularSystem(MracError):
    pass


class NotSymmetric(MracError, ValueError):
    def __init__(self, asymmetry):
        self.asymmetry = float(asymmetry)
        super().__init__(f"matrix is not symmetric (max |S - S^T| = {self.asymmetry:.3e})")


class MatchingViolated(MracError):
    """No gains (K, l) reproduce the target model from the plant."""

    def __init__(self, residual_K, residual_l):
        self.residual_K = float(residual_K)
        self.residual_l = float(residual_l)
        super().__init__(
            f"matching condition violated: state residual {self.residual_K:.3e}, "
            f"input residual {self.residual_l:.3e}"
        )


class InfeasibleConstraint(MracError, ValueError):
    pass


class BarrierViolated(MracError):
    """The weighted tracking error left the barrier set E^T P E < M^2."""

    def __init__(self, value, radius_sq, t=None):
        self.value = float(value)
        self.radius_sq = float(radius_sq)
        self.t = t
        where = "" if t is None else f" at t={t:.6g}"
        super().__init__(f"barrier violated{where}: E^T P E = {self.value:.6g} >= M^2 = {self.radius_sq:.6g}")


class NonFiniteState(MracError):
    def __init__(self, t=None):
        self.t = t
        super().__init__("non-finite state encountered" + ("" if t is None else f" at t={t:.6g}"))


class IdentityViolated(MracError):
    pass


class StabilityConditionViolated(MracError):
    def __init__(self, margin, t=None):
        self.margin = float(margin)
        self.t = t
        super().__init__(f"stability condition violated (margin {self.margin:.6g}) at t={t}")


class ScenarioError(MracError, ValueError):
    """Scenario document could not be parsed into a configuration."""


class MissingColumn(MracError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing column"


class BarrierSaturated(RuntimeWarning):
    """The barrier denominator hit its numerical floor."""
