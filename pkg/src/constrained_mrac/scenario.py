"""Scenario data model, JSON (de)serialization and feasibility checks.

A scenario bundles the true plant, the target model, the state/input
constraints, projection bounds, adaptation gains, initial estimates, the
reference signal and integrator settings. The checks here mirror the
hypotheses the closed-loop guarantees rest on; failing checks are
reported as values, not raised.
"""

import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.linalg import expm
from scipy.signal import fftconvolve

from .adaptation import AdaptationGains, EstimateState
from .controller import ControllerVariant
from .dynamics import (
    NonlinearitySpec,
    PlantModel,
    ReferenceSignalSpec,
    SineTerm,
    TargetModel,
)
from .errors import InfeasibleConstraint, MatchingViolated, MracError, NotHurwitz, ScenarioError
from .linalg import (
    derive_matching_gains,
    derive_nonlinear_gain,
    eig_extrema_sym,
    is_controllable,
    is_hurwitz,
    solve_lyapunov,
)

SCHEMA_VERSION = 1
DEFAULT_DT = 1e-3
DEFAULT_T = 30.0


@dataclass(frozen=True)
class ConstraintSpec:
    M_x: float
    M_u: float
    M_xm: float
    f_M: float


@dataclass(frozen=True)
class ProjectionBounds:
    M_K: float
    m_l: float
    M_l: float
    sign_l: int = 1
    M_K1: float = None


@dataclass(frozen=True)
class BarrierSpec:
    M_e: float
    M: float
    pair: object

    @property
    def M_sq(self):
        return self.M * self.M


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    lhs: float
    rhs: float
    detail: dict = field(default_factory=dict)

    def describe(self):
        rel = ">=" if self.passed else "<"
        return f"{self.name}: {self.lhs:.6g} {rel} {self.rhs:.6g} -> {'PASS' if self.passed else 'FAIL'}"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class ScenarioConfig:
    plant: PlantModel
    target: TargetModel
    constraints: ConstraintSpec
    bounds: ProjectionBounds
    gains: AdaptationGains
    initial: EstimateState
    reference: ReferenceSignalSpec
    dt: float = DEFAULT_DT
    T: float = DEFAULT_T
    variant: ControllerVariant = ControllerVariant.STATE_AND_INPUT
    Q: np.ndarray = None
    truth: dict = None
    name: str = "scenario"
    abort_on_margin: bool = False
    soft_barrier: bool = False

    @property
    def n(self):
        return self.plant.n

    def lyapunov_pair(self):
        return solve_lyapunov(self.target.A_m, self.Q)

    def barrier(self):
        return compute_barrier(self.constraints, self.lyapunov_pair())

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_input_bound(self, M_u):
        return self.replace(constraints=dataclasses.replace(self.constraints, M_u=float(M_u)))

    def with_derived_truth(self):
        """Attach matching gains computed from the (simulation-known) plant."""
        K, l = derive_matching_gains(self.plant.A, self.target.A_m, self.plant.B, self.plant.lam, self.target.B_m)
        truth = {"K": K, "l": l}
        if self.plant.is_nonlinear:
            truth["K1"] = derive_nonlinear_gain(self.plant.A1, self.plant.B, self.plant.lam)
        return self.replace(truth=truth)


def compute_barrier(constraints, pair):
    """M_e = M_x - M_xm and M = M_e sqrt(lambda_min(P))."""
    if not constraints.M_xm < constraints.M_x:
        raise InfeasibleConstraint(f"M_xm = {constraints.M_xm} must be below M_x = {constraints.M_x}")
    M_e = constraints.M_x - constraints.M_xm
    lam_min, _ = eig_extrema_sym(pair.P)
    return BarrierSpec(M_e=M_e, M=M_e * math.sqrt(lam_min), pair=pair)


def verify_offline_stability(bounds, constraints):
    """Worst-case a priori check M_u >= M_K M_x - m_l f_M."""
    rhs = bounds.M_K * constraints.M_x - bounds.m_l * constraints.f_M
    return CheckReport(
        name="offline stability condition",
        passed=bool(constraints.M_u >= rhs),
        lhs=constraints.M_u,
        rhs=rhs,
    )


def _square_wave_inputs(target, f_M, horizon):
    periods = [1.0, 2.0, 4.0, 8.0]
    for lam in np.linalg.eigvals(target.A_m):
        if abs(lam.imag) > 1e-9:
            periods.append(2.0 * math.pi / abs(lam.imag))
    signals = [("constant", None, 1.0), ("constant", None, -1.0)]
    for p in sorted(set(round(float(p), 12) for p in periods)):
        if p < horizon:
            signals.extend([("square", p, 1.0), ("square", p, -1.0)])
    return signals


def _zoh_responses(target, horizon, dt):
    """Free response and input-to-state impulse response of the exact ZOH discretization."""
    n = target.n
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = target.A_m
    aug[:n, n] = target.B_m
    E = expm(aug * dt)
    Ad, bd = E[:n, :n], E[:n, n]
    steps = int(math.floor(horizon / dt + 1e-9))
    free = np.empty((steps + 1, n))
    impulse = np.empty((steps, n))
    x, v = target.X_m0.astype(float), bd.copy()
    for k in range(steps):
        free[k] = x
        impulse[k] = v
        x = Ad @ x
        v = Ad @ v
    free[steps] = x
    return free, impulse


def _dither_sup_norm(free, impulse, f_M, dt, kind, period, sign):
    steps = impulse.shape[0]
    if kind == "constant":
        r = np.full(steps, sign * f_M)
    else:
        phase = np.mod(np.arange(steps) * dt, period)
        r = sign * f_M * np.where(phase < 0.5 * period, 1.0, -1.0)
    # x[k+1] = Ad^(k+1) x0 + sum_j Ad^(k-j) bd r[j]
    forced = np.column_stack([fftconvolve(r, impulse[:, i])[:steps] for i in range(impulse.shape[1])])
    x = free.copy()
    x[1:] += forced
    return float(np.max(np.linalg.norm(x, axis=1)))


def verify_reference_bound(target, f_M, M_xm, pair_m=None, horizon=DEFAULT_T, dt=DEFAULT_DT):
    """Check that |f| <= f_M keeps ||X_m|| <= M_xm.

    Two tiers: a conservative Lyapunov bound
    sqrt(lmax/lmin) * max(||X_m0||, 2 ||P_m B_m|| f_M / lmin(Q_m)) <= M_xm,
    and an empirical sweep of square-wave inputs of amplitude f_M.
    ``passed`` is true when either tier passes; both are in ``detail``.
    """
    if not is_hurwitz(target.A_m):
        raise NotHurwitz(np.max(np.linalg.eigvals(target.A_m).real))
    if pair_m is None:
        pair_m = solve_lyapunov(target.A_m)
    p_min, p_max = eig_extrema_sym(pair_m.P)
    q_min, _ = eig_extrema_sym(pair_m.Q)
    x0 = float(np.linalg.norm(target.X_m0))
    forced = 2.0 * float(np.linalg.norm(pair_m.P @ target.B_m)) * f_M / q_min
    analytic = math.sqrt(p_max / p_min) * max(x0, forced)

    empirical = 0.0
    worst = None
    free, impulse = _zoh_responses(target, horizon, dt)
    for kind, period, sign in _square_wave_inputs(target, f_M, horizon):
        s = _dither_sup_norm(free, impulse, f_M, dt, kind, period, sign)
        if s > empirical:
            empirical, worst = s, (kind, period, sign)

    analytic_ok = analytic <= M_xm
    empirical_ok = empirical <= M_xm
    return CheckReport(
        name="reference bound",
        passed=bool(analytic_ok or empirical_ok),
        lhs=M_xm,
        rhs=min(analytic, empirical),
        detail={
            "analytic_bound": analytic,
            "analytic_pass": bool(analytic_ok),
            "empirical_sup": empirical,
            "empirical_pass": bool(empirical_ok),
            "worst_signal": worst,
            "initial_norm": x0,
        },
    )


def validate_scenario(config):
    """Enumerate every violated hypothesis; an empty list means the scenario is admissible."""
    out = []

    def bad(code, msg):
        out.append(Violation(code, msg))

    c, b, est = config.constraints, config.bounds, config.initial
    for name in ("M_x", "M_u", "M_xm", "f_M"):
        if not getattr(c, name) > 0:
            bad("constraint_nonpositive", f"{name} must be positive")
    if not c.M_xm < c.M_x:
        bad("infeasible_constraint", f"M_xm = {c.M_xm} is not below M_x = {c.M_x}")
    if not b.M_K > 0:
        bad("bounds", "M_K must be positive")
    if not 0 < b.m_l <= b.M_l:
        bad("bounds", f"need 0 < m_l <= M_l, got m_l={b.m_l}, M_l={b.M_l}")
    if b.sign_l not in (1, -1):
        bad("bounds", f"sign_l must be +1 or -1, got {b.sign_l}")
    if not (config.dt > 0 and config.T > 0):
        bad("integrator", "dt and T must be positive")

    k0 = float(np.linalg.norm(est.K_hat))
    if est.K_hat.shape != (config.n,):
        bad("dimension", f"K_hat(0) has shape {est.K_hat.shape}")
    elif k0 > b.M_K:
        bad("initial_K_hat", f"||K_hat(0)|| = {k0:.6g} exceeds M_K = {b.M_K}")
    if abs(est.l_hat) < b.m_l:
        bad("initial_l_hat_low", f"initial l̂ below m_l ({abs(est.l_hat)} < {b.m_l})")
    if abs(est.l_hat) > b.M_l:
        bad("initial_l_hat_high", f"initial l̂ above M_l ({abs(est.l_hat)} > {b.M_l})")
    if est.l_hat != 0 and np.sign(est.l_hat) != b.sign_l:
        bad("initial_l_hat_sign", "sign of l̂(0) differs from sign_l")

    xm0 = float(np.linalg.norm(config.target.X_m0))
    if xm0 > c.M_xm:
        bad("initial_target", f"||X_m0|| = {xm0:.6g} exceeds M_xm = {c.M_xm}")

    if not is_hurwitz(config.target.A_m):
        bad("not_hurwitz", "A_m is not Hurwitz")
    elif c.M_xm < c.M_x:
        try:
            barrier = config.barrier()
        except MracError as exc:
            bad("lyapunov", str(exc))
        else:
            e0 = config.plant.X0 - config.target.X_m0
            epe = float(e0 @ barrier.pair.P @ e0)
            if not epe < barrier.M_sq:
                bad("initial_barrier", f"E(0)^T P E(0) = {epe:.6g} is not below M^2 = {barrier.M_sq:.6g}")

    ref = config.reference
    if not ref.unchecked_amplitude and ref.amplitude_bound > c.f_M:
        bad("reference_amplitude", f"sum of reference amplitudes {ref.amplitude_bound:.6g} exceeds f_M = {c.f_M}")

    if not is_controllable(config.plant.A, config.plant.b):
        bad("not_controllable", "(A, B lambda) is not controllable")

    try:
        K, l = derive_matching_gains(
            config.plant.A, config.target.A_m, config.plant.B, config.plant.lam, config.target.B_m
        )
    except MatchingViolated as exc:
        bad("matching", str(exc))
    else:
        if float(np.linalg.norm(K)) > b.M_K:
            bad("matching_K_bound", f"||K|| = {np.linalg.norm(K):.6g} exceeds M_K = {b.M_K}")
        if not b.m_l <= abs(l) <= b.M_l:
            bad("matching_l_bound", f"|l| = {abs(l):.6g} outside [m_l, M_l] = [{b.m_l}, {b.M_l}]")
        if np.sign(l) != b.sign_l:
            bad("matching_sign", f"sign(l) = {int(np.sign(l))} differs from sign_l = {b.sign_l}")

    nonlinear_variant = config.variant is ControllerVariant.NONLINEAR_STATE_AND_INPUT
    if nonlinear_variant or config.plant.is_nonlinear:
        missing = [
            name
            for name, value in (
                ("A1/nonlinearity", config.plant.A1),
                ("M_K1", b.M_K1),
                ("Gamma_K1", config.gains.Gamma_K1),
                ("K1_hat(0)", est.K1_hat),
            )
            if value is None
        ]
        if missing:
            bad("nonlinear_incomplete", "nonlinear scenario lacks " + ", ".join(missing))
        else:
            try:
                K1 = derive_nonlinear_gain(config.plant.A1, config.plant.B, config.plant.lam)
            except MatchingViolated as exc:
                bad("matching_nonlinear", str(exc))
            else:
                if float(np.linalg.norm(K1)) > b.M_K1:
                    bad("matching_K1_bound", f"||K1|| = {np.linalg.norm(K1):.6g} exceeds M_K1 = {b.M_K1}")
            k10 = float(np.linalg.norm(est.K1_hat))
            if k10 > b.M_K1:
                bad("initial_K1_hat", f"||K1_hat(0)|| = {k10:.6g} exceeds M_K1 = {b.M_K1}")
        if config.plant.is_nonlinear and not nonlinear_variant:
            bad("variant", "nonlinear plant requires the nonlinear_state_and_input variant")
    return out


# --- JSON ---------------------------------------------------------------


def _get(d, key, where):
    try:
        return d[key]
    except (KeyError, TypeError):
        raise ScenarioError(f"missing field '{where}{key}'") from None


def _opt_array(v):
    return None if v is None else np.asarray(v, dtype=float)


def config_from_dict(d):
    """Build a ScenarioConfig from a parsed JSON document."""
    if not isinstance(d, dict):
        raise ScenarioError("scenario document must be a JSON object")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}")
    try:
        p = _get(d, "plant", "")
        nl = p.get("nonlinearity")
        if isinstance(nl, str):
            nl = NonlinearitySpec.uniform(nl, len(_get(p, "B", "plant.")))
        elif nl is not None:
            nl = NonlinearitySpec(tuple(nl))
        plant = PlantModel(
            A=_get(p, "A", "plant."),
            B=_get(p, "B", "plant."),
            lam=float(_get(p, "lambda", "plant.")),
            X0=_get(p, "X0", "plant."),
            A1=_opt_array(p.get("A1")),
            nonlinearity=nl,
        )
        t = _get(d, "target", "")
        target = TargetModel(A_m=_get(t, "A_m", "target."), B_m=_get(t, "B_m", "target."), X_m0=_get(t, "X_m0", "target."))
        c = _get(d, "constraints", "")
        constraints = ConstraintSpec(
            M_x=float(_get(c, "M_x", "constraints.")),
            M_u=float(_get(c, "M_u", "constraints.")),
            M_xm=float(_get(c, "M_xm", "constraints.")),
            f_M=float(_get(c, "f_M", "constraints.")),
        )
        bd = _get(d, "bounds", "")
        bounds = ProjectionBounds(
            M_K=float(_get(bd, "M_K", "bounds.")),
            m_l=float(_get(bd, "m_l", "bounds.")),
            M_l=float(_get(bd, "M_l", "bounds.")),
            sign_l=int(bd.get("sign_l", 1)),
            M_K1=None if bd.get("M_K1") is None else float(bd["M_K1"]),
        )
        g = _get(d, "gains", "")
        gains = AdaptationGains(
            Gamma_K=float(_get(g, "Gamma_K", "gains.")),
            Gamma_l=float(_get(g, "Gamma_l", "gains.")),
            Gamma_K1=None if g.get("Gamma_K1") is None else float(g["Gamma_K1"]),
        )
        ie = _get(d, "initial_estimates", "")
        initial = EstimateState(
            K_hat=_get(ie, "K_hat", "initial_estimates."),
            l_hat=float(_get(ie, "l_hat", "initial_estimates.")),
            K1_hat=_opt_array(ie.get("K1_hat")),
        )
        r = _get(d, "reference", "")
        table = r.get("table")
        reference = ReferenceSignalSpec(
            terms=tuple(
                SineTerm(float(_get(term, "amplitude", "reference.terms.")), float(_get(term, "omega", "reference.terms.")), float(term.get("phase", 0.0)))
                for term in r.get("terms", [])
            ),
            offset=float(r.get("offset", 0.0)),
            table_t=None if table is None else tuple(_get(table, "t", "reference.table.")),
            table_f=None if table is None else tuple(_get(table, "f", "reference.table.")),
            unchecked_amplitude=bool(r.get("unchecked_amplitude", False)),
        )
        integ = d.get("integrator", {})
        truth = d.get("truth")
        if truth is not None:
            truth = {
                "K": np.asarray(_get(truth, "K", "truth."), dtype=float),
                "l": float(_get(truth, "l", "truth.")),
                **({"K1": np.asarray(truth["K1"], dtype=float)} if truth.get("K1") is not None else {}),
            }
        options = d.get("options", {})
        return ScenarioConfig(
            plant=plant,
            target=target,
            constraints=constraints,
            bounds=bounds,
            gains=gains,
            initial=initial,
            reference=reference,
            dt=float(integ.get("dt", DEFAULT_DT)),
            T=float(integ.get("T", DEFAULT_T)),
            variant=ControllerVariant(d.get("variant", ControllerVariant.STATE_AND_INPUT.value)),
            Q=_opt_array(d.get("lyapunov_Q")),
            truth=truth,
            name=str(d.get("name", "scenario")),
            abort_on_margin=bool(options.get("abort_on_margin", False)),
            soft_barrier=bool(options.get("soft_barrier", False)),
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc


def _lst(a):
    return None if a is None else np.asarray(a).tolist()


def config_to_dict(config):
    ref = config.reference
    d = {
        "schema_version": SCHEMA_VERSION,
        "name": config.name,
        "variant": config.variant.value,
        "plant": {
            "A": _lst(config.plant.A),
            "B": _lst(config.plant.B),
            "lambda": config.plant.lam,
            "X0": _lst(config.plant.X0),
            "A1": _lst(config.plant.A1),
            "nonlinearity": None if config.plant.nonlinearity is None else list(config.plant.nonlinearity.components),
        },
        "target": {"A_m": _lst(config.target.A_m), "B_m": _lst(config.target.B_m), "X_m0": _lst(config.target.X_m0)},
        "lyapunov_Q": _lst(config.Q),
        "constraints": dataclasses.asdict(config.constraints),
        "bounds": dataclasses.asdict(config.bounds),
        "gains": dataclasses.asdict(config.gains),
        "initial_estimates": {
            "K_hat": _lst(config.initial.K_hat),
            "l_hat": config.initial.l_hat,
            "K1_hat": _lst(config.initial.K1_hat),
        },
        "reference": {
            "terms": [dataclasses.asdict(term) for term in ref.terms],
            "offset": ref.offset,
            "table": None if ref.table_t is None else {"t": list(ref.table_t), "f": list(ref.table_f)},
            "unchecked_amplitude": ref.unchecked_amplitude,
        },
        "integrator": {"dt": config.dt, "T": config.T},
        "options": {"abort_on_margin": config.abort_on_margin, "soft_barrier": config.soft_barrier},
    }
    if config.truth is not None:
        d["truth"] = {k: (_lst(v) if k != "l" else v) for k, v in config.truth.items()}
    return d


def load_scenario(path):
    """Read a scenario JSON file; raises ScenarioError on malformed input."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(doc)


def dump_scenario(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2)
        fh.write("\n")


BUNDLED = ("example_3state", "nonlinear_2state")


def bundled_path(name="example_3state"):
    return resources.files("constrained_mrac") / "data" / f"{name}.json"


def load_bundled(name="example_3state"):
    """Load one of the scenarios shipped with the package."""
    if name not in BUNDLED:
        raise ScenarioError(f"unknown bundled scenario {name!r}; choose from {', '.join(BUNDLED)}")
    with resources.as_file(bundled_path(name)) as p:
        return load_scenario(p)
