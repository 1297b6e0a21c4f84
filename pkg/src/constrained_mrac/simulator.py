"""Fixed-step RK4 integration of the closed loop.

The augmented state stacks the plant state X, the original target X_m,
the modified target X_m^s, and the estimates (K_hat, l_hat, optionally
K1_hat). The controller, and with it the reference modification g, is
re-evaluated at every RK4 stage.
"""

import dataclasses
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adaptation import (
    BARRIER_FLOOR,
    EstimateState,
    barrier_mu,
    k1_hat_deriv,
    k_hat_deriv,
    l_hat_deriv,
    project_estimates,
)
from .controller import (
    SAT_HIGH,
    SAT_LOW,
    UNSATURATED,
    ControlDecision,
    ControllerVariant,
    g_sup_bound,
    reference_modification,
)
from .dynamics import eval_nonlinearity, eval_reference
from .errors import BarrierSaturated, BarrierViolated, MracError, NonFiniteState, StabilityConditionViolated

FINAL_WINDOW = 0.1
CONVERGENCE_TOL = 1e-2
SOFT_BARRIER_FRACTION = 0.999
INPUT_TOL = 1e-9

MODE_CODES = {UNSATURATED: 0, "sat_high": 1, "sat_low": -1}


@dataclass(frozen=True)
class AugmentedState:
    t: float
    X: np.ndarray
    X_m: np.ndarray
    X_ms: np.ndarray
    est: EstimateState


@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    detail: str = ""


@dataclass
class SimulationTrace:
    """Uniformly sampled closed-loop record; array columns share the time axis."""

    t: np.ndarray
    X: np.ndarray
    X_m: np.ndarray
    X_ms: np.ndarray
    K_hat: np.ndarray
    l_hat: np.ndarray
    f: np.ndarray
    u_nominal: np.ndarray
    g: np.ndarray
    u_applied: np.ndarray
    margin: np.ndarray
    mode: np.ndarray
    barrier_fraction: np.ndarray
    K1_hat: np.ndarray = None
    V: np.ndarray = None
    events: list = field(default_factory=list)

    def __len__(self):
        return self.t.shape[0]

    @property
    def x_norm(self):
        return np.linalg.norm(self.X, axis=1)

    @property
    def es_norm(self):
        return np.linalg.norm(self.X - self.X_ms, axis=1)

    @property
    def e_norm(self):
        return np.linalg.norm(self.X - self.X_m, axis=1)

    @property
    def etilde_norm(self):
        """||E - E^s|| = ||X_m^s - X_m||."""
        return np.linalg.norm(self.X_ms - self.X_m, axis=1)


@dataclass
class RunSummary:
    name: str
    variant: str
    M_x: float
    M_u: float
    M_e: float
    M: float
    f_M: float
    dt: float
    T: float
    n_samples: int
    sup_x_norm: float
    sup_u_applied: float
    sup_u_nominal: float
    sup_g: float
    g_bound: float
    inf_margin: float
    sup_es_norm: float
    final_error_mean: float
    sup_target_deviation: float
    sup_etilde_final_half: float
    sup_barrier_fraction: float
    sup_K_hat_norm: float
    min_abs_l_hat: float
    max_abs_l_hat: float
    projection_corrections: int
    aborted: bool = False
    abort_reason: str = ""
    event_counts: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def constraints_satisfied(self):
        return bool(self.flags.get("state_constraint") and self.flags.get("input_constraint"))

    def to_dict(self):
        return dataclasses.asdict(self)


class ClosedLoop:
    """Vector field of the augmented closed-loop system for one scenario."""

    def __init__(self, config):
        self.config = config
        self.variant = ControllerVariant(config.variant)
        self.plant = config.plant
        self.target = config.target
        self.n = n = config.n
        self.nonlinear = self.variant is ControllerVariant.NONLINEAR_STATE_AND_INPUT
        if self.nonlinear and not config.plant.is_nonlinear:
            raise MracError("nonlinear variant requires a plant with A1 and a nonlinearity")
        self.barrier = config.barrier()
        self.P = self.barrier.pair.P
        self.PBm = self.P @ self.target.B_m
        self.M_sq = self.barrier.M_sq
        self.sign_l = config.bounds.sign_l
        self.size = 4 * n + 1 + (n if self.nonlinear else 0)
        self.A = self.plant.A
        self.A_m = self.target.A_m
        self.b = self.plant.b
        self.B_m = self.target.B_m
        self.A1 = self.plant.A1
        self.modifies_reference = self.variant.modifies_reference
        self.uses_barrier = self.variant.uses_barrier
        self.soft_hits = 0

    # -- packing ---------------------------------------------------------
    def pack(self, state):
        parts = [state.X, state.X_m, state.X_ms, state.est.K_hat, [state.est.l_hat]]
        if self.nonlinear:
            parts.append(state.est.K1_hat)
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def unpack(self, z, t=0.0):
        n = self.n
        est = EstimateState(z[3 * n : 4 * n].copy(), float(z[4 * n]), z[4 * n + 1 :].copy() if self.nonlinear else None)
        return AugmentedState(t, z[:n].copy(), z[n : 2 * n].copy(), z[2 * n : 3 * n].copy(), est)

    def initial_state(self):
        cfg = self.config
        init = cfg.initial
        est = EstimateState(init.K_hat, init.l_hat, init.K1_hat if self.nonlinear else None)
        return AugmentedState(0.0, cfg.plant.X0.copy(), cfg.target.X_m0.copy(), cfg.target.X_m0.copy(), est)

    # -- vector field ----------------------------------------------------
    def evaluate(self, t, z, full=True):
        """Return (dz, decision, f, E^T P E) at (t, z).

        Inlined for speed; the result equals plant_deriv, target_deriv and
        constrained_control composed by hand. ``full=False`` skips building
        the decision record.
        """
        n = self.n
        cfg = self.config
        c = cfg.constraints
        X = z[:n]
        K_hat = z[3 * n : 4 * n]
        l_hat = float(z[4 * n])
        f = eval_reference(cfg.reference, t)

        fb = float(K_hat.dot(X))
        if self.nonlinear:
            phi = eval_nonlinearity(self.plant.nonlinearity, X)
            K1_hat = z[4 * n + 1 :]
            fb += float(K1_hat.dot(phi))
        u = fb + l_hat * f
        if self.modifies_reference:
            g = reference_modification(u, c.M_u, l_hat)
            u_applied = min(max(u, -c.M_u), c.M_u)
            E = X - z[2 * n : 3 * n]
        else:
            g = 0.0
            u_applied = u
            E = X - z[n : 2 * n]
        r = f + g

        epe = float(E.dot(self.P.dot(E)))
        epb = float(E.dot(self.PBm))
        if not math.isfinite(epe):
            raise NonFiniteState(t)
        if self.uses_barrier:
            if not (cfg.soft_barrier or epe < self.M_sq):
                raise BarrierViolated(epe, self.M_sq, t)
            if cfg.soft_barrier and not epe < self.M_sq:
                scale = math.sqrt(SOFT_BARRIER_FRACTION * self.M_sq / epe)
                epe, epb = epe * scale * scale, epb * scale
                self.soft_hits += 1
            mu = barrier_mu(epe, epb, self.sign_l, self.M_sq)
        else:
            mu = 2.0 * epb * self.sign_l

        gains = cfg.gains
        b = cfg.bounds
        dz = np.empty(self.size)
        # separate products for X_m and X_m^s keep them bit-identical while g == 0
        dz[:n] = self.A.dot(X) + self.b * u_applied
        dz[n : 2 * n] = self.A_m.dot(z[n : 2 * n]) + self.B_m * f
        dz[2 * n : 3 * n] = self.A_m.dot(z[2 * n : 3 * n]) + self.B_m * r
        if self.nonlinear:
            dz[:n] += self.A1 @ phi
            dz[4 * n + 1 :] = k1_hat_deriv(K1_hat, mu, phi, gains.Gamma_K1, b.M_K1)
        dz[3 * n : 4 * n] = k_hat_deriv(K_hat, mu, X, gains.Gamma_K, b.M_K)
        dz[4 * n] = l_hat_deriv(l_hat, mu, r, gains.Gamma_l, b.m_l, b.M_l)
        if not full:
            return dz, None, f, epe

        margin = c.M_u - (abs(fb) - l_hat * self.sign_l * c.f_M)
        mode = UNSATURATED
        if self.modifies_reference:
            if u >= c.M_u:
                mode = SAT_HIGH
            elif u <= -c.M_u:
                mode = SAT_LOW
        dec = ControlDecision(u_nominal=u, g=g, u_applied=u_applied, margin=margin, mode=mode)
        return dz, dec, f, epe

    def rhs(self, t, z):
        return self.evaluate(t, z, full=False)[0]

    def lyapunov_value(self, z, epe):
        """Barrier Lyapunov function with parameter-error terms; needs fixture truth."""
        truth = self.config.truth
        if truth is None:
            return float("nan")
        n = self.n
        gains = self.config.gains
        gamma = self.sign_l / truth["l"]
        dK = z[3 * n : 4 * n] - truth["K"]
        dl = z[4 * n] - truth["l"]
        if self.variant.uses_barrier:
            head = epe / (self.M_sq - epe)
        else:
            head = epe
        V = head + gamma * float(dK @ dK) / (2.0 * gains.Gamma_K) + gamma * dl * dl / (2.0 * gains.Gamma_l)
        if self.nonlinear and "K1" in truth:
            dK1 = z[4 * n + 1 :] - truth["K1"]
            V += gamma * float(dK1 @ dK1) / (2.0 * gains.Gamma_K1)
        return V

    # -- stepping --------------------------------------------------------
    def advance(self, t, z, h, k1=None):
        """One RK4 step plus projection cleanup; returns (z_next, corrected)."""
        f = self.rhs
        if k1 is None:
            k1 = f(t, z)
        k2 = f(t + 0.5 * h, z + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, z + 0.5 * h * k2)
        k4 = f(t + h, z + h * k3)
        z_next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(z_next)):
            raise NonFiniteState(t + h)

        n = self.n
        est = EstimateState(z_next[3 * n : 4 * n], z_next[4 * n], z_next[4 * n + 1 :] if self.nonlinear else None)
        est2, corrected = project_estimates(est, self.config.bounds)
        if corrected:
            z_next[3 * n : 4 * n] = est2.K_hat
            z_next[4 * n] = est2.l_hat
            if self.nonlinear:
                z_next[4 * n + 1 :] = est2.K1_hat
        return z_next, corrected

    def barrier_check(self, t, z):
        """Enforce E^T P E < M^2 on an accepted state.

        Returns (z, renormalized); soft mode rescales E radially to 0.999 of
        the barrier instead of raising.
        """
        if not self.uses_barrier:
            return z, False
        n = self.n
        anchor = z[2 * n : 3 * n] if self.modifies_reference else z[n : 2 * n]
        E = z[:n] - anchor
        epe = float(E.dot(self.P.dot(E)))
        if epe < self.M_sq:
            return z, False
        if not self.config.soft_barrier:
            raise BarrierViolated(epe, self.M_sq, t)
        z = z.copy()
        z[:n] = anchor + E * math.sqrt(SOFT_BARRIER_FRACTION * self.M_sq / epe)
        return z, True

    # -- compiled engine -------------------------------------------------
    def kernel_args(self):
        from . import _kernel as K

        cfg = self.config
        c, b, g = cfg.constraints, cfg.bounds, cfg.gains
        ref = cfg.reference
        truth = cfg.truth
        n = self.n
        flags = np.zeros(8, dtype=np.int64)
        flags[K.F_N] = n
        flags[K.F_NONLINEAR] = self.nonlinear
        flags[K.F_MODREF] = self.modifies_reference
        flags[K.F_BARRIER] = self.uses_barrier
        flags[K.F_SOFT] = cfg.soft_barrier
        flags[K.F_TRUTH] = truth is not None
        flags[K.F_ABORT_MARGIN] = cfg.abort_on_margin
        flags[K.F_TABLE] = ref.table_t is not None
        sc = np.zeros(14)
        sc[K.S_MU] = c.M_u
        sc[K.S_FM] = c.f_M
        sc[K.S_MSQ] = self.M_sq
        sc[K.S_SIGN] = self.sign_l
        sc[K.S_GK] = g.Gamma_K
        sc[K.S_GL] = g.Gamma_l
        sc[K.S_GK1] = g.Gamma_K1 or 1.0
        sc[K.S_MK] = b.M_K
        sc[K.S_ML_LO] = b.m_l
        sc[K.S_ML_HI] = b.M_l
        sc[K.S_MK1] = b.M_K1 or 1.0
        sc[K.S_OFFSET] = ref.offset
        sc[K.S_LTRUE] = truth["l"] if truth is not None else 1.0
        sc[K.S_SOFT_FRAC] = SOFT_BARRIER_FRACTION
        zeros = np.zeros(n)
        codes = np.array(
            [K.NL_CODES[name] for name in self.plant.nonlinearity.components] if self.nonlinear else [0] * n,
            dtype=np.int64,
        )
        return (
            flags,
            sc,
            self.A,
            self.A_m,
            np.ascontiguousarray(self.b),
            self.B_m,
            self.P,
            self.PBm,
            self.A1 if self.nonlinear else np.zeros((n, n)),
            codes,
            np.array([term.amplitude for term in ref.terms], dtype=float),
            np.array([term.omega for term in ref.terms], dtype=float),
            np.array([term.phase for term in ref.terms], dtype=float),
            np.array(ref.table_t if ref.table_t is not None else [0.0, 1.0], dtype=float),
            np.array(ref.table_f if ref.table_f is not None else [0.0, 0.0], dtype=float),
            np.asarray(truth["K"], dtype=float) if truth is not None else zeros,
            np.asarray(truth.get("K1", zeros), dtype=float) if truth is not None else zeros,
        )


def step(state, config, loop=None):
    """Advance an AugmentedState by one fixed step of size config.dt."""
    loop = loop or ClosedLoop(config)
    z = loop.pack(state)
    z_next, _ = loop.advance(state.t, z, config.dt)
    t_next = state.t + config.dt
    z_next, _ = loop.barrier_check(t_next, z_next)
    return loop.unpack(z_next, t_next)


def _num_steps(config):
    return int(math.floor(config.T / config.dt + 1e-9))


@dataclass
class _RawRun:
    Z: np.ndarray
    rec: np.ndarray
    floors: np.ndarray
    renorm: np.ndarray
    count: int
    status: int
    status_t: float
    status_val: float
    corrections: int
    soft_hits: int
    first_neg: int


def _integrate_python(loop, steps, h):
    from ._kernel import STATUS_BARRIER, STATUS_MARGIN, STATUS_NONFINITE, STATUS_OK

    cfg = loop.config
    N = steps + 1
    Z = np.empty((N, loop.size))
    rec = np.empty((N, 8))
    floors = np.zeros(N, dtype=np.int64)
    renorm = np.zeros(N, dtype=np.int64)
    raw = _RawRun(Z, rec, floors, renorm, 0, STATUS_OK, 0.0, 0.0, 0, 0, -1)
    z = loop.pack(loop.initial_state())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BarrierSaturated)
        for k in range(N):
            t = k * h
            try:
                dz, dec, f, epe = loop.evaluate(t, z)
            except BarrierViolated as exc:
                raw.status, raw.status_t, raw.status_val = STATUS_BARRIER, t, exc.value
                break
            except NonFiniteState:
                raw.status, raw.status_t = STATUS_NONFINITE, t
                break
            Z[k] = z
            V = loop.lyapunov_value(z, epe) if cfg.truth is not None else np.nan
            rec[k] = (f, dec.u_nominal, dec.g, dec.u_applied, dec.margin, MODE_CODES[dec.mode], epe / loop.M_sq, V)
            raw.count = k + 1
            if dec.margin < 0 and raw.first_neg < 0:
                raw.first_neg = k
                if cfg.abort_on_margin:
                    raw.status, raw.status_t, raw.status_val = STATUS_MARGIN, t, dec.margin
                    break
            if k == steps:
                floors[k] += len(caught)
                break
            try:
                z_next, corrected = loop.advance(t, z, h, k1=dz)
                z_next, renormed = loop.barrier_check(t + h, z_next)
            except BarrierViolated as exc:
                raw.status, raw.status_t, raw.status_val = STATUS_BARRIER, exc.t if exc.t is not None else t, exc.value
                break
            except NonFiniteState as exc:
                raw.status, raw.status_t = STATUS_NONFINITE, exc.t
                break
            floors[k] += len(caught)
            caught.clear()
            raw.corrections += corrected
            renorm[k + 1] = renormed
            z = z_next
    raw.soft_hits = loop.soft_hits
    return raw


def _integrate_compiled(loop, steps, h):
    from . import _kernel

    z0 = loop.pack(loop.initial_state())
    return _RawRun(*_kernel.integrate(z0, steps, h, *loop.kernel_args()))


def _episodes(mask):
    """Start/stop indices of contiguous True runs."""
    if not mask.any():
        return []
    d = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1) - 1))


def _collect_events(loop, trace, raw):
    c = loop.config.constraints
    t = trace.t
    events = []
    x_norm = trace.x_norm
    for i, j in _episodes(x_norm >= c.M_x):
        peak = float(np.max(x_norm[i : j + 1]))
        events.append(Event(float(t[i]), "state_constraint_violated", f"||X|| >= M_x = {c.M_x} until t={t[j]:.6g}, peak {peak:.6g}"))
    u_abs = np.abs(trace.u_applied)
    for i, j in _episodes(u_abs > c.M_u + INPUT_TOL):
        peak = float(np.max(u_abs[i : j + 1]))
        events.append(Event(float(t[i]), "input_constraint_violated", f"|u| > M_u = {c.M_u} until t={t[j]:.6g}, peak {peak:.6g}"))
    if raw.first_neg >= 0:
        k = raw.first_neg
        events.append(Event(float(t[k]), "stability_condition_violated", f"margin = {trace.margin[k]:.6g}"))
    floors = raw.floors[: len(trace)]
    for k in np.flatnonzero(floors):
        events.append(Event(float(t[k]), "barrier_saturated", f"denominator floored at {BARRIER_FLOOR:g} ({floors[k]}x)"))
    for k in np.flatnonzero(raw.renorm[: len(trace)]):
        events.append(Event(float(t[k]), "barrier_renormalized", "E^s rescaled to 0.999 of the barrier (outside theory)"))
    if raw.soft_hits:
        events.append(Event(float(t[-1]), "soft_barrier_stage_clips", f"{raw.soft_hits} stage evaluations clipped"))
    if loop.modifies_reference:
        xms_norm = np.linalg.norm(trace.X_ms, axis=1)
        bad = (xms_norm <= c.M_xm) & (trace.barrier_fraction < 1.0) & (x_norm >= c.M_x)
        for i, _ in _episodes(bad):
            events.append(Event(float(t[i]), "lemma_inconsistency", "barrier and target bound hold but ||X|| >= M_x"))
    events.sort(key=lambda ev: ev.t)
    return events


def _abort_exception(raw, M_sq):
    from ._kernel import STATUS_BARRIER, STATUS_MARGIN, STATUS_NONFINITE

    if raw.status == STATUS_BARRIER:
        return BarrierViolated(raw.status_val, M_sq, raw.status_t)
    if raw.status == STATUS_NONFINITE:
        return NonFiniteState(raw.status_t)
    if raw.status == STATUS_MARGIN:
        return StabilityConditionViolated(raw.status_val, raw.status_t)
    return None


def run(config, raise_on_abort=True, engine="compiled"):
    """Simulate the scenario over [0, T]; returns (trace, summary).

    ``engine`` selects the compiled loop or the pure-numpy reference
    implementation; both produce the same trace to rounding. With
    ``raise_on_abort=False`` a barrier violation, non-finite state or
    (when configured) a negative stability margin ends the run early and
    is reported in the summary instead of raising.
    """
    loop = ClosedLoop(config)
    steps = _num_steps(config)
    if engine == "compiled":
        raw = _integrate_compiled(loop, steps, config.dt)
    elif engine == "python":
        raw = _integrate_python(loop, steps, config.dt)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    exc = _abort_exception(raw, loop.M_sq)
    if exc is not None and (raise_on_abort or raw.count == 0):
        raise exc
    n = loop.n
    sl = slice(0, raw.count)
    Z, rec = raw.Z, raw.rec
    trace = SimulationTrace(
        t=np.arange(raw.count) * config.dt,
        X=Z[sl, :n],
        X_m=Z[sl, n : 2 * n],
        X_ms=Z[sl, 2 * n : 3 * n],
        K_hat=Z[sl, 3 * n : 4 * n],
        l_hat=Z[sl, 4 * n],
        K1_hat=Z[sl, 4 * n + 1 :] if loop.nonlinear else None,
        f=rec[sl, 0],
        u_nominal=rec[sl, 1],
        g=rec[sl, 2],
        u_applied=rec[sl, 3],
        margin=rec[sl, 4],
        mode=rec[sl, 5].astype(int),
        barrier_fraction=rec[sl, 6],
        V=rec[sl, 7] if config.truth is not None else None,
    )
    trace.events = _collect_events(loop, trace, raw)
    reason = ""
    if exc is not None:
        reason = f"{type(exc).__name__}: {exc}"
        trace.events.append(Event(float(raw.status_t), "abort", reason))
    summary = summarize(config, loop, trace, raw.corrections, exc is not None, reason)
    return trace, summary


def summarize(config, loop, trace, corrections=0, aborted=False, reason=""):
    c = config.constraints
    b = config.bounds
    N = len(trace)
    es = trace.es_norm
    etilde = trace.etilde_norm
    tail = max(1, int(math.ceil(FINAL_WINDOW * N)))
    half = max(1, N // 2)
    counts = {}
    for ev in trace.events:
        counts[ev.kind] = counts.get(ev.kind, 0) + 1
    abs_l = np.abs(trace.l_hat)
    s = RunSummary(
        name=config.name,
        variant=ControllerVariant(config.variant).value,
        M_x=c.M_x,
        M_u=c.M_u,
        M_e=loop.barrier.M_e,
        M=loop.barrier.M,
        f_M=c.f_M,
        dt=config.dt,
        T=config.T,
        n_samples=N,
        sup_x_norm=float(np.max(trace.x_norm)),
        sup_u_applied=float(np.max(np.abs(trace.u_applied))),
        sup_u_nominal=float(np.max(np.abs(trace.u_nominal))),
        sup_g=float(np.max(np.abs(trace.g))),
        g_bound=g_sup_bound(c.f_M, c.M_u, b.m_l, b.M_K, c.M_x, b.M_l),
        inf_margin=float(np.min(trace.margin)),
        sup_es_norm=float(np.max(es)),
        final_error_mean=float(np.mean(es[-tail:])),
        sup_target_deviation=float(np.max(etilde)),
        sup_etilde_final_half=float(np.max(etilde[N - half :])),
        sup_barrier_fraction=float(np.max(trace.barrier_fraction)),
        sup_K_hat_norm=float(np.max(np.linalg.norm(trace.K_hat, axis=1))),
        min_abs_l_hat=float(np.min(abs_l)),
        max_abs_l_hat=float(np.max(abs_l)),
        projection_corrections=int(corrections),
        aborted=aborted,
        abort_reason=reason,
        event_counts=counts,
    )
    s.flags = {
        "state_constraint": s.sup_x_norm < c.M_x,
        "input_constraint": s.sup_u_applied <= c.M_u + INPUT_TOL,
        "margin_nonnegative": s.inf_margin >= 0.0,
        "error_within_barrier": s.sup_es_norm < s.M_e,
        "tracking_converged": s.final_error_mean < CONVERGENCE_TOL,
        "estimates_bounded": bool(
            s.sup_K_hat_norm <= b.M_K * (1 + 1e-9)
            and b.m_l * (1 - 1e-9) <= s.min_abs_l_hat
            and s.max_abs_l_hat <= b.M_l * (1 + 1e-9)
        ),
        "completed": not aborted,
    }
    return s


def _run_for_sweep(args):
    config, raise_on_abort = args
    try:
        return run(config, raise_on_abort=raise_on_abort)
    except MracError as exc:
        return exc


def sweep_runs(config, values, workers=1):
    """Run the scenario once per input bound; returns a list of (M_u, result).

    ``result`` is a (trace, summary) pair, or the exception that ended the run.
    """
    configs = [config.with_input_bound(v) for v in values]
    jobs = [(cfg, True) for cfg in configs]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_for_sweep, jobs))
    else:
        results = [_run_for_sweep(job) for job in jobs]
    return list(zip([float(v) for v in values], results))


def sweep_Mu(config, values, workers=1):
    """One RunSummary per M_u value; failed runs appear as their exception."""
    return [res if isinstance(res, Exception) else res[1] for _, res in sweep_runs(config, values, workers)]
