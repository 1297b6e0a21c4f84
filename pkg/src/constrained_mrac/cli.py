"""Command-line front end.

Exit codes: 0 success, 1 validation failure or constraint violation,
2 unreadable/malformed input, 3 numerical abort.
"""

import argparse
import os
import sys

import numpy as np

from .controller import ControllerVariant
from .errors import MissingColumn, MracError, ScenarioError
from .figures import export_figures
from .linalg import derive_matching_gains, eig_extrema_sym
from .scenario import (
    BUNDLED,
    DEFAULT_T,
    load_bundled,
    load_scenario,
    validate_scenario,
    verify_offline_stability,
    verify_reference_bound,
)
from .simulator import run, sweep_runs
from .traces import write_run

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ABORT = 0, 1, 2, 3


def _load(source):
    """Scenario from a JSON path, or a bundled scenario by name."""
    if not os.path.exists(source) and source in BUNDLED:
        return load_bundled(source)
    if not os.path.exists(source):
        raise ScenarioError(f"{source}: no such file (bundled scenarios: {', '.join(BUNDLED)})")
    return load_scenario(source)


def _apply_overrides(config, args):
    changes = {}
    if getattr(args, "dt", None) is not None:
        changes["dt"] = args.dt
    if getattr(args, "T", None) is not None:
        changes["T"] = args.T
    if getattr(args, "variant", None) is not None:
        changes["variant"] = ControllerVariant(args.variant)
    if getattr(args, "soft_barrier", False):
        changes["soft_barrier"] = True
    if changes:
        config = config.replace(**changes)
    if getattr(args, "Mu", None) is not None:
        config = config.with_input_bound(args.Mu)
    return config


def validation_report(config):
    """Human-readable check lines and whether every hard check passed."""
    lines = []
    hard_ok = True
    violations = validate_scenario(config)
    c, b = config.constraints, config.bounds

    eig = np.linalg.eigvals(config.target.A_m)
    lines.append(f"target Hurwitz: max Re(eig A_m) = {eig.real.max():.6g} -> {'PASS' if eig.real.max() < 0 else 'FAIL'}")
    try:
        pair = config.lyapunov_pair()
        barrier = config.barrier()
    except MracError as exc:
        lines.append(f"Lyapunov/barrier: {exc} -> FAIL")
    else:
        lam_min, lam_max = eig_extrema_sym(pair.P)
        lines.append(f"Lyapunov: residual {pair.residual_norm:.3e}, eig(P) in [{lam_min:.6g}, {lam_max:.6g}]")
        lines.append(f"barrier: M_e = M_x - M_xm = {barrier.M_e:.6g}, M = {barrier.M:.6g}")
    try:
        K, l = derive_matching_gains(config.plant.A, config.target.A_m, config.plant.B, config.plant.lam, config.target.B_m)
    except MracError as exc:
        lines.append(f"matching: {exc} -> FAIL")
    else:
        lines.append(f"matching: K = {np.array2string(K, precision=6)}, l = {l:.6g}, ||K|| = {np.linalg.norm(K):.6g} (M_K = {b.M_K:g})")

    if not violations or all(v.code != "not_hurwitz" for v in violations):
        try:
            ref = verify_reference_bound(config.target, c.f_M, c.M_xm, horizon=max(config.T, DEFAULT_T))
        except MracError as exc:
            lines.append(f"reference bound: {exc} -> FAIL")
            hard_ok = False
        else:
            d = ref.detail
            lines.append(
                f"reference bound: analytic {d['analytic_bound']:.6g} ({'PASS' if d['analytic_pass'] else 'FAIL'}), "
                f"empirical sup {d['empirical_sup']:.6g} ({'PASS' if d['empirical_pass'] else 'FAIL'}) "
                f"vs M_xm = {c.M_xm:g} -> {'PASS' if ref.passed else 'FAIL'}"
            )
            hard_ok = hard_ok and ref.passed

    off = verify_offline_stability(b, c)
    if off.passed:
        lines.append(f"{off.rhs:g} <= {off.lhs:g}: offline check PASS")
    else:
        lines.append(f"{off.rhs:g} > {off.lhs:g}: offline check FAIL (informational)")

    for v in violations:
        lines.append(f"FAIL {v}")
    if violations:
        hard_ok = False
    lines.append("validation: " + ("PASS" if hard_ok else "FAIL"))
    return lines, hard_ok


def cmd_validate(args):
    try:
        config = _load(args.scenario)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    lines, ok = validation_report(config)
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def _summary_lines(summary):
    s = summary
    return [
        f"{s.name} [{s.variant}] M_u = {s.M_u:g}",
        f"  sup ||X||     = {s.sup_x_norm:.6g}  (M_x = {s.M_x:g})",
        f"  sup |u_s|     = {s.sup_u_applied:.6g}  (nominal {s.sup_u_nominal:.6g})",
        f"  sup |g|       = {s.sup_g:.6g}  (bound {s.g_bound:.6g})",
        f"  inf margin    = {s.inf_margin:.6g}",
        f"  sup ||E^s||   = {s.sup_es_norm:.6g}  (M_e = {s.M_e:.6g})",
        f"  mean ||E^s|| over last 10% = {s.final_error_mean:.6g}",
        f"  sup ||X_m^s - X_m|| = {s.sup_target_deviation:.6g}",
        "  flags: " + ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in s.flags.items()),
    ] + ([f"  aborted: {s.abort_reason}"] if s.aborted else [])


def _exit_for(summary):
    if summary.aborted:
        return EXIT_ABORT
    return EXIT_OK if summary.constraints_satisfied else EXIT_FAIL


def _prepare(args):
    """Load, override and (unless --force) validate; returns (config, exit code or None)."""
    try:
        config = _apply_overrides(_load(args.scenario), args)
    except (ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_INPUT
    if not getattr(args, "force", False):
        lines, ok = validation_report(config)
        if not ok:
            print("\n".join(lines))
            print("refusing to run an inadmissible scenario (use --force)", file=sys.stderr)
            return None, EXIT_FAIL
    return config, None


def _simulate_one(config, out_dir, engine):
    try:
        trace, summary = run(config, raise_on_abort=False, engine=engine)
    except MracError as exc:
        print(f"numerical abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return None, EXIT_ABORT
    write_run(trace, summary, out_dir)
    print("\n".join(_summary_lines(summary)))
    for ev in trace.events:
        if ev.kind.endswith("violated") or ev.kind == "abort":
            print(f"  event t={ev.t:.6g}: {ev.kind} {ev.detail}")
    return summary, _exit_for(summary)


def cmd_simulate(args):
    config, code = _prepare(args)
    if config is None:
        return code
    _, code = _simulate_one(config, args.out, args.engine)
    return code


def cmd_compare(args):
    config, code = _prepare(args)
    if config is None:
        return code
    constrained = config
    if config.variant is ControllerVariant.BASELINE_MRAC:
        constrained = config.replace(variant=ControllerVariant.STATE_AND_INPUT)
    baseline = config.replace(variant=ControllerVariant.BASELINE_MRAC)
    summary, code = _simulate_one(constrained, os.path.join(args.out, "constrained"), args.engine)
    base_summary, _ = _simulate_one(baseline, os.path.join(args.out, "baseline"), args.engine)
    if summary is not None and base_summary is not None:
        ratio = base_summary.sup_u_applied / summary.sup_u_applied if summary.sup_u_applied else float("inf")
        print(f"baseline sup|u| / constrained sup|u_s| = {ratio:.4g}")
    return code


def cmd_sweep(args):
    config, code = _prepare(args)
    if config is None:
        return code
    os.makedirs(args.out, exist_ok=True)
    rows = []
    worst = EXIT_OK
    for M_u, result in sweep_runs(config, args.Mu_values, workers=args.workers):
        sub = os.path.join(args.out, f"Mu_{M_u:g}")
        if isinstance(result, Exception):
            print(f"M_u = {M_u:g}: {type(result).__name__}: {result}")
            rows.append(f"{M_u!r},nan,nan,nan,nan,aborted")
            worst = max(worst, EXIT_ABORT)
            continue
        trace, summary = result
        write_run(trace, summary, sub)
        code = _exit_for(summary)
        worst = max(worst, code)
        rows.append(
            f"{M_u!r},{summary.sup_target_deviation!r},{summary.sup_etilde_final_half!r},"
            f"{summary.sup_u_applied!r},{summary.sup_x_norm!r},{'ok' if code == EXIT_OK else 'violation'}"
        )
        print(
            f"M_u = {M_u:g}: sup||X_m^s - X_m|| = {summary.sup_target_deviation:.6g}, "
            f"final-half sup = {summary.sup_etilde_final_half:.6g}, sup|g| = {summary.sup_g:.6g}"
        )
    with open(os.path.join(args.out, "sweep.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("M_u,sup_target_deviation,sup_etilde_final_half,sup_u_applied,sup_x_norm,status\n")
        fh.write("\n".join(rows) + "\n")
    return worst


def cmd_export_figures(args):
    try:
        paths = export_figures(args.trace, args.out, baseline=args.baseline, sweep=args.sweep or ())
    except MissingColumn as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for p in paths:
        print(p)
    return EXIT_OK


def _add_overrides(p, with_Mu=True):
    p.add_argument("--dt", type=float, help="integration step [s]")
    p.add_argument("--T", type=float, help="horizon [s]")
    if with_Mu:
        p.add_argument("--Mu", type=float, help="input magnitude bound")
    p.add_argument("--variant", choices=[v.value for v in ControllerVariant])
    p.add_argument("--force", action="store_true", help="run even if validation fails")
    p.add_argument("--soft-barrier", action="store_true", help="renormalize instead of aborting at the barrier")
    p.add_argument("--engine", choices=["compiled", "python"], default="compiled")


def build_parser():
    parser = argparse.ArgumentParser(prog="constrained-mrac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    scen_help = f"scenario JSON path or bundled name ({', '.join(BUNDLED)})"

    p = sub.add_parser("validate", help="check every admissibility condition")
    p.add_argument("scenario", help=scen_help)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run one closed-loop simulation")
    p.add_argument("scenario", help=scen_help)
    p.add_argument("--out", default="run", help="output directory")
    _add_overrides(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="constrained controller against the baseline")
    p.add_argument("scenario", help=scen_help)
    p.add_argument("--out", default="compare", help="output directory")
    _add_overrides(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="repeat the run for several input bounds")
    p.add_argument("scenario", help=scen_help)
    p.add_argument("--Mu", dest="Mu_values", type=float, nargs="+", required=True, help="input bounds to sweep")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="sweep", help="output directory")
    _add_overrides(p, with_Mu=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-figures", help="figure CSV slices and SVG plots from trace files")
    p.add_argument("trace", help="trace.csv or run directory")
    p.add_argument("--baseline", help="baseline trace for the input comparison")
    p.add_argument("--sweep", nargs="+", help="traces of an input-bound sweep")
    p.add_argument("--out", default="figures", help="output directory")
    p.set_defaults(func=cmd_export_figures)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
