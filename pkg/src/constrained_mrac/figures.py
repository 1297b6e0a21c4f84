"""Plot-data export: per-figure CSV slices and dependency-free SVG line plots.

Figures (all versus time):
    fig1  stability margin
    fig2  ||E^s|| with the M_e line
    fig3  applied input u_s, optional baseline input, +-M_u lines
    fig4  ||X|| with the M_x line
    fig5-7  x_i, x_ms_i and x_m_i for components 1..3
    fig8  x_m1 together with x_ms1 of every sweep run

The output is a pure function of the input files, so repeated exports are
byte-identical.
"""

import math
import os
from xml.sax.saxutils import escape

import numpy as np

from .errors import MissingColumn
from .traces import FLOAT_FMT, SUMMARY_FILE, TRACE_FILE, read_summary_json, read_trace_csv

WIDTH, HEIGHT = 720, 420
PAD_L, PAD_R, PAD_T, PAD_B = 70, 160, 40, 50
MAX_POINTS = 2000
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


class TraceFile:
    """A loaded trace plus the constants found in its sibling summary.json."""

    def __init__(self, path):
        if os.path.isdir(path):
            path = os.path.join(path, TRACE_FILE)
        self.path = path
        self.columns = read_trace_csv(path)
        summary_path = os.path.join(os.path.dirname(os.path.abspath(path)), SUMMARY_FILE)
        self.summary = read_summary_json(summary_path) if os.path.exists(summary_path) else {}

    def __len__(self):
        t = self.columns.get("t")
        return 0 if t is None else t.shape[0]

    def column(self, name):
        if name not in self.columns:
            raise MissingColumn(f"{self.path}: missing column '{name}'")
        if len(self) == 0:
            raise MissingColumn(f"{self.path}: trace has no samples for '{name}'")
        return self.columns[name]

    def constant(self, name):
        value = self.summary.get(name)
        return None if value is None else float(value)


# --- SVG ------------------------------------------------------------------


def _nice_ticks(lo, hi, count=5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    ticks = []
    k = first
    while k * step <= hi + 1e-9 * step:
        ticks.append(k * step)
        k += 1
    return ticks


def _decimate(x, y):
    """Keep the min and max of each bucket so the envelope survives."""
    n = x.shape[0]
    if n <= MAX_POINTS:
        return x, y
    buckets = MAX_POINTS // 2
    edges = np.linspace(0, n, buckets + 1).astype(int)
    keep = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        seg = y[a:b]
        i, j = a + int(np.argmin(seg)), a + int(np.argmax(seg))
        keep.extend(sorted({i, j}))
    keep[-1:] = sorted({keep[-1], n - 1})
    idx = np.asarray(keep)
    return x[idx], y[idx]


def _fmt(v):
    return f"{v:.2f}"


def _label(v):
    return f"{v:.4g}"


def render_svg(title, x, series, hlines=(), xlabel="t [s]", ylabel=""):
    """Line plot as an SVG string.

    ``series`` is a list of (label, y) pairs over the common ``x``; ``hlines``
    holds (label, value) reference lines drawn dashed.
    """
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in series]
    values = [y[np.isfinite(y)] for y in ys] + [np.array([v for _, v in hlines], dtype=float)]
    finite = np.concatenate(values) if values else np.array([0.0])
    y_lo, y_hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = (float(x[0]), float(x[-1])) if x.size else (0.0, 1.0)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    pw, ph = WIDTH - PAD_L - PAD_R, HEIGHT - PAD_T - PAD_B

    def sx(v):
        return PAD_L + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return PAD_T + (y_hi - v) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{PAD_L + pw / 2:.1f}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">{_escape(title)}</text>',
        f'<rect x="{PAD_L}" y="{PAD_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _nice_ticks(x_lo, x_hi):
        px = _fmt(sx(v))
        out.append(f'<line x1="{px}" y1="{PAD_T + ph}" x2="{px}" y2="{PAD_T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px}" y="{PAD_T + ph + 18}" font-family="sans-serif" font-size="11" text-anchor="middle">{_label(v)}</text>')
    for v in _nice_ticks(y_lo, y_hi):
        py = _fmt(sy(v))
        out.append(f'<line x1="{PAD_L - 5}" y1="{py}" x2="{PAD_L}" y2="{py}" stroke="black"/>')
        out.append(f'<line x1="{PAD_L}" y1="{py}" x2="{PAD_L + pw}" y2="{py}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{PAD_L - 8}" y="{py}" font-family="sans-serif" font-size="11" text-anchor="end" dominant-baseline="middle">{_label(v)}</text>')
    out.append(f'<text x="{PAD_L + pw / 2:.1f}" y="{HEIGHT - 10}" font-family="sans-serif" font-size="12" text-anchor="middle">{_escape(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="16" y="{PAD_T + ph / 2:.1f}" font-family="sans-serif" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 16 {PAD_T + ph / 2:.1f})">{_escape(ylabel)}</text>'
        )

    legend = []
    for k, ((label, _), y) in enumerate(zip(series, ys)):
        color = COLORS[k % len(COLORS)]
        ok = np.isfinite(y)
        xd, yd = _decimate(x[ok], y[ok])
        if xd.size:
            pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(xd, yd))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        legend.append((label, color, ""))
    for k, (label, value) in enumerate(hlines):
        py = _fmt(sy(value))
        out.append(f'<line x1="{PAD_L}" y1="{py}" x2="{PAD_L + pw}" y2="{py}" stroke="black" stroke-dasharray="6,4"/>')
        legend.append((f"{label} = {_label(value)}", "black", ' stroke-dasharray="6,4"'))
    for k, (label, color, dash) in enumerate(legend):
        ly = PAD_T + 12 + 18 * k
        lx = PAD_L + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" font-size="11" dominant-baseline="middle">{_escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s):
    return escape(str(s))


# --- figure assembly ------------------------------------------------------


def _write_csv(path, names, columns):
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, data, fmt=FLOAT_FMT, delimiter=",")


def _on_grid(t, other, name):
    """Other trace's column sampled on ``t`` (identity when the grids coincide)."""
    t_o = other.column("t")
    y = other.column(name)
    if t_o.shape == t.shape and np.array_equal(t_o, t):
        return y
    return np.interp(t, t_o, y, left=np.nan, right=np.nan)


def _figure(out_dir, stem, title, t, series, hlines=(), ylabel=""):
    names = ["t"] + [label for label, _ in series] + [label for label, _ in hlines]
    cols = [t] + [y for _, y in series] + [np.full_like(t, v) for _, v in hlines]
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    svg_path = os.path.join(out_dir, f"{stem}.svg")
    _write_csv(csv_path, names, cols)
    with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(title, t, series, hlines, ylabel=ylabel))
    return [csv_path, svg_path]


def _sweep_label(tf, k):
    M_u = tf.constant("M_u")
    return f"xms1_Mu{M_u:g}" if M_u is not None else f"xms1_run{k + 1}"


def export_figures(trace, out_dir, baseline=None, sweep=()):
    """Write fig1..fig8 (.csv + .svg) into ``out_dir``; returns the written paths.

    ``trace``, ``baseline`` and each ``sweep`` entry are paths to a trace CSV
    or to a run directory holding trace.csv (and summary.json for the
    constraint constants). Components beyond the third get no figure.
    """
    main = TraceFile(trace)
    base = TraceFile(baseline) if baseline is not None else None
    runs = [TraceFile(p) for p in sweep]
    t = main.column("t")
    os.makedirs(out_dir, exist_ok=True)

    def hl(label, name, sign=1.0):
        v = main.constant(name)
        return [] if v is None else [(label, sign * v)]

    written = []
    written += _figure(out_dir, "fig1", "Stability margin", t, [("margin", main.column("margin"))], ylabel="margin")
    written += _figure(out_dir, "fig2", "Tracking error ||E^s||", t, [("es_norm", main.column("es_norm"))], hl("M_e", "M_e"))
    inputs = [("u_s", main.column("u_s"))]
    if base is not None:
        inputs.append(("u_baseline", _on_grid(t, base, "u_s")))
    written += _figure(out_dir, "fig3", "Control input", t, inputs, hl("M_u", "M_u") + hl("minus_M_u", "M_u", -1.0))
    written += _figure(out_dir, "fig4", "State norm ||X||", t, [("x_norm", main.column("x_norm"))], hl("M_x", "M_x"))
    for i in (1, 2, 3):
        if f"x{i}" not in main.columns:
            continue
        series = [(f"x{i}", main.column(f"x{i}")), (f"xms{i}", main.column(f"xms{i}")), (f"xm{i}", main.column(f"xm{i}"))]
        written += _figure(out_dir, f"fig{4 + i}", f"Component {i}: plant, modified target, target", t, series)
    overlay = [("xm1", main.column("xm1"))]
    for k, tf in enumerate(runs or [main]):
        overlay.append((_sweep_label(tf, k), _on_grid(t, tf, "xms1")))
    written += _figure(out_dir, "fig8", "Modified target x_ms1 across input bounds", t, overlay)
    return written
