"""CSV/JSON export of simulation traces, events and run summaries.

Trace columns, in order (n is the state dimension, indices start at 1):

    t, x1..xn, xm1..xmn, xms1..xmsn, u, u_s, g, f, mode, margin,
    barrier_fraction, x_norm, es_norm, etilde_norm, khat1..khatn, lhat,
    [k1hat1..k1hatn], [V]

``u`` is the nominal input, ``u_s`` the applied (saturated) one, ``mode``
is +1/-1 while saturated high/low and 0 otherwise. The bracketed groups
appear only for nonlinear runs and runs with known true gains.
Numbers are written with 17 significant digits so they round-trip.
"""

import csv
import json
import math
import os

import numpy as np

from .errors import MissingColumn

FLOAT_FMT = "%.17g"
TRACE_FILE = "trace.csv"
EVENTS_FILE = "events.csv"
SUMMARY_FILE = "summary.json"


def trace_columns(trace):
    """Ordered (name, 1-D array) pairs for a SimulationTrace."""
    n = trace.X.shape[1]
    cols = [("t", trace.t)]
    for prefix, arr in (("x", trace.X), ("xm", trace.X_m), ("xms", trace.X_ms)):
        cols.extend((f"{prefix}{i + 1}", arr[:, i]) for i in range(n))
    cols += [
        ("u", trace.u_nominal),
        ("u_s", trace.u_applied),
        ("g", trace.g),
        ("f", trace.f),
        ("mode", trace.mode),
        ("margin", trace.margin),
        ("barrier_fraction", trace.barrier_fraction),
        ("x_norm", trace.x_norm),
        ("es_norm", trace.es_norm),
        ("etilde_norm", trace.etilde_norm),
    ]
    cols.extend((f"khat{i + 1}", trace.K_hat[:, i]) for i in range(n))
    cols.append(("lhat", trace.l_hat))
    if trace.K1_hat is not None:
        cols.extend((f"k1hat{i + 1}", trace.K1_hat[:, i]) for i in range(n))
    if trace.V is not None:
        cols.append(("V", trace.V))
    return cols


def write_trace_csv(trace, path):
    cols = trace_columns(trace)
    header = ",".join(name for name, _ in cols)
    data = np.column_stack([np.asarray(arr, dtype=float) for _, arr in cols]) if len(trace) else np.empty((0, len(cols)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        if data.shape[0]:
            np.savetxt(fh, data, fmt=FLOAT_FMT, delimiter=",")


def read_trace_csv(path):
    """Load a trace CSV into a dict of column name -> float array."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise MissingColumn(f"{path}: no header row")
        names = header.split(",")
        body = fh.read()
    if body.strip():
        data = np.loadtxt(body.splitlines(), delimiter=",", ndmin=2)
    else:
        data = np.empty((0, len(names)))
    if data.shape[1] != len(names):
        raise MissingColumn(f"{path}: {data.shape[1]} values per row but {len(names)} header names")
    return {name: data[:, j] for j, name in enumerate(names)}


def write_events_csv(events, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "kind", "detail"])
        for ev in events:
            w.writerow([FLOAT_FMT % ev.t, ev.kind, ev.detail])


def read_events_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return [(float(row["t"]), row["kind"], row["detail"]) for row in csv.DictReader(fh)]


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def write_summary_json(summary, path, extra=None):
    doc = summary.to_dict() if hasattr(summary, "to_dict") else dict(summary)
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_run(trace, summary, out_dir, extra=None):
    """Write trace.csv, events.csv and summary.json into ``out_dir``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "trace": os.path.join(out_dir, TRACE_FILE),
        "events": os.path.join(out_dir, EVENTS_FILE),
        "summary": os.path.join(out_dir, SUMMARY_FILE),
    }
    write_trace_csv(trace, paths["trace"])
    write_events_csv(trace.events, paths["events"])
    write_summary_json(summary, paths["summary"], extra)
    return paths
