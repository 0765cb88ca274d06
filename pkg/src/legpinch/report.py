"""Deterministic serialization of run reports, plus the rendered figures.

JSON is emitted by a local writer so that floats are always printed with 17
significant digits and two runs with the same config produce byte-identical
files.  CSV flattens one record per row with a fixed header.  The figure
renderers write PNG files next to the delimited output.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"')
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            _emit(str(k), out)
            out.append(":")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps(obj) -> str:
    out: list[str] = []
    _emit(_jsonable(obj), out)
    return "".join(out)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def write_csv(path, records: list[dict], header: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec in records:
            writer.writerow([_cell(rec.get(k)) for k in header])


def scan_record_dict(rec) -> dict:
    """Flatten a ScanRecord into one serializable mapping."""
    rep = rec.report
    out = {"u": [float(v) for v in rec.u], "ok": rec.ok, "error": rec.error}
    if rep is None:
        out.update(
            n=None, norm_sq=None, theta=None, beta=None, gap_main=None,
            gap_n3_quadratic=None, gap_thm2=None, gap_appendix=None,
            simons_gap=None, lagrange_residual=None, mu=None, flags=None,
        )
    else:
        out.update(
            n=rep.n,
            norm_sq=rep.norm_sq,
            theta=rep.theta,
            beta=rep.beta,
            gap_main=rep.gap_main,
            gap_n3_quadratic=rep.gap_n3_quadratic,
            gap_thm2=rep.gap_thm2,
            gap_appendix=rep.gap_appendix,
            simons_gap=rep.simons_gap,
            lagrange_residual=rep.lagrange_residual,
            mu=[float(v) for v in rep.mu],
            flags=dict(rep.flags),
        )
    out["legendrian_residual"] = rec.legendrian_residual
    out["symmetry_residual"] = rec.symmetry_residual
    return out


def scan_csv_rows(records: list[dict], n: int):
    """CSV flattening: one row per point, list fields expanded to columns."""
    header = [f"u{i}" for i in range(n)]
    header += ["ok", "error", "n", "norm_sq", "theta", "beta", "gap_main",
               "gap_n3_quadratic", "gap_thm2", "gap_appendix", "simons_gap",
               "lagrange_residual", "legendrian_residual", "symmetry_residual"]
    header += [f"mu{i+1}" for i in range(n)]
    header += ["flag_main", "flag_n3_quadratic", "flag_thm2", "flag_appendix"]
    rows = []
    for rec in records:
        row = {f"u{i}": rec["u"][i] for i in range(n)}
        for key in ("ok", "error", "n", "norm_sq", "theta", "beta", "gap_main",
                    "gap_n3_quadratic", "gap_thm2", "gap_appendix", "simons_gap",
                    "lagrange_residual", "legendrian_residual", "symmetry_residual"):
            row[key] = rec[key]
        mu = rec.get("mu") or []
        for i in range(n):
            row[f"mu{i+1}"] = mu[i] if i < len(mu) else None
        flags = rec.get("flags") or {}
        for name in ("main", "n3_quadratic", "thm2", "appendix"):
            row[f"flag_{name}"] = flags.get(name)
        rows.append(row)
    return rows, header


def _load_pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_scan_figures(records: list[dict], out_base: Path) -> list[Path]:
    """Histogram and scatter figures for a scan, written as PNGs."""
    plt = _load_pyplot()
    ok = [r for r in records if r["ok"]]
    paths = []
    if not ok:
        return paths
    theta = np.array([r["theta"] for r in ok])
    norm_sq = np.array([r["norm_sq"] for r in ok])
    gap = np.array([r["gap_main"] for r in ok])
    n = ok[0]["n"]

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    axes[0].hist(gap, bins=40, color="steelblue")
    axes[0].set_xlabel("main pinching gap")
    axes[0].set_ylabel("points")
    axes[1].hist(theta, bins=40, color="darkorange")
    axes[1].set_xlabel("theta")
    fig.tight_layout()
    p = out_base.with_name(out_base.name + "_gaps.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.scatter(theta, norm_sq, s=8, alpha=0.6, label="scan points")
    ts = np.linspace(0.0, max(1e-6, float(theta.max()) * 1.2), 200)
    ax.plot(ts, (n + 2) / math.sqrt(n) * ts, "k--", lw=1, label="main boundary")
    if n == 3:
        ax.plot(ts, 2.0 + ts**2, "g:", lw=1, label="quadratic boundary")
    ax.set_xlabel("theta")
    ax.set_ylabel("|B|^2")
    ax.legend(fontsize=7)
    fig.tight_layout()
    p = out_base.with_name(out_base.name + "_pinch.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)
    return paths


def render_check_figure(records: list[dict], out_base: Path) -> list[Path]:
    """Log-scale bar chart of worst residual vs tolerance per check."""
    plt = _load_pyplot()
    rows = [r for r in records if "check" in r]
    if not rows:
        return []
    names = [r["check"] for r in rows]
    worst = np.array([max(abs(r["worst"]), 1e-18) for r in rows])
    tol = np.array([max(abs(r["tolerance"]), 1e-18) for r in rows])
    xs = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(max(4.0, 0.7 * len(rows) + 2), 3.6))
    ax.bar(xs - 0.2, worst, width=0.4, label="worst residual")
    ax.bar(xs + 0.2, tol, width=0.4, label="tolerance")
    ax.set_yscale("log")
    ax.set_xticks(xs)
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=7)
    ax.legend(fontsize=7)
    fig.tight_layout()
    p = out_base.with_name(out_base.name + "_checks.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    return [p]
