"""Batch driver: identity sweeps, tensor-file maximization, catalog scans, reports.

Subcommands:
  identities   property sweeps over random traceless tensors and canonical forms
  theta FILE   maximize the cubic form stored in a tensor text file
  scan NAME    pointwise pinching reports over a catalog immersion grid
  catalog      list catalog entries with their expected invariants
  report IN... aggregate previously written JSON reports

Every run writes {version, config, records[], summary{pass, failures[]}};
exit status is 0 on pass, 1 on tolerance failures, 2 on usage errors.
Figures (PNG) are rendered next to the output when requested.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import catalog as catalog_mod
from . import pinching, report, tensor_core
from .cubic_spectrum import theta as theta_op
from .errors import ConvergenceError, LegpinchError
from .immersion import field_scan

_DEFAULT_TOLS = {
    "bianchi": 1e-12,
    "pair": 1e-12,
    "ricci": 1e-10,
    "contraction": 1e-9,
    "weyl3": 1e-9,
    "weyl_identity": 1e-10,
    "kappa": 1e-9,
    "kappa_equality": 1e-9,
    "newton": 1e-12,
    "newton_equality": 1e-12,
    "beta": 1e-9,
    "lagrange": 1e-8,
    "trace": 1e-5,
}


@dataclasses.dataclass
class RunConfig:
    command: str
    n: int | None = None
    seed: int = 0
    samples: int | None = None
    grid: list[int] | None = None
    h: float | None = None
    starts: int | None = None
    richardson: bool = False
    margin: float | None = None
    fmt: str = "json"
    out: str | None = None
    figures: bool = False
    inputs: list[str] | None = None
    tolerances: dict | None = None

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["format"] = d.pop("fmt")
        return d


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for all random draws")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="output file path (stdout if omitted)")
    p.add_argument("--figures", action="store_true", help="render PNG figures next to --out")
    for name, default in _DEFAULT_TOLS.items():
        p.add_argument(
            f"--tol-{name.replace('_', '-')}", dest=f"tol_{name}",
            type=float, default=default, help=argparse.SUPPRESS,
        )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="legpinch",
        description="Numerical verification of contact-geometry pinching inequalities",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", help="run the algebraic property sweeps")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--samples", type=int, default=10000)
    _add_common(p)

    p = sub.add_parser("theta", help="maximize the cubic form from a tensor file")
    p.add_argument("tensor_file")
    p.add_argument("--starts", type=int, default=32)
    _add_common(p)

    p = sub.add_parser("scan", help="pinching scan over a catalog immersion")
    p.add_argument("name")
    p.add_argument("--grid", default="8", help="per-axis resolution: N or N,N,...")
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--richardson", action="store_true")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--margin", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("catalog", help="list catalog entries (JSON)")
    _add_common(p)

    p = sub.add_parser("report", help="aggregate prior JSON outputs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    _add_common(p)

    return ap


def _tolerances(args) -> dict:
    return {k: getattr(args, f"tol_{k}") for k in _DEFAULT_TOLS}


def _check(name, n, count, worst, tol, ok) -> dict:
    return {"check": name, "n": n, "samples": count, "worst": float(worst),
            "tolerance": float(tol), "pass": bool(ok)}


def run_identities(n: int, samples: int, seed: int, tol: dict) -> list[dict]:
    """Property sweeps of the tensor algebra and the pinching inequalities."""
    rng = np.random.default_rng(seed)
    records = []

    bianchi = pair = ricci = contraction = 0.0
    weyl3 = 0.0
    for chunk in tensor_core.sweep_chunks(samples):
        d = tensor_core.random_traceless_batch(n, chunk, rng)
        r = tensor_core.curvature_batch(d)
        bianchi = max(bianchi, float(np.max(tensor_core.bianchi_residual_batch(r))))
        pair = max(pair, float(np.max(tensor_core.pair_symmetry_residual_batch(r))))
        gmat = np.einsum("Bikl,Bjkl->Bij", d, d)
        ric = np.einsum("Biaja->Bij", r)
        ricci = max(ricci, float(np.max(np.abs(ric + gmat))))
        ns, gr, cm = tensor_core.invariants_batch(d)
        lhs = np.einsum("Bijk,Bijk->B", d, tensor_core.simons_rhs_batch(d))
        contraction = max(contraction, float(np.max(np.abs(lhs - ((n + 1) * ns - gr - cm)))))
        if n == 3:
            weyl3 = max(weyl3, float(np.max(
                np.abs(cm - (4.0 * gr - ns * ns)) / np.maximum(1.0, np.abs(cm))
            )))
    records.append(_check("bianchi", n, samples, bianchi, tol["bianchi"], bianchi <= tol["bianchi"]))
    records.append(_check("pair_symmetry", n, samples, pair, tol["pair"], pair <= tol["pair"]))
    records.append(_check("ricci_identity", n, samples, ricci, tol["ricci"], ricci <= tol["ricci"]))
    records.append(_check("simons_contraction", n, samples, contraction,
                          tol["contraction"], contraction <= tol["contraction"]))
    if n == 3:
        records.append(_check("weyl_vanishing_n3", n, samples, weyl3, tol["weyl3"], weyl3 <= tol["weyl3"]))

    if n >= 3:
        sub = min(256, samples)
        worst = 0.0
        for _ in range(sub):
            s = tensor_core.random_traceless(n, rng)
            s = tensor_core.SymCubic(n, s.distinct / max(1.0, math.sqrt(s.norm_sq())))
            w = tensor_core.weyl_decomposition(tensor_core.algebraic_curvature(s))
            worst = max(worst, w.identity_residual)
            if n == 3:
                worst = max(worst, w.weyl_norm_sq)
        records.append(_check("weyl_norm_identity", n, sub, worst,
                              tol["weyl_identity"], worst <= tol["weyl_identity"]))

    # canonical-form inequality sweeps (three-dimensional reduction)
    xs, ys, zs = rng.uniform(0.0, 10.0, (3, samples))
    kappas = (1.4, 1.5, 2.0, 5.0)
    kmin = min(float(np.min(pinching.kappa_gap_xyz(xs, ys, zs, k))) for k in kappas)
    keq = max(float(np.max(np.abs(pinching.kappa_gap_xyz(xs, 0.0 * ys, 0.0 * zs, k)))) for k in kappas)
    records.append(_check("kappa_gap", 3, samples * len(kappas), kmin,
                          tol["kappa"], kmin >= -tol["kappa"]))
    records.append(_check("kappa_equality_yz0", 3, samples * len(kappas), keq,
                          tol["kappa_equality"], keq <= tol["kappa_equality"]))

    nmin, neq = np.inf, 0.0
    for _ in range(samples):
        m = int(rng.integers(2, 8))
        a = rng.uniform(0.0, 1.0, m)
        if a.sum() <= 0.0:
            continue
        nmin = min(nmin, pinching.newton_gap(a))
        neq = max(neq, abs(pinching.newton_gap(np.full(m, float(rng.uniform(0.1, 2.0))))))
    records.append(_check("newton_gap", None, samples, nmin, tol["newton"], nmin >= -tol["newton"]))
    records.append(_check("newton_equality", None, samples, neq,
                          tol["newton_equality"], neq <= tol["newton_equality"]))

    if n >= 3:
        mu = pinching.sample_admissible_mu(n, samples, rng)
        beta, stat, target = pinching.beta_stationarity_batch(mu, n)
        bmin = float(np.min(beta - target))
        records.append(_check("beta_chain", n, len(mu), bmin, tol["beta"], bmin >= -tol["beta"]))

    return records


def _summary(records: list[dict]) -> dict:
    failures = []
    for rec in records:
        if rec.get("pass") is False:
            failures.append({"check": rec.get("check", "record"),
                             "detail": report.dumps({k: v for k, v in rec.items() if k != "pass"})})
        if rec.get("ok") is False:
            failures.append({"check": "point", "detail": str(rec.get("error"))})
    return {"pass": not failures, "failures": failures[:50], "count": len(records)}


def _write_output(cfg: RunConfig, records: list[dict], summary: dict,
                  csv_rows_header=None) -> None:
    payload = {
        "version": __version__,
        "config": cfg.as_dict(),
        "records": records,
        "summary": summary,
    }
    if cfg.fmt == "json":
        text = report.dumps(payload) + "\n"
        if cfg.out:
            Path(cfg.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        rows, header = csv_rows_header if csv_rows_header else (records, _infer_header(records))
        if cfg.out:
            report.write_csv(cfg.out, rows, header)
        else:
            report.write_csv("/dev/stdout", rows, header)


def _infer_header(records: list[dict]) -> list[str]:
    header: list[str] = []
    for rec in records:
        for k in rec:
            if k not in header:
                header.append(k)
    return header


def _figures(cfg: RunConfig, records: list[dict]) -> list[Path]:
    base = Path(cfg.out)
    base = base.with_suffix("") if base.suffix else base
    paths = []
    if any("theta" in r and r.get("theta") is not None for r in records):
        paths += report.render_scan_figures([r for r in records if "u" in r] or records, base)
    paths += report.render_check_figure(records, base)
    return paths


def _usage_error(msg: str) -> int:
    print(f"legpinch: error: {msg}", file=sys.stderr)
    return 2


def cmd_identities(args) -> int:
    cfg = RunConfig(command="identities", n=args.n, seed=args.seed, samples=args.samples,
                    fmt=args.fmt, out=args.out, figures=args.figures,
                    tolerances=_tolerances(args))
    if args.n < 2:
        return _usage_error("--n must be >= 2")
    if cfg.figures and not cfg.out:
        return _usage_error("--figures requires --out")
    records = run_identities(args.n, args.samples, args.seed, cfg.tolerances)
    summary = _summary(records)
    header = ["check", "n", "samples", "worst", "tolerance", "pass"]
    _write_output(cfg, records, summary, (records, header))
    if cfg.figures:
        _figures(cfg, records)
    return 0 if summary["pass"] else 1


def cmd_theta(args) -> int:
    path = Path(args.tensor_file)
    if not path.is_file():
        return _usage_error(f"tensor file not found: {path}")
    cfg = RunConfig(command="theta", seed=args.seed, starts=args.starts,
                    fmt=args.fmt, out=args.out, figures=args.figures,
                    inputs=[str(path)], tolerances=_tolerances(args))
    if cfg.figures and not cfg.out:
        return _usage_error("--figures requires --out")
    try:
        s = tensor_core.load_tensor(path)
    except (ValueError, IndexError) as exc:
        return _usage_error(f"bad tensor file: {exc}")
    tol = cfg.tolerances["lagrange"]
    try:
        sp = theta_op(s, starts=args.starts, seed=args.seed, tol=tol)
        record = {
            "file": str(path), "n": s.n,
            "theta": sp.theta,
            "mu": [float(v) for v in sp.mu],
            "e1": [float(v) for v in sp.e1],
            "lagrange_residual": sp.lagrange_residual,
            "norm_sq": s.norm_sq(),
            "pass": sp.lagrange_residual <= tol,
        }
    except ConvergenceError as exc:
        record = {"file": str(path), "n": s.n, "theta": None, "mu": None, "e1": None,
                  "lagrange_residual": None, "norm_sq": s.norm_sq(),
                  "pass": False, "error": str(exc)}
    records = [record]
    summary = _summary(records)
    header = ["file", "n", "theta", "lagrange_residual", "norm_sq", "pass"]
    _write_output(cfg, records, summary, (records, header))
    if cfg.figures:
        _figures(cfg, records)
    return 0 if summary["pass"] else 1


def _parse_grid(text: str, n: int) -> list[int]:
    parts = [int(p) for p in text.split(",")]
    if len(parts) == 1:
        return parts * n
    if len(parts) != n:
        raise ValueError(f"grid needs 1 or {n} resolutions, got {len(parts)}")
    return parts


def cmd_scan(args) -> int:
    try:
        entry = catalog_mod.get(args.name)
    except KeyError as exc:
        return _usage_error(str(exc))
    imm = entry.immersion
    if args.margin is not None:
        imm = dataclasses.replace(imm, margin=args.margin)
    try:
        grid = _parse_grid(args.grid, imm.n)
    except ValueError as exc:
        return _usage_error(str(exc))
    cfg = RunConfig(command="scan", n=imm.n, seed=args.seed, grid=grid, h=args.h,
                    starts=args.starts, richardson=args.richardson, margin=args.margin,
                    fmt=args.fmt, out=args.out, figures=args.figures,
                    inputs=[args.name], tolerances=_tolerances(args))
    if cfg.figures and not cfg.out:
        return _usage_error("--figures requires --out")
    recs = field_scan(
        imm, grid, h=args.h, richardson=args.richardson,
        trace_tol=cfg.tolerances["trace"],
        theta_opts={"starts": args.starts, "seed": args.seed},
    )
    records = [report.scan_record_dict(r) for r in recs]
    summary = _summary(records)
    rows, header = report.scan_csv_rows(records, imm.n)
    _write_output(cfg, records, summary, (rows, header))
    if cfg.figures:
        _figures(cfg, records)
    return 0 if summary["pass"] else 1


def cmd_catalog(args) -> int:
    cfg = RunConfig(command="catalog", fmt=args.fmt, out=args.out,
                    figures=args.figures, tolerances=_tolerances(args))
    if args.fmt != "json":
        return _usage_error("catalog listing is JSON only")
    records = []
    for name in catalog_mod.names():
        e = catalog_mod.get(name)
        exp = e.expected
        records.append({
            "name": name,
            "n": e.immersion.n,
            "ambient_real_dim": 2 * e.immersion.ambient_n + 2,
            "norm_sq": exp.norm_sq,
            "theta": exp.theta,
            "mu": None if exp.mu is None else [float(v) for v in exp.mu],
            "minimal": exp.minimal,
            "legendrian": exp.legendrian,
            "domain_lo": [float(v) for v in e.immersion.domain_lo],
            "domain_hi": [float(v) for v in e.immersion.domain_hi],
            "periodic": [bool(v) for v in e.immersion.periodic],
        })
    summary = {"pass": True, "failures": [], "count": len(records)}
    _write_output(cfg, records, summary)
    return 0


def cmd_report(args) -> int:
    cfg = RunConfig(command="report", fmt=args.fmt, out=args.out,
                    figures=not args.no_figures, inputs=list(args.inputs),
                    tolerances=_tolerances(args))
    records: list[dict] = []
    all_pass = True
    failures: list[dict] = []
    for name in args.inputs:
        path = Path(name)
        if not path.is_file():
            return _usage_error(f"input not found: {path}")
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            return _usage_error(f"not a JSON report: {path} ({exc})")
        records.extend(payload.get("records", []))
        s = payload.get("summary", {})
        all_pass = all_pass and bool(s.get("pass", True))
        failures.extend(s.get("failures", []))

    stats = {}
    for key in ("theta", "norm_sq", "gap_main", "gap_n3_quadratic", "gap_thm2",
                "gap_appendix", "simons_gap", "beta"):
        vals = [r[key] for r in records if isinstance(r.get(key), (int, float))]
        if vals:
            arr = np.asarray(vals, dtype=float)
            stats[key] = {"min": float(arr.min()), "max": float(arr.max()),
                          "mean": float(arr.mean()), "count": len(vals)}
    summary = {"pass": all_pass, "failures": failures[:50],
               "count": len(records), "stats": stats}
    _write_output(cfg, records, summary)
    if cfg.figures and cfg.out:
        _figures(cfg, records)
    return 0 if all_pass else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "identities": cmd_identities,
        "theta": cmd_theta,
        "scan": cmd_scan,
        "catalog": cmd_catalog,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except LegpinchError as exc:
        print(f"legpinch: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
