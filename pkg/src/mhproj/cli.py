"""Command line front end.

Every subcommand writes a JSON result document (``result.json``) and any
tables as CSV under ``--out``. Exit status is 0 on success, 2 for usage or
input errors and 3 for numerical failures; errors are also reported on
stderr as a one-line JSON object carrying the error category.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MhprojError, NumericError
from .estimate import EstimatorSpec
from .files import ResultDocument, Stopwatch, load_csv, write_csv
from .simulate import RngStream, SeriesPanel

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    category = "usage"


def parse_int_list(text: str) -> list[int]:
    """``"1,3,6"``, ``"1-24"`` or a mix such as ``"1-3,12"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def parse_matrices(text: str) -> np.ndarray:
    """Coefficient matrices as ``"a,b;c,d|e,f;g,h"`` (``|`` separates lags) or JSON."""
    text = text.strip()
    try:
        if text.startswith("["):
            arr = np.array(json.loads(text), dtype=float)
        else:
            arr = np.array([[[float(v) for v in row.split(",")] for row in mat.split(";")]
                            for mat in text.split("|")])
    except (ValueError, json.JSONDecodeError) as exc:
        raise argparse.ArgumentTypeError(f"cannot parse matrices: {exc}") from None
    return arr[None] if arr.ndim == 2 else arr


def _bandwidth(text):
    if text in ("h", "h+1"):
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("bandwidth must be an integer, 'h' or 'h+1'") from None


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    if out.suffix.lower() in (".csv", ".json"):
        out.parent.mkdir(parents=True, exist_ok=True)
        return out.parent
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_panel(path) -> SeriesPanel:
    if path is None:
        raise UsageError("--data is required")
    if not Path(path).exists():
        raise UsageError(f"input file {path} does not exist")
    return load_csv(path)


def _resolve_bw(bw, h):
    if bw in (None, "h"):
        return h
    return h + 1 if bw == "h+1" else int(bw)


def _spec_from_args(args, h, method=None):
    return EstimatorSpec(method or args.method, args.p, h, args.delta, args.target,
                         not args.no_intercept, _resolve_bw(args.bandwidth, h), args.bias_correct)


# ------------------------------------------------------------------ commands


def cmd_simulate(args):
    from .experiments import load_config
    from .model import dgp_from_roots, named_dgp
    from .simulate import simulate_var

    if args.config:
        cfg = load_config(args.config)
        spec = cfg.dgp
    else:
        spec = named_dgp(args.dgp)
    params = dgp_from_roots(spec)
    rng = RngStream(args.seed, args.stream)
    panel = simulate_var(params, args.T, rng, spec.innovation, spec.df, args.burn_in)
    out = _out_dir(args)
    name = Path(args.out).name if args.out and args.out.endswith(".csv") else "simulated.csv"
    write_csv(panel, out / name)
    return {"file": str(out / name), "T": args.T, "phi": params.phi, "sigma_u": params.sigma_u}, {}


def cmd_fit(args):
    from .infer import z_interval

    panel = _load_panel(args.data)
    rows = []
    outputs = {}
    for h in args.horizons:
        spec = _spec_from_args(args, h)
        fit = spec.fit(panel)
        cis = [z_interval(fit, i, args.level) for i in range(fit.beta_hat.shape[0])]
        outputs[f"h={h}"] = {"method": spec.label, "beta_hat": fit.beta_hat, "cov_hat": fit.cov_hat,
                             "se": fit.se, "t_bar": fit.t_bar, "gamma_hat": fit.gamma_hat,
                             "diagnostics": list(fit.diagnostics)}
        for i, ci in enumerate(cis):
            lag, col = divmod(i, fit.k)
            rows.append([h, spec.label, f"lag{lag + 1}", panel.names[col], fit.beta_hat[i], fit.se[i],
                         ci.lower, ci.upper])
    header = ["h", "method", "lag", "regressor", "estimate", "se", "lower", "upper"]
    return outputs, {"fit.csv": (header, rows)}


def cmd_gir(args):
    from .model import VarParams, dgp_from_roots, gir_recursion, named_dgp

    if args.phi is not None:
        phi = args.phi
        params = VarParams(phi, np.eye(phi.shape[1]))
    else:
        params = dgp_from_roots(named_dgp(args.dgp))
    horizons = args.horizons
    girs = gir_recursion(params, max(horizons))
    rows = []
    for h in horizons:
        g = girs[h - 1]
        for j in range(params.p):
            for a in range(params.k):
                for b in range(params.k):
                    rows.append([h, j + 1, a + 1, b + 1, g.coeffs[j, a, b]])
    outputs = {f"h={h}": girs[h - 1].coeffs for h in horizons}
    return outputs, {"gir.csv": (["h", "lag", "row", "col", "value"], rows)}


def cmd_causality(args):
    from .infer import wald_causality

    panel = _load_panel(args.data)
    rows, outputs = [], {}
    orders = args.orders or [args.p]
    causes = [args.cause] if args.cause is not None else [c for c in range(panel.k) if c != args.target]
    for p in orders:
        for h in args.horizons:
            spec = EstimatorSpec(args.method, p, h, args.delta, args.target, not args.no_intercept,
                                 _resolve_bw(args.bandwidth, h), args.bias_correct)
            fit = spec.fit(panel)
            for c in causes:
                lags = args.test_lags or range(1, p + 1)
                wr = wald_causality(fit, c, [l for l in lags if l <= p])
                rows.append([panel.names[c], panel.names[args.target], p, h, wr.statistic, wr.df,
                             wr.p_value])
                outputs[f"{panel.names[c]}->{panel.names[args.target]}|p={p}|h={h}"] = wr
    header = ["cause", "effect", "order", "h", "wald", "df", "p_value"]
    return outputs, {"causality.csv": (header, rows)}


def cmd_mc(args):
    from .experiments import compare_methods_report, load_config, run_mc

    if not args.config:
        raise UsageError("mc requires --config")
    if not Path(args.config).exists():
        raise UsageError(f"config file {args.config} does not exist")
    overrides = {"master_seed": args.seed, "workers": args.threads, "level": args.level}
    if args.no_intercept:
        overrides["intercept"] = False
    if args.bandwidth is not None:
        overrides["bandwidth"] = args.bandwidth
    cfg = load_config(args.config, **overrides)
    summary = run_mc(cfg)
    csv_text, text = compare_methods_report(summary)
    out = _out_dir(args)
    (out / "mc_table.csv").write_text(csv_text, encoding="utf-8")
    (out / "mc_table.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return {"cells": summary.to_rows()}, {}


def cmd_efficiency(args):
    from .experiments import efficiency_grid, efficiency_mc_check, efficiency_table

    cells = efficiency_grid(tuple(args.rho2), (0.01, 0.99, 0.01), args.horizons)
    out = _out_dir(args)
    name = Path(args.out).name if args.out and args.out.endswith(".csv") else "efficiency_grid.csv"
    (out / name).write_text(efficiency_table(cells), encoding="utf-8")
    outputs = {"file": str(out / name), "n_cells": len(cells)}
    if args.check:
        checks = {}
        for rho1, rho2, h in ((0.5, 0.2, 1), (0.5, 0.2, 12), (0.5, 0.5, 12)):
            res = efficiency_mc_check(rho1, rho2, h, reps=args.check, seed=args.seed)
            checks[f"rho1={rho1},rho2={rho2},h={h}"] = res
        outputs["mc_check"] = checks
    return outputs, {}


def cmd_bootstrap(args):
    from .infer import bootstrap_pivots, percentile_t_interval, supt_band

    panel = _load_panel(args.data)
    h = args.horizons[0]
    spec = _spec_from_args(args, h, method="2s")
    n = spec.p * panel.k
    coefs = args.coef if args.coef else list(range(n))
    W = np.eye(n)[coefs]
    draws = bootstrap_pivots(panel, spec, W, args.B, RngStream(args.seed, 1), bias_correct=True,
                             center=args.center, threads=args.threads)
    rows = []
    pointwise = []
    for j, c in enumerate(coefs):
        lo, hi = percentile_t_interval(draws.estimate[j], draws.se[j], draws.pivots[:, j], args.level)
        pointwise.append((lo, hi))
        rows.append([c, "bootstrap_t", draws.estimate[j], draws.se[j], lo, hi])
    outputs = {"estimate": draws.estimate, "se": draws.se, "pointwise": pointwise,
               "n_failed": draws.n_failed, "B": args.B}
    if args.supt and len(coefs) >= 1:
        band = supt_band(draws.pivots, draws.estimate, draws.se, args.level)
        outputs["supt"] = band
        for c, b in zip(coefs, band):
            rows.append([c, "supt", b.estimate, None, b.lower, b.upper])
    return outputs, {"bootstrap.csv": (["coef", "method", "estimate", "se", "lower", "upper"], rows)}


def cmd_empirical(args):
    from .empirical import empirical_causality

    panel = _load_panel(args.data)
    orders = args.orders or [12, 15, 18]
    test_lags = args.test_lags if args.test_lags else args.lag_rule
    cmap = empirical_causality(panel, orders, args.horizons, args.delta, not args.no_intercept,
                               test_lags)
    out = _out_dir(args)
    (out / "causality_map.csv").write_text(cmap.to_csv(), encoding="utf-8")
    summary = cmap.summary(args.level)
    (out / "causality_summary.txt").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    return {"orders": cmap.orders, "horizons": cmap.horizons, "test_lags": cmap.test_lags,
            "cells": [dict(cause=c.cause, effect=c.effect, h=c.h,
                           pvalues={str(k): v for k, v in c.pvalues.items()}, min_p=c.min_p,
                           errors=c.errors) for c in cmap.cells]}, {}


COMMANDS = {
    "simulate": cmd_simulate, "fit": cmd_fit, "gir": cmd_gir, "causality": cmd_causality,
    "mc": cmd_mc, "efficiency": cmd_efficiency, "bootstrap": cmd_bootstrap,
    "empirical": cmd_empirical,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--seed", type=int, default=42, help="master seed")
    common.add_argument("--threads", type=int, default=1, help="worker count")
    common.add_argument("--out", help="output directory (or file for single-table commands)")
    common.add_argument("--level", type=float, default=0.95, help="confidence level")
    common.add_argument("--bandwidth", type=_bandwidth, default=None,
                        help="HAC bandwidth for LS projection: integer, 'h' (default) or 'h+1'")
    common.add_argument("--delta", type=int, default=0, choices=(0, 1, 2), help="lag augmentation")
    common.add_argument("--orders", type=parse_int_list, default=None, help="VAR orders, e.g. 12,15,18")
    common.add_argument("--horizons", type=parse_int_list, default=None, help="e.g. 1,3,6 or 1-24")
    common.add_argument("--no-intercept", action="store_true", help="drop intercepts")
    common.add_argument("--bias-correct", action="store_true",
                        help="bias-correct the VAR before recursive estimates")

    parser = argparse.ArgumentParser(prog="mhproj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a VAR design to CSV")
    p.add_argument("--dgp", default="stationary", help="white_noise, stationary, i1 or i2")
    p.add_argument("--T", type=int, default=250)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=0)

    def data_args(q, method=True):
        q.add_argument("--data", help="input CSV")
        q.add_argument("--p", type=int, default=2, help="VAR / projection lag order")
        q.add_argument("--target", type=int, default=0, help="0-based index of the projected series")
        if method:
            q.add_argument("--method", default="2s", help="2s, ls or rc")

    p = sub.add_parser("fit", parents=[common], help="estimate projection coefficients")
    data_args(p)

    p = sub.add_parser("gir", parents=[common], help="GIR coefficients of a VAR")
    p.add_argument("--phi", type=parse_matrices, default=None,
                   help="lag matrices 'a,b;c,d|e,f;g,h' or JSON [[[..]],..]")
    p.add_argument("--dgp", default="stationary")
    p.add_argument("--h", type=int, default=None, help="maximum horizon (alternative to --horizons)")

    p = sub.add_parser("causality", parents=[common], help="Wald tests of multi-horizon non-causality")
    data_args(p)
    p.add_argument("--cause", type=int, default=None)
    p.add_argument("--test-lags", type=parse_int_list, default=None)

    sub.add_parser("mc", parents=[common], help="Monte Carlo tables from a config file")

    p = sub.add_parser("efficiency", parents=[common], help="asymptotic efficiency grid")
    p.add_argument("--rho2", type=float, nargs="+", default=[0.8, 0.5, 0.2, -0.5])
    p.add_argument("--check", type=int, default=0, help="replications for a T=1e5 Monte Carlo check")

    p = sub.add_parser("bootstrap", parents=[common], help="wild-bootstrap percentile-t intervals")
    data_args(p, method=False)
    p.add_argument("--coef", type=parse_int_list, default=None, help="0-based coefficient indices")
    p.add_argument("--B", type=int, default=2000)
    p.add_argument("--supt", action="store_true", help="also report a sup-t band")
    p.add_argument("--center", default="rc", choices=("rc", "estimate"))

    p = sub.add_parser("empirical", parents=[common], help="causality map across VAR orders")
    p.add_argument("--data", help="input CSV")
    p.add_argument("--test-lags", type=parse_int_list, default=None)
    p.add_argument("--lag-rule", default="min", choices=("min", "order"),
                   help="test lags 1..min(orders) (default) or 1..order")
    return parser


_DEFAULT_HORIZONS = {"fit": [1], "gir": [1, 3, 6, 12, 24, 36], "causality": [1], "mc": None,
                     "efficiency": list(range(1, 37)), "bootstrap": [1], "empirical": list(range(1, 25)),
                     "simulate": None}


def _write_tables(out: Path, tables: dict):
    import csv

    for name, (header, rows) in tables.items():
        with open(out / name, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else
                            ("" if v is None else v) for v in r])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.horizons is None:
        if args.command == "gir" and args.h is not None:
            args.horizons = list(range(1, args.h + 1))
        else:
            args.horizons = _DEFAULT_HORIZONS[args.command]
    watch = Stopwatch()
    try:
        outputs, tables = COMMANDS[args.command](args)
        out = _out_dir(args)
        _write_tables(out, tables)
        config = {k: v for k, v in vars(args).items() if k != "command"}
        doc = ResultDocument(args.command, config, outputs, args.seed, watch.record())
        doc.save(out / "result.json")
        if tables and args.command in ("gir", "fit", "causality", "bootstrap"):
            for name in tables:
                sys.stdout.write((out / name).read_text(encoding="utf-8"))
        return 0
    except NumericError as exc:
        _report(exc)
        return EXIT_NUMERIC
    except (MhprojError, UsageError, OSError) as exc:
        _report(exc)
        return EXIT_USAGE


def _report(exc):
    cat = getattr(exc, "category", "io")
    sys.stderr.write(json.dumps({"error": cat, "message": str(exc)}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
