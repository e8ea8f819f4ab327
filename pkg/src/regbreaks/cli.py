"""Batch command line front end.

Subcommands: ``decompose``, ``breaks``, ``joint``, ``synth``, ``oracle``.
Each analysis reads a CSV, writes a JSON report (stdout unless ``-r``) and,
with ``--plot-dir``, one TSV of fitted components per series.

Exit status: 0 on success, 1 on data or solver errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .classical import classical_decompose
from .core import RegbreaksError, TimeSeries
from .io import (
    REPORT_SCHEMA_VERSION,
    Dataset,
    average_series,
    dump_report,
    file_sha256,
    impute_temporal_average,
    load_csv,
    model_to_dict,
    write_csv,
    write_plot_tsv,
)
from .joint import JointConfig, iterative_detect
from .regdecomp import regularized_decompose
from .synth import (
    RNG_ALGORITHM,
    GeneratorSpec,
    brute_force_breaks,
    brute_force_joint,
    fig2_spec,
    gen_series,
    small_joint_spec,
    sst_like_spec,
    two_regime_spec,
)
from .trend_breaks import build_ssr_table, default_m_max, select_num_breaks, ssr_path

log = logging.getLogger("regbreaks")

PRESETS = {
    "fig2": fig2_spec,
    "two-regime": two_regime_spec,
    "sst-like": sst_like_spec,
    "small-joint": small_joint_spec,
}


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("csv", help="input CSV with a header row")
    p.add_argument("--column", action="append", dest="columns", help="column to analyse (repeatable; default: all)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--na", action="append", dest="na_values", help="missing-value sentinel (repeatable; default: empty or NA)")
    p.add_argument("--average", action="store_true", help="impute each column, then analyse the row-wise mean")
    p.add_argument("-r", "--report", help="write the JSON report here instead of stdout")
    p.add_argument("--plot-dir", help="write one TSV of fitted components per series here")
    p.add_argument("--jobs", type=int, default=4, help="series processed in parallel")
    p.add_argument("--no-timing", action="store_true", help="omit the timing section from the report")
    p.add_argument("--config", help="JSON file of option defaults (keys are option names)")


def _add_break_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hmin", type=int, default=2, dest="h_min", help="minimum segment length (default 2)")
    p.add_argument("--m-max", type=int, default=None, help="largest number of segments (default min(T/hmin, T/2))")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regbreaks", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("decompose", help="seasonal-trend decomposition without breaks")
    _add_input_args(p)
    method = p.add_mutually_exclusive_group()
    method.add_argument("--reg", dest="method", action="store_const", const="reg", help="penalized period search (default)")
    method.add_argument("--classical", dest="method", action="store_const", const="classical", help="moving-average baseline")
    p.add_argument("--lambda", type=float, default=0.1, dest="lam")
    p.add_argument("--p-max", type=int, default=None, help="largest candidate period (default T/2)")
    p.add_argument("--q", type=int, default=None, help="moving-average size for --classical")
    p.add_argument("--degree", type=int, default=1, help="trend degree for --classical (0 or 1)")
    p.add_argument("--literal", action="store_true", help="--classical: average raw y per phase")
    p.set_defaults(method="reg")

    p = sub.add_parser("breaks", help="trend breaks in a season-free series")
    _add_input_args(p)
    p.add_argument("--lambda", type=float, default=0.15, dest="lam")
    _add_break_args(p)

    p = sub.add_parser("joint", help="trend breaks in a seasonal series")
    _add_input_args(p)
    p.add_argument("--lambda", type=float, default=0.1, dest="lam")
    p.add_argument("--period", type=int, default=None, help="known seasonal period (skips the search)")
    p.add_argument("--p-max", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--trend-tol", type=float, default=1e-6)
    _add_break_args(p)

    p = sub.add_parser("oracle", help="exhaustive reference solvers for small inputs")
    _add_input_args(p)
    p.add_argument("--kind", choices=("breaks", "joint"), default="breaks")
    p.add_argument("--m", type=int, default=2, help="segments for --kind breaks; max segments for joint")
    p.add_argument("--hmin", type=int, default=2, dest="h_min")
    p.add_argument("--lambda", type=float, default=0.1, dest="lam")
    p.add_argument("--p-max", type=int, default=12)

    p = sub.add_parser("synth", help="write a seeded synthetic series as CSV")
    preset = p.add_mutually_exclusive_group(required=True)
    for name in PRESETS:
        preset.add_argument(f"--{name}", dest="preset", action="store_const", const=name)
    preset.add_argument("--spec", help="JSON generator spec (T, trend_pieces, seasonal, sigma, seed)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--truth", help="also write the noise-free components as CSV here")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            overrides = json.load(fh)
        subparser = parser.subcommands[args.command]
        # keys may be flag names ("m-max", "lambda") or destinations ("m_max", "lam")
        names = {}
        for action in subparser._actions:
            names[action.dest] = action.dest
            for opt in action.option_strings:
                names[opt.lstrip("-")] = action.dest
        unknown = sorted(k for k in overrides if k not in names)
        if unknown:
            parser.error(f"unknown config keys: {unknown}")
        # flags on the command line still win over the file
        subparser.set_defaults(**{names[k]: v for k, v in overrides.items()})
        args = parser.parse_args(argv)
    return args


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"verbose", "report", "plot_dir", "no_timing", "config", "jobs"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load(args) -> Dataset:
    na = tuple(args.na_values) if args.na_values else ("", "NA")
    ds = load_csv(args.csv, columns=args.columns, delimiter=args.delimiter, na_values=na)
    ds = impute_temporal_average(ds)
    if args.average:
        ds = average_series(ds)
    return ds


def _analyse(args, series) -> tuple[dict, object]:
    if args.command == "decompose":
        if args.method == "classical":
            if args.q is None:
                raise RegbreaksError("--classical needs --q")
            model = classical_decompose(series, args.q, args.degree, literal=args.literal)
            return {"method": "classical", "q": args.q, "model": model_to_dict(model)}, model
        result, model = regularized_decompose(series, args.lam, args.p_max)
        return {
            "method": "reg",
            "p_star": result.p_star,
            "objective_curve": [[p, float(v)] for p, v in enumerate(result.objective_curve)],
            "delta": [float(v) for v in result.delta],
            "model": model_to_dict(model),
        }, model
    if args.command == "breaks":
        table = build_ssr_table(series, args.h_min)
        sol = select_num_breaks(series, args.lam, args.m_max, args.h_min, table=table)
        model = sol.to_model(series)
        m_top = min(sol.m + 3, args.m_max or default_m_max(series.T, args.h_min))
        path = ssr_path(table, m_top)
        curve = [[m, float(np.sqrt(path[m]) + 2 * m * args.lam)] for m in range(1, m_top + 1)]
        return {
            "m": sol.m,
            "breaks": list(sol.breaks),
            "ssr_total": sol.ssr_total,
            "objective": sol.objective,
            "objective_curve": curve,
            "model": model_to_dict(model),
        }, model
    if args.command == "joint":
        config = JointConfig(
            lam=args.lam,
            max_iters=args.max_iters,
            trend_tol=args.trend_tol,
            p_max=args.p_max,
            m_max=args.m_max,
            h_min=args.h_min,
            fixed_period=args.period,
        )
        jm = iterative_detect(series, config)
        return {
            "m": jm.m,
            "breaks": list(jm.breaks),
            "period": jm.period,
            "objective": jm.objective,
            "iterations": jm.iterations,
            "converged": jm.converged,
            "history": [
                {"iteration": h.iteration, "breaks": list(h.breaks), "period": h.period,
                 "objective": h.objective, "trend_change": h.trend_change}
                for h in jm.history
            ],
            "model": model_to_dict(jm.model),
        }, jm.model
    if args.command == "oracle":
        if args.kind == "breaks":
            sol = brute_force_breaks(series, args.m, args.h_min)
            model = sol.to_model(series)
            return {"kind": "breaks", "m": sol.m, "breaks": list(sol.breaks),
                    "ssr_total": sol.ssr_total, "model": model_to_dict(model)}, model
        jm = brute_force_joint(series, args.lam, m_max=args.m, p_max=args.p_max, h_min=args.h_min)
        return {"kind": "joint", "m": jm.m, "breaks": list(jm.breaks), "period": jm.period,
                "objective": jm.objective, "model": model_to_dict(jm.model)}, jm.model
    raise AssertionError(args.command)


def _run_analysis(args) -> int:
    started = time.perf_counter()
    ds = _load(args)
    names = ds.names()
    timings = {}

    def work(k):
        t0 = time.perf_counter()
        result, model = _analyse(args, ds.series[k])
        timings[names[k]] = time.perf_counter() - t0
        return result, model

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        outputs = list(pool.map(work, range(len(ds.series))))

    if args.plot_dir:
        plot_dir = Path(args.plot_dir)
        plot_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for name, series, (result, model) in zip(names, ds.series, outputs):
        entry = {"series": name, "T": series.T, **result}
        if args.plot_dir:
            plot_path = plot_dir / f"{args.command}_{name}.tsv"
            write_plot_tsv(plot_path, series.values, model)
            entry["plot_file"] = str(plot_path)
        results.append(entry)

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "library_version": __version__,
        "command": args.command,
        "config": _config_echo(args),
        "inputs": [{"path": args.csv, "sha256": file_sha256(args.csv)}],
        "imputation_log": [[s, t, v] for s, t, v in ds.imputation_log],
        "results": results,
    }
    if not args.no_timing:
        report["timing"] = {"total_seconds": time.perf_counter() - started, "per_series_seconds": timings}
    text = dump_report(report)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _run_synth(args) -> int:
    if args.spec:
        with open(args.spec) as fh:
            spec = GeneratorSpec.from_dict(json.load(fh))
        if args.seed is not None:
            spec = GeneratorSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    else:
        spec = PRESETS[args.preset](seed=args.seed or 0)
    series = gen_series(spec)
    write_csv(args.output, [series])
    if args.truth:
        write_csv(args.truth, [
            TimeSeries(spec.trend(), label="trend"),
            TimeSeries(spec.seasonal_component(), label="seasonal"),
        ])
    meta = {"output": args.output, "spec": spec.to_dict(), "rng": RNG_ALGORITHM, "library_version": __version__}
    sys.stdout.write(dump_report(meta))
    return 0


def run_command(argv: list[str] | None = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = _apply_config(parser, list(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "synth":
            return _run_synth(args)
        return _run_analysis(args)
    except (RegbreaksError, ValueError, OSError) as exc:
        print(f"regbreaks {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
