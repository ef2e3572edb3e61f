"""Command-line entry point: ``singlab run|report|exponents|oracle``.

Exit codes: 0 all checks passed, 1 some check failed, 2 configuration or
manifest error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from singlab import __version__
from singlab.config import SCHEMA, ConfigSchemaError, RunConfig, load_config
from singlab.elliptic import EllipticDivergence
from singlab.evolve import FixedPointDivergence, PositivityLost
from singlab.experiments import SCENARIOS, ConfigError, ScenarioReport, run_scenario, torsion_benchmark
from singlab.linalg import SolverStagnation
from singlab.norms import exponents
from singlab.runio import (
    ManifestError,
    plot_convergence,
    plot_increments,
    plot_norms,
    read_manifest,
    verify_manifest,
    write_diagnostics,
    write_manifest,
    write_snapshot_set,
    write_table,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
NUMERICAL_ERRORS = (PositivityLost, FixedPointDivergence, EllipticDivergence, SolverStagnation, FloatingPointError)


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def scenario_parameters(cfg: RunConfig, threads: int | None, seed: int | None, source: str = "<config>") -> dict:
    """Map config blocks onto the scenario's parameters, rejecting what it does not take."""
    if cfg.scenario not in SCENARIOS:
        raise ConfigSchemaError(
            f"unknown scenario {cfg.scenario!r}; available: {', '.join(sorted(SCENARIOS))}",
            cfg.lines.get("scenario"),
            source,
        )
    defaults = SCENARIOS[cfg.scenario].defaults
    params = {}
    for block, keys in SCHEMA.items():
        if block == "output":
            continue
        for key, value in getattr(cfg, block).items():
            name = keys[key][0]
            if name in defaults:
                params[name] = value
            elif block != "grid":
                # grid.n and grid.N are required everywhere; scenarios with
                # their own grids simply ignore them
                raise ConfigSchemaError(
                    f"scenario {cfg.scenario!r} does not take {block}.{key}", cfg.lines.get(f"{block}.{key}"), source
                )
    for key, value in cfg.params.items():
        if key not in defaults:
            raise ConfigSchemaError(
                f"scenario {cfg.scenario!r} does not take params.{key}; allowed: {', '.join(sorted(defaults))}",
                cfg.lines.get(f"params.{key}"),
                source,
            )
        params[key] = value
    if threads is not None and "threads" in defaults:
        params["threads"] = threads
    if seed is not None and "seed" in defaults:
        params["seed"] = seed
    return params


def write_run(out: Path, report: ScenarioReport, cfg: RunConfig, flags: dict) -> dict:
    """Persist tables, diagnostics, snapshots, plots and the manifest."""
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, dict] = {}

    def table(rel: str, rows: list[dict]):
        files[rel] = {"kind": "csv", "rows": write_table(out / rel, rows)}

    table("verdicts.csv", [v.as_row() for v in report.verdicts])
    for name, rows in sorted(report.tables.items()):
        table(f"tables/{name}.csv", rows)
    for label, (traj, grid, s) in sorted(report.trajectories.items()):
        rel = f"diagnostics/{label}.csv"
        files[rel] = {"kind": "csv", "rows": write_diagnostics(out / rel, traj)}
        for path in write_snapshot_set(out / "snapshots" / label, traj, grid, s):
            for p in (path, path.with_suffix(".json")):
                files[str(p.relative_to(out))] = {"kind": "snapshot"}
    if cfg.emit_plots:
        (out / "plots").mkdir(exist_ok=True)
        if "norms" in report.plot_data:
            files["plots/norms.svg"] = {"kind": "svg"}
            plot_norms(out / "plots/norms.svg", report.plot_data["norms"])
        if "increments" in report.plot_data:
            files["plots/increments.svg"] = {"kind": "svg"}
            plot_increments(out / "plots/increments.svg", *report.plot_data["increments"])
        if "convergence" in report.plot_data:
            files["plots/convergence.svg"] = {"kind": "svg"}
            plot_convergence(out / "plots/convergence.svg", *report.plot_data["convergence"])
    report.artifacts = sorted(files)
    manifest = {
        "scenario": report.scenario,
        "version": __version__,
        "config": cfg.as_dict(),
        "parameters": report.parameters,
        "flags": flags,
        "passed": report.passed,
        "verdicts": [v.as_row() for v in report.verdicts],
        "exploratory": report.exploratory,
        "files": files,
    }
    write_manifest(out, json.loads(json.dumps(manifest, default=_jsonable)))
    return manifest


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, Fraction):
        return str(v)
    raise TypeError(f"not serializable: {type(v).__name__}")


def cmd_run(args) -> int:
    if args.config is None:
        _err("run needs --config PATH")
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        params = scenario_parameters(cfg, args.threads, args.seed, str(args.config))
    except ConfigSchemaError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    out = Path(args.out or cfg.out_dir or Path("runs") / cfg.scenario)
    try:
        report = run_scenario(cfg.scenario, params)
    except ConfigError as exc:
        _err(f"{args.config}: {exc}")
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        _err(f"numerical abort ({type(exc).__name__}): {exc}")
        return EXIT_NUMERICAL
    write_run(out, report, cfg, {"threads": args.threads, "seed": args.seed})
    print(report.summary())
    print(f"run directory: {out}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    try:
        manifest = read_manifest(run_dir)
    except ManifestError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    rows = manifest["verdicts"]
    width = max([len(r["check"]) for r in rows] + [5])
    print(f"scenario {manifest['scenario']}: {'PASS' if manifest.get('passed') else 'FAIL'}")
    print(f"{'check':<{width}}  result  {'measured':>13}  relation  {'threshold':>13}")
    for r in rows:
        res = "pass" if r["passed"] else "FAIL"
        print(f"{r['check']:<{width}}  {res:<6}  {r['measured']:>13.6g}  {r['relation']:^8}  {r['threshold']:>13.6g}")
    for warning in verify_manifest(run_dir, manifest):
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def _number(text: str | None):
    if text is None:
        return None
    if text.lower() in ("inf", "infinity", "∞"):
        return math.inf
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def cmd_exponents(args) -> int:
    try:
        rep = exponents(args.n, args.gamma, m=args.m, r=args.r, q=args.q)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    if args.format == "json":
        print(rep.to_json())
    elif args.format == "csv":
        sys.stdout.write(rep.to_csv())
    else:
        for key, value in rep.as_dict().items():
            if isinstance(value, dict):
                value = f"{value['exact']} ({value['value']:.6g})"
            print(f"{key:>24}: {value}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    res = torsion_benchmark(args.N, args.s)
    print(f"torsion benchmark n=1 N={res['N']} s={res['s']}")
    print(f"  closed-form constant      {res['exact']:.12g}")
    print(f"  max rel. error (central)  {res['max_rel_error']:.3e}")
    print(f"  quadrature cross-check    {res['quadrature_max_rel_error']:.3e}")
    print(f"  assembly + apply          {res['seconds']:.3f} s")
    return EXIT_OK if res["max_rel_error"] <= args.tol else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (key-value text)")
    common.add_argument("--out", help="run directory")
    common.add_argument("--threads", type=int, help="worker threads for ladder rungs")
    common.add_argument("--seed", type=int, help="seed for randomized scenarios")
    ap = argparse.ArgumentParser(prog="singlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"singlab {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", parents=[common], help="run a scenario from a config file")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("report", parents=[common], help="print the verdict table of a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_report)
    p = sub.add_parser("exponents", parents=[common], help="threshold and summability exponents")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", type=_number, required=True)
    p.add_argument("--m", type=_number)
    p.add_argument("--r", type=_number)
    p.add_argument("--q", type=_number)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_exponents)
    p = sub.add_parser("oracle", parents=[common], help="torsion benchmark of the fractional operator")
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=0.05)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.threads is not None:
        if args.threads < 1:
            _err("--threads must be >= 1")
            return EXIT_CONFIG
        os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    if args.seed is not None and not 0 <= args.seed < 2**64:
        _err("--seed must be an unsigned 64-bit integer")
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
