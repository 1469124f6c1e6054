#!/usr/bin/env python3
"""
iosynth command line

    python -m iosynth synthesize MODEL.json [--mode transformed --auto-transform --poles 0.2 0.5]
    python -m iosynth table1
    python -m iosynth pendulum [--h 0.065]
    python -m iosynth diagnose MODEL.json
    python -m iosynth simulate MODEL.json --gains results/synthesis.json --seed 0 1 2

Exit codes: 0 success/feasible, 2 infeasible, 3 input error, 4 numerical failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .config import MonitorSettings, RunConfig, SynthesisSettings
from .errors import InputError, IOSynthError, SolverFailure
from .experiments import PENDULUM_LAMBDA_GRID, reported_pendulum_gains, run_pendulum, run_table1
from .model import SystemModel, check_jacobian_bounds, load_model
from .observer import gains_from_dict, simulate_many
from .reports import (PendulumReport, diagnostic_report, synthesis_report, write_json, write_plot_data,
                      write_table_csv, write_trace_csv)
from .synthesis import GridOutcome, GridStats, certificate_from_gains, certificate_from_report, grid_search
from .transform import build_transform, diagnose_direct, place_observer_gain

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = SolverFailure.exit_code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as e:
        raise InputError(f"expected comma-separated numbers, got '{text}'") from e


def _matrix(text: str, rows: int, name: str) -> np.ndarray:
    values = _floats(text)
    if not values or len(values) % rows:
        raise InputError(f"{name} needs a multiple of {rows} entries, got {len(values)}")
    return np.array(values).reshape(rows, -1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tau-grid", type=_floats, help="comma-separated tau values (default 1e-3..1e3)")
    common.add_argument("--lambda-grid", type=_floats, help="comma-separated lambda values (default 0.05..0.95)")
    common.add_argument("--eps-pos", type=float, default=1e-6, help="margin for strict inequalities")
    common.add_argument("--solver", default="CLARABEL", help="cvxpy solver name (CLARABEL, SCS)")
    common.add_argument("--workers", type=int, default=4, help="concurrent solves per grid row")
    common.add_argument("--seed", type=int, nargs="+", default=[0], help="disturbance seeds")
    common.add_argument("--horizon", type=int, default=1000, help="simulation steps")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings only, no progress bars")

    parser = _Parser(prog="iosynth", description="Interval observer synthesis and simulation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synthesize", parents=[common], help="grid synthesis for a model file")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--mode", choices=["direct", "transformed"], default="direct")
    p.add_argument("--lambda-gain", help="Luenberger gain Λ, row-major (overrides the model file)")
    p.add_argument("--S", dest="transform_S", help="transformation S, row-major (overrides the model file)")
    p.add_argument("--auto-transform", action="store_true", help="build S from the eigenvectors of A − ΛC")
    p.add_argument("--poles", type=float, nargs="+", help="place σ(A − ΛC) here when Λ is not given")
    p.add_argument("--no-injection", action="store_true", help="pin K (or H) to zero")
    p.add_argument("--force-grid", action="store_true", help="run the grid even if the structural test fails")

    p = sub.add_parser("table1", parents=[common], help="largest admissible alpha for the six patterns")
    p.add_argument("--columns", type=int, nargs="+", help="1-based columns to compute (default all)")
    p.add_argument("--bracket", type=float, nargs=2, default=(0.0, 1.0), metavar=("LOW", "HIGH"))

    p = sub.add_parser("pendulum", parents=[common], help="sampled-data pendulum pipeline")
    p.add_argument("--h", type=float, default=0.065, help="sampling step in seconds")
    p.add_argument("--x0", type=_floats, default=[0.5, 0.3], help="initial state")
    p.add_argument("--radius", type=float, default=0.1, help="initial interval half-width")
    p.add_argument("--check-reported", action="store_true", help="also check the reference gains")

    p = sub.add_parser("diagnose", parents=[common], help="structural test and Jacobian bound check")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--samples", type=int, default=10_000, help="Jacobian check samples")

    p = sub.add_parser("simulate", parents=[common], help="simulate saved gains on a model")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--gains", required=True, help="report written by 'synthesize'")
    p.add_argument("--x0", type=_floats, help="initial state (default zeros)")
    p.add_argument("--radius", type=float, default=0.1, help="initial interval half-width")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    grids = {}
    if args.tau_grid is not None:
        grids["tau_grid"] = args.tau_grid
    if args.lambda_grid is not None:
        grids["lambda_grid"] = args.lambda_grid
    elif args.command == "pendulum":
        grids["lambda_grid"] = list(PENDULUM_LAMBDA_GRID)
    settings = SynthesisSettings(eps_pos=args.eps_pos, solver=args.solver, max_workers=args.workers, **grids)
    config = RunConfig(command=args.command, synthesis=settings, monitors=MonitorSettings(),
                       seeds=list(args.seed), horizon=args.horizon, out_dir=args.out)
    config.model_path = getattr(args, "model", None)
    config.mode = getattr(args, "mode", "direct")
    config.gains_path = getattr(args, "gains", None)
    config.auto_transform = getattr(args, "auto_transform", False)
    config.poles = getattr(args, "poles", None)
    config.h = getattr(args, "h", config.h)
    config.x0 = getattr(args, "x0", None)
    config.radius = getattr(args, "radius", config.radius)
    if config.model_path is not None and not Path(config.model_path).exists():
        raise InputError(f"model file not found: {config.model_path}")
    if config.gains_path is not None and not Path(config.gains_path).exists():
        raise InputError(f"gains file not found: {config.gains_path}")
    return config


def _transform_inputs(model: SystemModel, config: RunConfig, args):
    n, m = model.n, model.m
    Lambda = _matrix(args.lambda_gain, n, "Lambda") if args.lambda_gain else model.Lambda
    S = _matrix(args.transform_S, n, "S") if args.transform_S else model.S
    if Lambda is None and config.poles:
        Lambda = place_observer_gain(model.A, model.C, config.poles)
    if S is None and config.auto_transform:
        if Lambda is None:
            raise InputError("--auto-transform needs Lambda (model file, --lambda-gain or --poles)")
        S = build_transform(model.A, model.C, Lambda).S
    if Lambda is None or S is None:
        raise InputError("transformed mode needs Lambda and S (model file, flags, or --auto-transform)")
    if Lambda.shape != (n, m):
        raise InputError(f"Lambda must be {n}x{m}, got {Lambda.shape}")
    return Lambda, S


def cmd_synthesize(config: RunConfig, args) -> int:
    model = load_model(config.model_path)
    out = Path(config.out_dir)
    print(f"🔧 Synthesizing {config.mode} observer for '{model.name}'")

    diagnostic = None
    if config.mode == "direct":
        diagnostic = diagnose_direct(model.A, model.C)
        if diagnostic.infeasible and not args.force_grid:
            report = synthesis_report(model, "direct", GridOutcome(None, GridStats()), diagnostic)
            write_json(report, out / "synthesis.json")
            print(f"❌ Infeasible: {diagnostic.message()}")
            return EXIT_INFEASIBLE
        outcome = grid_search(model, config.synthesis, "direct", allow_K=not args.no_injection)
    else:
        Lambda, S = _transform_inputs(model, config, args)
        outcome = grid_search(model, config.synthesis, "transformed", Lambda=Lambda, S=S,
                              allow_K=not args.no_injection)

    report = synthesis_report(model, config.mode, outcome, diagnostic)
    path = write_json(report, out / "synthesis.json")
    stats = outcome.stats
    print(f"📊 Grid: {stats.points_solved} solves, {stats.feasible} feasible, "
          f"{stats.infeasible} infeasible, {stats.failures} numerical failures")
    if outcome.numerical_failure:
        print(f"💥 Every solve failed numerically, see {path}")
        return EXIT_NUMERICAL
    if outcome.found is None:
        print("❌ No feasible grid point")
        return EXIT_INFEASIBLE
    cert = outcome.found.certificate
    print(f"✅ Feasible at tau={cert.tau:g}, lambda={cert.lam:g}, gamma={cert.gamma:.4g}")
    print(f"💾 Report saved to: {path}")
    return EXIT_OK


def cmd_table1(config: RunConfig, args) -> int:
    columns = None if args.columns is None else [c - 1 for c in args.columns]
    if columns is not None and any(not 0 <= c < 6 for c in columns):
        raise InputError("columns must lie in 1..6")
    table = run_table1(config.synthesis, tuple(args.bracket), columns=columns, progress=not args.quiet)
    out = Path(config.out_dir)
    write_json(table, out / "table1.json")
    path = write_table_csv(table, out / "table1.csv")

    print("\n📋 Maximum alpha (reference in parentheses)")
    print("=" * 60)
    for K_allowed, label in ((False, "K = 0 "), (True, "K free")):
        row = [c for c in table.cells if c.K_allowed == K_allowed]
        cells = [("  fail" if c.alpha is None else f"{c.alpha:6.3f}") + f" ({c.reference:.2f})" for c in row]
        print(f"{label}: " + "  ".join(cells))
    print("=" * 60)
    print(f"💾 Table saved to: {path}")
    failed = [c for c in table.cells if c.error]
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_pendulum(config: RunConfig, args) -> int:
    run = run_pendulum(h=config.h, settings=config.synthesis, x0=config.x0, radius=config.radius,
                       horizon=config.horizon, monitors=config.monitors)
    out = Path(config.out_dir)
    print(f"🧭 Pendulum, h = {config.h:g} s, disturbance bound {run.config.disturbance_bound:.6g}")
    print(f"🔍 Direct form: {run.diagnostic.message()}")

    report = PendulumReport(
        h=config.h,
        disturbance_bound=run.config.disturbance_bound,
        direct=synthesis_report(run.model, "direct", run.direct, run.diagnostic),
        transformed=synthesis_report(run.model, "transformed", run.transformed),
        summary=None if run.trace is None else run.trace.summary,
    )
    if args.check_reported and abs(config.h - 0.065) < 1e-12:
        reported = certificate_from_gains(run.model, reported_pendulum_gains())
        report.transformed.notes.append(
            "reference gains: " + ", ".join(f"{k}={'pass' if ok else 'fail'}" for k, ok in reported.post_checks.items()))
    write_json(report, out / "pendulum.json")
    if run.transformed.numerical_failure:
        print("💥 Transformed synthesis failed numerically")
        return EXIT_NUMERICAL
    if run.trace is None:
        print("❌ Transformed synthesis infeasible")
        return EXIT_INFEASIBLE

    write_trace_csv(run.trace, out / "pendulum_trace.csv", config.monitors)
    write_plot_data(run.trace, config.h, out / "pendulum_plot.csv")
    s = run.trace.summary
    print(f"✅ Containment violations: {s.positivity_violations}, ultimate width {s.ultimate_bound:.4g}, "
          f"max Euler defect {s.max_defect:.3g}")
    return EXIT_OK


def cmd_diagnose(config: RunConfig, args) -> int:
    model = load_model(config.model_path)
    diag = diagnose_direct(model.A, model.C)
    jac = check_jacobian_bounds(model, sample_count=args.samples, seed=config.seeds[0])
    path = write_json(diagnostic_report(model, diag, jac), Path(config.out_dir) / "diagnostic.json")
    print(f"{'⚠️ ' if diag.infeasible else '✅'} {diag.message()}")
    print(f"{'⚠️ ' if not jac.ok else '✅'} Jacobian bounds: {len(jac.violations)} violations "
          f"in {jac.samples} samples")
    print(f"💾 Diagnostic saved to: {path}")
    return EXIT_OK


def cmd_simulate(config: RunConfig, args) -> int:
    model = load_model(config.model_path)
    try:
        data = json.loads(Path(config.gains_path).read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"cannot parse gains file {config.gains_path}: {e}") from e
    if not isinstance(data, dict) or not data.get("gains"):
        raise InputError(f"{config.gains_path} holds no gains")
    gains = gains_from_dict(data["gains"])
    gains.check_dims(model)
    cert = certificate_from_report(model, gains, data) if data.get("variables") else None

    x0 = np.zeros(model.n) if config.x0 is None else np.asarray(config.x0, dtype=float)
    if x0.shape != (model.n,):
        raise InputError(f"--x0 needs {model.n} entries, got {x0.size}")
    traces = simulate_many(model, gains, lambda seed: (x0, x0 + config.radius, x0 - config.radius),
                           config.seeds, config.horizon, cert, config.monitors,
                           max_workers=config.synthesis.max_workers, progress=not args.quiet)
    out = Path(config.out_dir)
    total = 0
    for trace in traces:
        write_trace_csv(trace, out / f"trace_seed{trace.seed}.csv", config.monitors)
        write_json(trace.summary, out / f"summary_seed{trace.seed}.json")
        total += trace.summary.positivity_violations
    print(f"✅ {len(traces)} runs, {total} containment violations")
    return EXIT_OK


COMMANDS = {
    "synthesize": cmd_synthesize,
    "table1": cmd_table1,
    "pendulum": cmd_pendulum,
    "diagnose": cmd_diagnose,
    "simulate": cmd_simulate,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        return COMMANDS[args.command](config, args)
    except IOSynthError as e:
        logger.error(str(e))
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
