"""Command-line front end: curves, scatter runs, the sweep, and sequence demos.

Every command writes delimited text prefixed with a manifest comment block
that echoes the version, the command, and the full configuration, so a file
documents exactly how to reproduce itself; outputs carry no timestamps and
are byte-identical across runs with the same flags.

Exit codes: 0 success, 1 a verified claim failed (a bound violation, a gap
out of tolerance, a broken chain link), 2 unusable flags or configuration.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .bounds import (
    BoundThreshold,
    CURVE_KINDS,
    curve_csv_lines,
    format_log_base,
    sample_curve,
)
from .errors import ErrorBoundError
from .frontier import lambda_grid, sweep_csv_lines, sweep_frontier
from .seeding import RNG_ALGORITHM, spawned_rng
from .sequences import (
    SequenceTask,
    chain_csv_lines,
    demo_csv_lines,
    kl_chain,
    ppl_wer_demo,
    random_task,
    read_task,
    with_sequence_prior,
)
from .simulation import (
    MODEL_KINDS,
    SamplerConfig,
    adaptive_strategy_mix,
    records_csv_lines,
    run_scatter_parallel,
    worker_count,
)

__all__ = ["main", "console_entry", "build_parser", "manifest_lines"]

# Frontier sweep gates: validity always, tightness only for tiny epsilon.
GAP_VALIDITY_TOL = 1e-12
GAP_TIGHTNESS_TOL = 1e-4
TIGHTNESS_EPSILON = 1e-8

# The perplexity demo enumerates observations internally; three is plenty.
_DEMO_X_COUNT = 3


def manifest_lines(command: str, log_base: float, params: dict, seeded: bool) -> list[str]:
    """Comment block identifying a run: version, command, base, rng, config."""
    lines = [
        "# errorbound run manifest",
        f"# version: {__version__}",
        f"# command: {command}",
        f"# log_base: {format_log_base(log_base)}",
    ]
    if seeded:
        lines.append(f"# rng: {RNG_ALGORITHM}")
    for key in sorted(params):
        lines.append(f"# {key}: {_param_text(params[key])}")
    return lines


def _param_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return ",".join(f"{k}={v!r}" for k, v in sorted(value.items()))
    return str(value)


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _figure_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return (root if ext else out) + ".svg"


def _parse_log_base(text: str) -> float:
    if text.strip().lower() == "e":
        return math.e
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"log base must be 'e' or a number, got {text!r}") from exc


def cmd_bounds(args: argparse.Namespace) -> int:
    threshold = BoundThreshold(args.t)
    curves = [sample_curve(kind, threshold, args.grid, args.log_base) for kind in CURVE_KINDS]
    lines = manifest_lines(
        "bounds", args.log_base, {"grid": args.grid, "t": args.t}, seeded=False
    )
    lines.extend(curve_csv_lines(curves))
    _write_lines(args.out, lines)
    if args.format == "svg":
        from . import plotting

        plotting.render_bound_curves(curves, _figure_path(args.out))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    mix = adaptive_strategy_mix(args.t, args.classes, args.observations, args.seed)
    config = SamplerConfig(
        t=args.t,
        samples=args.samples,
        seed=args.seed,
        num_classes=args.classes,
        num_observations=args.observations,
        strategy_mix=mix,
        model_kind=args.model_kind,
    )
    records, summary = run_scatter_parallel(config, worker_count())
    params = {
        "check": args.check,
        "classes": args.classes,
        "model_kind": args.model_kind,
        "observations": args.observations,
        "samples": args.samples,
        "seed": args.seed,
        "strategy_mix": mix,
        "t": args.t,
    }
    lines = manifest_lines("simulate", math.e, params, seeded=True)
    lines.extend(records_csv_lines(records, summary))
    _write_lines(args.out, lines)
    if args.format == "svg":
        from . import plotting

        curves = [sample_curve("unconstrained_g", args.t, 256), sample_curve("refined_h", args.t, 256)]
        plotting.render_scatter(records, curves, _figure_path(args.out))
    if args.check and summary.violations > 0:
        print(f"bound violated by {summary.violations} of {len(records)} records", file=sys.stderr)
        return 1
    return 0


def cmd_frontier(args: argparse.Namespace) -> int:
    rows = sweep_frontier(args.t, lambda_grid(args.t, args.lambda_steps), args.epsilon)
    lines = manifest_lines(
        "frontier",
        math.e,
        {"epsilon": args.epsilon, "lambda_steps": args.lambda_steps, "t": args.t},
        seeded=False,
    )
    lines.extend(sweep_csv_lines(rows))
    _write_lines(args.out, lines)
    if args.format == "svg":
        from . import plotting

        plotting.render_frontier(rows, _figure_path(args.out))
    worst_below = min(row.gap for row in rows)
    worst_above = max(row.gap for row in rows)
    if worst_below < -GAP_VALIDITY_TOL:
        print(f"family divergence fell below the bound by {-worst_below}", file=sys.stderr)
        return 1
    if args.epsilon <= TIGHTNESS_EPSILON and worst_above > GAP_TIGHTNESS_TOL:
        print(f"gap {worst_above} exceeds {GAP_TIGHTNESS_TOL} at epsilon {args.epsilon}", file=sys.stderr)
        return 1
    return 0


def cmd_sequence_chain(args: argparse.Namespace) -> int:
    if args.task_file is not None:
        with open(args.task_file, "r", encoding="utf-8") as handle:
            tasks = [read_task(handle.read())]
        ids = [os.path.splitext(os.path.basename(args.task_file))[0]]
    else:
        if args.tasks < 1:
            raise ErrorBoundError(f"need at least one task, got {args.tasks}")
        # Alternate model forms so both joint tables and conditional
        # columns exercise the chain.
        tasks = [
            random_task(
                args.seed,
                i,
                args.N,
                args.classes,
                args.xcount,
                args.t,
                model_form="joint" if i % 2 == 0 else "conditional",
            )
            for i in range(args.tasks)
        ]
        ids = [str(i) for i in range(args.tasks)]
    reports = [kl_chain(task) for task in tasks]
    params = {
        "N": args.N,
        "classes": args.classes,
        "seed": args.seed,
        "t": args.t,
        "task_file": args.task_file if args.task_file is not None else "",
        "tasks": len(tasks),
        "xcount": args.xcount,
    }
    lines = manifest_lines("sequence-chain", math.e, params, seeded=args.task_file is None)
    lines.extend(chain_csv_lines(reports, ids))
    _write_lines(args.out, lines)
    if args.format == "svg":
        from . import plotting

        plotting.render_chain(reports, _figure_path(args.out))
    broken = sum(1 for report in reports if not all(report.links()))
    if broken:
        print(f"chain ordering failed on {broken} of {len(reports)} tasks", file=sys.stderr)
        return 1
    return 0


def cmd_ppl_demo(args: argparse.Namespace) -> int:
    if args.models < 0:
        raise ErrorBoundError(f"model count must be >= 0, got {args.models}")
    if args.t <= 0.0:
        raise ErrorBoundError("the perplexity bound needs t > 0")
    base = random_task(args.seed, 0, args.N, args.classes, _DEMO_X_COUNT, args.t, "prior")
    truth = base.true_joint
    matched = with_sequence_prior(truth, truth.weights.sum(axis=1))
    tasks = [SequenceTask(args.N, args.classes, truth, matched, base.threshold)]
    ids = ["matched_prior"]
    used = np.flatnonzero(truth.weights.sum(axis=1) > 0.0)
    for k in range(args.models):
        rng = spawned_rng(args.seed, k + 1)
        prior = np.zeros(truth.num_classes)
        prior[used] = rng.dirichlet(np.ones(used.size))
        tasks.append(
            SequenceTask(
                args.N, args.classes, truth, with_sequence_prior(truth, prior), base.threshold
            )
        )
        ids.append(f"prior_{k + 1}")
    rows = ppl_wer_demo(tasks, ids=ids)
    params = {
        "N": args.N,
        "classes": args.classes,
        "models": args.models,
        "seed": args.seed,
        "t": args.t,
        "xcount": _DEMO_X_COUNT,
    }
    lines = manifest_lines("ppl-demo", math.e, params, seeded=True)
    lines.extend(demo_csv_lines(rows))
    _write_lines(args.out, lines)
    if args.format == "svg":
        from . import plotting

        plotting.render_ppl(rows, _figure_path(args.out))
    failing = sum(1 for row in rows if not row.holds)
    if failing:
        print(f"perplexity bound failed on {failing} of {len(rows)} rows", file=sys.stderr)
        return 1
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument(
        "--format",
        choices=("csv", "svg"),
        default="csv",
        help="svg additionally renders a figure next to --out",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="errorbound",
        description="Divergence lower bounds for classification error mismatch.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="sample the three bound curves on a mismatch grid")
    p.add_argument("--t", type=float, default=0.01, help="Bayes error cap (0 < t < 0.5)")
    p.add_argument("--grid", type=int, default=201, help="grid points in [0, 1]")
    p.add_argument("--log-base", type=_parse_log_base, default=math.e, help="'e' or a number")
    _add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="scatter sampled pairs against the refined bound")
    p.add_argument("--t", type=float, default=0.01, help="Bayes error cap")
    p.add_argument("--classes", type=int, default=7)
    p.add_argument("--observations", type=int, default=15)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-kind", choices=MODEL_KINDS, default="joint")
    p.add_argument("--check", action="store_true", help="exit 1 if any record violates the bound")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("frontier", help="sweep the equality family along its parameter grid")
    p.add_argument("--t", type=float, default=0.01)
    p.add_argument("--lambda-steps", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=1e-8)
    _add_common(p)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("sequence-chain", help="divergence chain over random sequence tasks")
    p.add_argument("--tasks", type=int, default=100)
    p.add_argument("--N", type=int, default=2, help="sequence length")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--xcount", type=int, default=3)
    p.add_argument("--t", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--task-file", default=None, help="read one task from a file instead")
    _add_common(p)
    p.set_defaults(func=cmd_sequence_chain)

    p = sub.add_parser("ppl-demo", help="perplexity vs Hamming error for prior families")
    p.add_argument("--models", type=int, default=50)
    p.add_argument("--N", type=int, default=2, help="sequence length")
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--t", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_ppl_demo)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format == "svg" and args.out is None:
        print("error: --format svg needs --out", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ErrorBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_entry() -> None:
    sys.exit(main())
