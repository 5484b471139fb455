"""Command-line front end: ``dptune {run,tune,rank,report,fixtures}``.

Exit status is 0 on success, 1 when the work itself fails and 2 for usage or
configuration errors.  Set ``DPTUNE_LOG_LEVEL`` (e.g. ``INFO``, ``DEBUG``) for
progress messages on stderr.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

from . import fixtures, harness, report
from .data import DataError, load_release
from .evaluation import GOALS, score
from .learners import FAMILIES, train
from .optimizers import OPTIMIZERS, Budget, Objective, tune
from .param_space import SpaceError, builtin_space, load_space
from .stats import rank_table

log = logging.getLogger("dptune")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _space_override(text: str) -> tuple[str, str]:
    learner, sep, path = text.partition("=")
    if not sep or not learner or not path:
        raise argparse.ArgumentTypeError(f"expected LEARNER=PATH, got {text!r}")
    return learner, path


def _add_budget(p: argparse.ArgumentParser):
    p.add_argument("--lives", type=int, default=5, help="rounds without improvement before stopping")
    p.add_argument("--time-budget-secs", type=float, default=3600.0,
                   help="wall-clock cap per tuning run")
    p.add_argument("--round-size", type=int, default=10, help="candidates evaluated per round")
    p.add_argument("--grid-points", type=int, default=5, help="grid points per numeric dimension")
    p.add_argument("--seed", type=int, default=0, help="master seed for all randomness")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dptune", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the release-incremental tuning experiment")
    p.add_argument("--manifest", required=True, help="JSON mapping project -> ordered CSV list")
    p.add_argument("--out", required=True, help="output directory (resumed if it holds results)")
    p.add_argument("--learners", type=_csv_list, default=list(FAMILIES))
    p.add_argument("--optimizers", type=_csv_list, default=list(OPTIMIZERS))
    p.add_argument("--goals", type=_csv_list, default=list(GOALS))
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--space", type=_space_override, action="append", default=[],
                   metavar="LEARNER=PATH", help="replace a learner's built-in parameter space")
    p.add_argument("--no-svg", action="store_true", help="skip the heatmap")
    _add_budget(p)

    p = sub.add_parser("tune", help="tune one learner on a train/validate pair")
    p.add_argument("--learner", required=True)
    p.add_argument("--optimizer", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--train", required=True, help="training CSV")
    p.add_argument("--validate", required=True, help="validation CSV")
    p.add_argument("--space", help="JSON parameter space replacing the built-in one")
    p.add_argument("--trajectory", help="write (evaluation, best score) rows to this CSV")
    _add_budget(p)

    p = sub.add_parser("rank", help="Scott-Knott rank a CSV of (treatment, value) rows")
    p.add_argument("input", help="CSV with columns treatment,value")

    p = sub.add_parser("report", help="rebuild win matrix and runtime table from results.csv")
    p.add_argument("--out", required=True, help="directory holding results.csv")
    p.add_argument("--no-svg", action="store_true")

    p = sub.add_parser("fixtures", help="write the bundled synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=fixtures.FIXTURE_SEED)
    return parser


def _write_reports(records, out: Path, repeats, svg: bool):
    matrix = harness.analyse(records, repeats)
    runtimes = harness.runtime_table(records)
    report.write_report(matrix, runtimes, out, svg=svg)
    sys.stdout.write(report.wins_text(matrix))


def cmd_run(args) -> int:
    config = harness.ExperimentConfig(
        manifest=args.manifest, learners=args.learners, optimizers=args.optimizers,
        goals=args.goals, repeats=args.repeats, lives=args.lives,
        max_wall_time=args.time_budget_secs, round_size=args.round_size,
        grid_points=args.grid_points, seed=args.seed, space_files=dict(args.space),
    )
    out = Path(args.out)
    result = harness.run_experiment(config, out, workers=args.workers)
    _write_reports(result.records, out, config.repeats, not args.no_svg)
    return EXIT_OK


def cmd_tune(args) -> int:
    for value, allowed, what in ((args.learner, FAMILIES, "learner"),
                                 (args.optimizer, OPTIMIZERS, "optimizer"),
                                 (args.goal, GOALS, "goal")):
        if value not in allowed:
            raise UsageError(f"unknown {what} {value!r}; expected one of {', '.join(allowed)}")
    space = load_space(args.space, args.learner) if args.space else builtin_space(args.learner)
    if space.learner != args.learner:
        raise UsageError(f"space file is for {space.learner}, not {args.learner}")
    budget = Budget(lives=args.lives, max_wall_time=args.time_budget_secs,
                    round_size=args.round_size)
    tr = load_release(args.train).instances
    va = load_release(args.validate).instances
    tune_ss, learn_ss = np.random.SeedSequence(args.seed).spawn(2)

    def evaluate(setting):
        try:
            model = train(args.learner, tr, setting, np.random.default_rng(learn_ss), space=space)
            return score(args.goal, model.predict(va.features), va.labels)
        except Exception as exc:
            log.debug("candidate %s failed: %s", setting, exc)
            return 0.0

    start = time.perf_counter()
    result = tune(args.optimizer, space, Objective(evaluate), budget,
                  np.random.default_rng(tune_ss), grid_points=args.grid_points)
    elapsed = time.perf_counter() - start
    print(f"best_setting: {result.best_setting.to_json()}")
    print(f"best_score: {result.best_score:.6f}")
    print(f"evaluations: {result.evaluations_used}")
    print(f"wall_time_secs: {elapsed:.3f}")
    if args.trajectory:
        pd.DataFrame(result.trajectory, columns=["evaluation", "best_score"]).to_csv(
            args.trajectory, index=False, lineterminator="\n")
    return EXIT_OK


def _read_treatments(path) -> list[tuple[str, list[float]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    if rows and [c.strip().lower() for c in rows[0]] == ["treatment", "value"]:
        rows = rows[1:]
    if not rows:
        raise UsageError(f"{path}: no (treatment, value) rows")
    groups: dict[str, list[float]] = {}
    for line, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise UsageError(f"{path}: row {line} has {len(row)} fields, expected 2")
        try:
            value = float(row[1])
        except ValueError:
            raise UsageError(f"{path}: row {line} value {row[1]!r} is not a number") from None
        if not np.isfinite(value):
            raise UsageError(f"{path}: row {line} value is not finite")
        groups.setdefault(row[0].strip(), []).append(value)
    return list(groups.items())


def cmd_rank(args) -> int:
    rows = rank_table(_read_treatments(args.input))
    width = max(len("treatment"), *(len(n) for n, _, _ in rows))
    print(f"{'treatment':<{width}}  rank  median")
    for name, rank, median in rows:
        print(f"{name:<{width}}  {rank:>4}  {median:.6f}")
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out)
    path = out / harness.RESULTS_FILE
    if not path.exists():
        raise UsageError(f"{path} not found")
    records = harness.read_results(path)
    if not records:
        raise UsageError(f"{path} holds no records")
    _write_reports(records, out, None, not args.no_svg)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    manifest = fixtures.write_fixtures(args.out, seed=args.seed)
    print(manifest)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "tune": cmd_tune, "rank": cmd_rank, "report": cmd_report,
            "fixtures": cmd_fixtures}


def main(argv=None) -> int:
    level = os.environ.get("DPTUNE_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, harness.ConfigError, DataError, SpaceError) as exc:
        print(f"dptune {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # anything else is a failure of the run itself
        log.debug("run failed", exc_info=True)
        print(f"dptune {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
