"""Release-incremental tuning experiments.

A *cell* is one (transition, learner, optimizer, goal, repeat) tuple: tune on a
2/3 : 1/3 split of release i, retrain the winner on all of release i and score
it on release i+1.  Cells are independent and each derives its random streams
from a hash of (master seed, project, transition, repeat), so the split and
the learner randomness are shared by every learner and optimizer that sees the
same dataset and repeat.  Records are appended to ``results.csv`` as they
finish, which lets an interrupted run resume where it stopped.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import pandas as pd

from .data import ProjectSeries, Release, load_manifest, split_release, transition_pairs
from .evaluation import GOALS, score
from .learners import FAMILIES, train, warm_up
from .optimizers import OPTIMIZERS, Budget, Objective, tune
from .param_space import ParamSetting, ParamSpace, builtin_space, load_space
from .stats import A12_SMALL, CONFIDENCE, TreatmentSamples, scott_knott

log = logging.getLogger(__name__)

RESULTS_FILE = "results.csv"
CONFIG_FILE = "config.json"
TIMING_COLUMNS = ("tune_seconds", "train_seconds")


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to a usage error at the CLI)."""


class CellError(RuntimeError):
    """A cell could not produce a record (final training failed)."""


def _parse_list(values, allowed, what):
    values = tuple(values)
    if not values:
        raise ConfigError(f"at least one {what} is required")
    unknown = [v for v in values if v not in allowed]
    if unknown:
        raise ConfigError(f"unknown {what}(s) {', '.join(unknown)}; expected {', '.join(allowed)}")
    if len(set(values)) != len(values):
        raise ConfigError(f"duplicate {what} in {', '.join(values)}")
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    manifest: str
    learners: tuple = FAMILIES
    optimizers: tuple = OPTIMIZERS
    goals: tuple = GOALS
    repeats: int = 20
    lives: int = 5
    max_wall_time: float = 3600.0
    round_size: int = 10
    grid_points: int = 5
    seed: int = 0
    # learner -> path of a JSON space overriding the built-in one
    space_files: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "manifest", str(self.manifest))
        object.__setattr__(self, "learners", _parse_list(self.learners, FAMILIES, "learner"))
        object.__setattr__(self, "optimizers", _parse_list(self.optimizers, OPTIMIZERS, "optimizer"))
        object.__setattr__(self, "goals", _parse_list(self.goals, GOALS, "goal"))
        object.__setattr__(self, "space_files",
                           tuple(sorted((str(k), str(v)) for k, v in dict(self.space_files).items())))
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.grid_points < 2:
            raise ConfigError("grid points must be >= 2")
        for learner, _ in self.space_files:
            if learner not in FAMILIES:
                raise ConfigError(f"space override for unknown learner {learner!r}")
        try:
            self.budget()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def budget(self) -> Budget:
        return Budget(lives=self.lives, max_wall_time=self.max_wall_time, round_size=self.round_size)

    def spaces(self) -> dict[str, ParamSpace]:
        overrides = dict(self.space_files)
        out = {}
        for learner in self.learners:
            if learner in overrides:
                try:
                    space = load_space(overrides[learner], learner)
                except (OSError, ValueError) as exc:
                    raise ConfigError(f"cannot load space for {learner}: {exc}") from None
                if space.learner != learner:
                    raise ConfigError(f"space file {overrides[learner]} is for {space.learner}, "
                                      f"not {learner}")
                out[learner] = space
            else:
                out[learner] = builtin_space(learner)
        return out

    def to_json(self) -> dict:
        d = asdict(self)
        d["space_files"] = dict(self.space_files)
        return d


@dataclass(frozen=True)
class Transition:
    project: str
    index: int
    train: Release
    test: Release


def transitions(series: list[ProjectSeries]) -> list[Transition]:
    return [Transition(s.project, i, a, b)
            for s in series for i, (a, b) in enumerate(transition_pairs(s))]


def cell_seeds(master: int, project: str, transition: int, repeat: int):
    """``(split, tuner, learner)`` seed sequences for one dataset/repeat pair."""
    digest = hashlib.sha256(f"{master}|{project}|{transition}|{repeat}".encode()).digest()
    return np.random.SeedSequence(int.from_bytes(digest[:16], "little")).spawn(3)


@dataclass(frozen=True)
class RunRecord:
    project: str
    transition: int
    train_version: str
    test_version: str
    learner: str
    optimizer: str
    goal: str
    repeat: int
    test_score: float
    validation_score: float
    evaluations: int
    stop_reason: str
    best_setting: str
    tune_seconds: float
    train_seconds: float

    def __post_init__(self):
        if not 0.0 <= self.test_score <= 1.0:
            raise ValueError(f"test score {self.test_score} outside [0, 1]")
        if self.tune_seconds < 0 or self.train_seconds < 0:
            raise ValueError("wall times must be non-negative")

    @property
    def key(self) -> tuple:
        return (self.project, self.transition, self.learner, self.optimizer, self.goal, self.repeat)

    @property
    def total_seconds(self) -> float:
        return self.tune_seconds + self.train_seconds

    def to_row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(repr(v) if isinstance(v, float) else str(v))
        return out

    @classmethod
    def from_row(cls, row: dict) -> "RunRecord":
        kw = {}
        for f in fields(cls):
            raw = row[f.name]
            kw[f.name] = int(raw) if f.type == "int" else float(raw) if f.type == "float" else raw
        return cls(**kw)


RESULT_COLUMNS = tuple(f.name for f in fields(RunRecord))


def run_cell(transition: Transition, learner: str, optimizer: str, goal: str, repeat: int,
             config: ExperimentConfig, space: ParamSpace | None = None) -> RunRecord:
    space = space or config.spaces()[learner]
    split_ss, tune_ss, learn_ss = cell_seeds(config.seed, transition.project, transition.index, repeat)
    split = split_release(transition.train, np.random.default_rng(split_ss))
    valid_x, valid_y = split.tune_validate.features, split.tune_validate.labels

    def evaluate(setting: ParamSetting) -> float:
        try:
            model = train(learner, split.tune_train, setting, np.random.default_rng(learn_ss),
                          space=space)
            return score(goal, model.predict(valid_x), valid_y)
        except Exception as exc:  # a pathological candidate scores 0, the search goes on
            log.debug("candidate %s failed: %s", setting, exc)
            return 0.0

    start = time.perf_counter()
    result = tune(optimizer, space, Objective(evaluate), config.budget(),
                  np.random.default_rng(tune_ss), grid_points=config.grid_points)
    tune_seconds = time.perf_counter() - start

    start = time.perf_counter()
    try:
        model = train(learner, transition.train.instances, result.best_setting,
                      np.random.default_rng(learn_ss), space=space)
        test = transition.test.instances
        test_score = score(goal, model.predict(test.features), test.labels)
    except Exception as exc:
        raise CellError(f"{transition.project} {transition.train.version}->{transition.test.version} "
                        f"{learner}/{optimizer}/{goal} repeat {repeat}: final training with "
                        f"{result.best_setting} failed: {exc}") from exc
    train_seconds = time.perf_counter() - start
    return RunRecord(
        transition.project, transition.index, transition.train.version, transition.test.version,
        learner, optimizer, goal, repeat, float(test_score), float(result.best_score),
        int(result.evaluations_used), result.stop_reason, result.best_setting.to_json(),
        tune_seconds, train_seconds,
    )


# -- persistence --------------------------------------------------------------

def read_results(path) -> list[RunRecord]:
    """Load records, skipping a truncated trailing line from an interrupted run."""
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        if tuple(reader.fieldnames) != RESULT_COLUMNS:
            raise ConfigError(f"{path}: unexpected header {reader.fieldnames}")
        for line, row in enumerate(reader, start=2):
            try:
                records.append(RunRecord.from_row(row))
            except (TypeError, ValueError, KeyError):
                log.warning("%s: skipping unreadable line %d", path, line)
    return records


def write_results(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in records:
            w.writerow(r.to_row())


class _Appender:
    """Single writer for incremental results; rows are flushed as they arrive."""

    def __init__(self, path: Path):
        new = not path.exists() or path.stat().st_size == 0
        self._fh = open(path, "a", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        if new:
            self._w.writerow(RESULT_COLUMNS)
        elif not path.read_bytes().endswith(b"\n"):
            self._fh.write("\n")

    def add(self, record: RunRecord):
        self._w.writerow(record.to_row())
        self._fh.flush()

    def close(self):
        self._fh.close()


def _sort_key(config: ExperimentConfig, order: dict):
    def key(r: RunRecord):
        return (order.get(r.project, len(order)), r.project, r.transition,
                config.learners.index(r.learner), config.optimizers.index(r.optimizer),
                config.goals.index(r.goal), r.repeat)
    return key


def _check_resume(out: Path, config: ExperimentConfig):
    cfg_path = out / CONFIG_FILE
    # Round-trip through JSON so tuples compare equal to the lists read back.
    current = json.loads(json.dumps(config.to_json()))
    if cfg_path.exists():
        previous = json.loads(cfg_path.read_text(encoding="utf-8"))
        if previous != current:
            raise ConfigError(f"{out} holds results for a different configuration; "
                              "use a fresh output directory")
    else:
        cfg_path.write_text(json.dumps(current, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cell_task(args):
    return run_cell(*args)


@dataclass
class ExperimentResult:
    records: list = field(default_factory=list)
    transitions: list = field(default_factory=list)


def run_experiment(config: ExperimentConfig, out_dir, workers: int = 1) -> ExperimentResult:
    """Run every missing cell of `config`, persisting records under `out_dir`."""
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    spaces = config.spaces()
    series = load_manifest(config.manifest)
    trans = transitions(series)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _check_resume(out, config)
    results_path = out / RESULTS_FILE

    wanted = {(t.project, t.index, l, o, g, r)
              for t in trans for l in config.learners for o in config.optimizers
              for g in config.goals for r in range(config.repeats)}
    done = {}
    for rec in read_results(results_path):
        if rec.key in wanted:
            done[rec.key] = rec
    tasks = [(t, l, o, g, r, config, spaces[l])
             for t in trans for l in config.learners for o in config.optimizers
             for g in config.goals for r in range(config.repeats)
             if (t.project, t.index, l, o, g, r) not in done]
    log.info("%d cells to run (%d already complete)", len(tasks), len(done))

    appender = _Appender(results_path)
    try:
        if workers == 1:
            warm_up()
            for n, task in enumerate(tasks, start=1):
                rec = run_cell(*task)
                appender.add(rec)
                done[rec.key] = rec
                log.debug("cell %d/%d done: %s", n, len(tasks), rec.key)
        else:
            with ProcessPoolExecutor(max_workers=workers, initializer=warm_up) as pool:
                futures = [pool.submit(_cell_task, task) for task in tasks]
                for fut in as_completed(futures):
                    rec = fut.result()
                    appender.add(rec)
                    done[rec.key] = rec
    finally:
        appender.close()

    order = {s.project: i for i, s in enumerate(series)}
    records = sorted(done.values(), key=_sort_key(config, order))
    write_results(results_path, records)
    return ExperimentResult(records, trans)


# -- analysis -----------------------------------------------------------------

@dataclass(frozen=True)
class RankResult:
    project: str
    transition: int
    learner: str
    goal: str
    ranks: dict
    medians: dict


def group_records(records) -> dict[tuple, list[RunRecord]]:
    """Group records by (project, transition, learner, goal), preserving input order."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.project, r.transition, r.learner, r.goal), []).append(r)
    return groups


def rank_transition(records, repeats: int | None = None, confidence: float = CONFIDENCE,
                    a12_threshold: float = A12_SMALL) -> RankResult:
    """Scott-Knott rank of the optimizers over the repeat scores of one transition."""
    records = list(records)
    if not records:
        raise ValueError("no records to rank")
    keys = {(r.project, r.transition, r.learner, r.goal) for r in records}
    if len(keys) != 1:
        raise ValueError("records span more than one (transition, learner, goal)")
    scores: dict[str, dict[int, float]] = {}
    for r in records:
        scores.setdefault(r.optimizer, {})[r.repeat] = r.test_score
    counts = {o: len(v) for o, v in scores.items()}
    expected = repeats if repeats is not None else max(counts.values())
    short = {o: c for o, c in counts.items() if c != expected}
    if short:
        raise ValueError(f"missing repeats (expected {expected}): {short}")
    samples = [TreatmentSamples(o, [v[k] for k in sorted(v)]) for o, v in scores.items()]
    ranks = scott_knott(samples, confidence=confidence, a12_threshold=a12_threshold)
    project, transition, learner, goal = keys.pop()
    return RankResult(project, transition, learner, goal, ranks,
                      {s.name: s.median for s in samples})


@dataclass(frozen=True)
class WinMatrix:
    optimizers: tuple
    # (learner, goal) -> {optimizer: rank-1 count}
    counts: dict
    # (learner, goal) -> number of transitions ranked
    totals: dict

    def rows(self) -> list[tuple]:
        return list(self.counts)

    def percent(self, learner: str, goal: str, optimizer: str) -> float:
        total = self.totals[(learner, goal)]
        return 100.0 * self.counts[(learner, goal)][optimizer] / total if total else 0.0


def aggregate(results, optimizers=None) -> WinMatrix:
    """Count first-rank finishes per (learner, goal, optimizer); co-winners all count."""
    results = list(results)
    if optimizers is None:
        optimizers = []
        for res in results:
            optimizers.extend(o for o in res.ranks if o not in optimizers)
    optimizers = tuple(optimizers)
    counts: dict[tuple, dict[str, int]] = {}
    totals: dict[tuple, int] = {}
    for res in results:
        row = counts.setdefault((res.learner, res.goal), dict.fromkeys(optimizers, 0))
        totals[(res.learner, res.goal)] = totals.get((res.learner, res.goal), 0) + 1
        for opt, rank in res.ranks.items():
            if rank == 1:
                row[opt] += 1
    return WinMatrix(optimizers, counts, totals)


def analyse(records, repeats: int | None = None) -> WinMatrix:
    records = list(records)
    optimizers = list(dict.fromkeys(r.optimizer for r in records))
    return aggregate([rank_transition(g, repeats) for g in group_records(records).values()],
                     optimizers)


def runtime_table(records) -> pd.DataFrame:
    """Mean seconds (tuning + final training) per repeat; optimizers by learners."""
    records = list(records)
    if not records:
        raise ValueError("no records for the runtime table")
    frame = pd.DataFrame({
        "optimizer": [r.optimizer for r in records],
        "learner": [r.learner for r in records],
        "seconds": [r.total_seconds for r in records],
    })
    table = frame.pivot_table(index="optimizer", columns="learner", values="seconds",
                              aggfunc="mean", sort=False)
    table.columns.name = None
    return table


def median_scores(records) -> pd.DataFrame:
    """Median test score per (learner, goal, optimizer) across transitions and repeats."""
    frame = pd.DataFrame([asdict(r) for r in records])
    if frame.empty:
        raise ValueError("no records")
    return frame.groupby(["learner", "goal", "optimizer"], sort=False)["test_score"].median()
