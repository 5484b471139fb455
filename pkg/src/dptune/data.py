"""Defect-data ingestion: release CSVs, project series, holdout splits.

A release CSV carries the 20 object-oriented metrics below plus a defect
count (``bug``, ``bugs`` or ``defects``), optionally preceded by identifier
columns such as ``name`` and ``version``.  Counts are binarized to
defective = (count > 0).  Release order comes from a JSON manifest mapping
each project to its ordered list of CSV paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .learners import TrainSet

METRICS = (
    "wmc", "dit", "noc", "cbo", "rfc", "lcom", "ca", "ce", "npm", "lcom3",
    "loc", "dam", "moa", "mfa", "cam", "ic", "cbm", "amc", "max_cc", "avg_cc",
)
LABEL_COLUMNS = ("bug", "bugs", "defects")
ID_COLUMNS = ("name", "version", "project")


class DataError(ValueError):
    """Raised for malformed defect CSVs or manifests."""


@dataclass(frozen=True)
class Release:
    project: str
    version: str
    instances: TrainSet

    def __len__(self):
        return len(self.instances)


@dataclass(frozen=True)
class ProjectSeries:
    project: str
    releases: tuple

    def __post_init__(self):
        object.__setattr__(self, "releases", tuple(self.releases))
        if len(self.releases) < 3:
            raise DataError(f"project {self.project!r} needs at least three releases, "
                            f"got {len(self.releases)}")
        versions = [r.version for r in self.releases]
        if len(set(versions)) != len(versions):
            raise DataError(f"project {self.project!r} lists a release version twice")


@dataclass(frozen=True)
class SplitPair:
    tune_train: TrainSet
    tune_validate: TrainSet
    train_index: np.ndarray
    validate_index: np.ndarray


def _id_column(col: str) -> bool:
    return col in ID_COLUMNS or col.startswith("name")


def load_release(path, project: str | None = None, version: str | None = None) -> Release:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: file is empty") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    cols = [c.strip() for c in frame.columns]
    frame.columns = [c.lower() for c in cols]
    if frame.empty:
        raise DataError(f"{path}: no data rows")
    missing = [m for m in METRICS if m not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing metric column(s) {', '.join(missing)}")
    labels = [c for c in LABEL_COLUMNS if c in frame.columns]
    if not labels:
        raise DataError(f"{path}: missing defect column (expected one of {', '.join(LABEL_COLUMNS)})")
    first_metric = min(list(frame.columns).index(m) for m in METRICS)
    for i, col in enumerate(frame.columns):
        if col in METRICS or col == labels[0]:
            continue
        if not (i < first_metric and _id_column(col)):
            raise DataError(f"{path}: unexpected column {col!r}")
    wanted = list(METRICS) + [labels[0]]
    numeric = frame[wanted].apply(lambda s: pd.to_numeric(s.str.strip(), errors="coerce"))
    bad = numeric.isna().any(axis=1) | ~np.isfinite(numeric.to_numpy(dtype=float)).all(axis=1)
    if bad.any():
        # Header is line 1, so data row i sits on line i + 2.
        lines = ", ".join(str(i + 2) for i in np.nonzero(bad.to_numpy())[0][:10])
        raise DataError(f"{path}: non-numeric or missing values on line(s) {lines}")
    # to_numeric can be off by an ulp; float() parses round-trip exact.
    exact = frame[wanted].apply(lambda s: s.str.strip().astype(float))
    x = exact[list(METRICS)].to_numpy(dtype=float)
    counts = exact[labels[0]].to_numpy(dtype=float)
    if version is None:
        version = frame["version"].iloc[0] if "version" in frame.columns else path.stem
    return Release(project or path.stem, str(version), TrainSet(x, (counts > 0).astype(int)))


def write_release(release: Release, path) -> None:
    """Write a release in the ingest schema (labels written as 0/1 counts)."""
    frame = pd.DataFrame(release.instances.features, columns=METRICS)
    frame.insert(0, "version", release.version)
    frame.insert(0, "name", release.project)
    frame["bug"] = release.instances.labels.astype(int)
    frame.to_csv(path, index=False, float_format="%.17g")


def load_manifest(path) -> list[ProjectSeries]:
    """Read ``{project: [csv, ...]}``; relative paths resolve against the manifest's folder."""
    path = Path(path)
    try:
        listing = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"manifest {path} not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path}: {exc}") from None
    if not isinstance(listing, dict) or not listing:
        raise DataError(f"manifest {path}: expected a non-empty object of project -> CSV list")
    series = []
    for project, files in listing.items():
        if not isinstance(files, list):
            raise DataError(f"manifest {path}: {project!r} must map to a list of CSV paths")
        releases = [load_release(path.parent / f, project=project, version=Path(f).stem)
                    for f in files]
        series.append(ProjectSeries(project, releases))
    return series


def split_release(release: Release, rng: np.random.Generator) -> SplitPair:
    """Shuffle, then the first ceil(2n/3) rows tune models and the rest validate them."""
    n = len(release)
    if n < 3:
        raise DataError(f"{release.project} {release.version}: need >= 3 rows to split, got {n}")
    perm = rng.permutation(n)
    cut = math.ceil(2 * n / 3)
    tr, va = perm[:cut], perm[cut:]
    data = release.instances
    return SplitPair(data.subset(tr), data.subset(va), tr, va)


def transition_pairs(series: ProjectSeries) -> list[tuple[Release, Release]]:
    return list(zip(series.releases[:-1], series.releases[1:]))
