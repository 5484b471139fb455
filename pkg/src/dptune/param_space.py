"""Tunable parameter spaces: dimensions, defaults, sampling, grids and encoding.

The built-in spaces mirror the tuning ranges and defaults used for the four
defect-prediction learners (CART, KNN, SVM, RF).  Spaces are immutable and carry
no random state; every sampling call takes an explicit ``numpy`` generator.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CATEGORICAL = "categorical"
INTEGER = "integer"
CONTINUOUS = "continuous"
KINDS = (CATEGORICAL, INTEGER, CONTINUOUS)


class _Auto:
    """Sentinel for defaults such as ``None``/``'auto'`` that a learner resolves."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "auto"

    def __reduce__(self):
        return (_Auto, ())


AUTO = _Auto()


class SpaceError(ValueError):
    """Raised for malformed spaces or settings that do not fit a space."""


@dataclass(frozen=True)
class ParamDim:
    name: str
    kind: str
    lo: float | None = None
    hi: float | None = None
    values: tuple = ()
    default: object = AUTO

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpaceError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            object.__setattr__(self, "values", tuple(self.values))
            if not self.values:
                raise SpaceError(f"{self.name}: categorical value list is empty")
            if len(set(self.values)) != len(self.values):
                raise SpaceError(f"{self.name}: duplicate categorical values")
        else:
            if self.lo is None or self.hi is None:
                raise SpaceError(f"{self.name}: numeric dims need lo and hi")
            if self.lo > self.hi:
                raise SpaceError(f"{self.name}: lo > hi")
            if self.kind == INTEGER:
                object.__setattr__(self, "lo", int(self.lo))
                object.__setattr__(self, "hi", int(self.hi))
            else:
                object.__setattr__(self, "lo", float(self.lo))
                object.__setattr__(self, "hi", float(self.hi))
        if self.default is not AUTO and not self._default_ok(self.default):
            raise SpaceError(f"{self.name}: illegal default {self.default!r}")

    def _default_ok(self, value):
        # Numeric defaults may sit outside the tuning range (SVM coef0 is 0.0
        # with range [0.1, 1.0]); only the type is checked.
        if self.kind == CATEGORICAL:
            return value in self.values
        if isinstance(value, bool):
            return False
        if self.kind == INTEGER:
            return isinstance(value, (int, np.integer))
        return isinstance(value, (int, float, np.integer, np.floating))

    def contains(self, value) -> bool:
        if self.kind == CATEGORICAL:
            return value in self.values
        if value is AUTO or isinstance(value, bool):
            return False
        if self.kind == INTEGER:
            if not isinstance(value, (int, np.integer)):
                return False
        elif not isinstance(value, (int, float, np.integer, np.floating)):
            return False
        return self.lo <= value <= self.hi

    def sample(self, rng: np.random.Generator):
        if self.kind == CATEGORICAL:
            return self.values[int(rng.integers(len(self.values)))]
        if self.kind == INTEGER:
            return int(rng.integers(self.lo, self.hi + 1))
        return float(rng.uniform(self.lo, self.hi))

    def grid_values(self, points: int) -> list:
        if self.kind == CATEGORICAL:
            return list(self.values)
        raw = np.linspace(self.lo, self.hi, points)
        if self.kind == CONTINUOUS:
            return [float(v) for v in raw]
        out = []
        for v in raw:
            iv = int(math.floor(v + 0.5))
            if iv not in out:
                out.append(iv)
        return out

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind}
        if self.kind == CATEGORICAL:
            out["values"] = list(self.values)
        else:
            out["lo"], out["hi"] = self.lo, self.hi
        out["default"] = None if self.default is AUTO else self.default
        return out


class ParamSetting(Mapping):
    """Immutable, hashable assignment of one value per dimension name."""

    __slots__ = ("_items",)

    def __init__(self, assignments=(), **kw):
        items = dict(assignments)
        items.update(kw)
        self._items = tuple(items.items())

    def __getitem__(self, key):
        for k, v in self._items:
            if k == key:
                return v
        raise KeyError(key)

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return hash(frozenset((k, _hashable(v)) for k, v in self._items))

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return dict(self) == dict(other)
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self._items)
        return f"ParamSetting({inner})"

    def replace(self, **kw) -> "ParamSetting":
        d = dict(self._items)
        d.update(kw)
        return ParamSetting(d)

    def to_json(self) -> str:
        """Compact JSON with ``Auto`` written as ``null``; keys keep dim order."""
        d = {k: (None if v is AUTO else v) for k, v in self._items}
        return json.dumps(d, separators=(",", ":"))


def _hashable(v):
    return v if not isinstance(v, list) else tuple(v)


@dataclass(frozen=True)
class ParamSpace:
    learner: str
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise SpaceError(f"{self.learner}: duplicate dim names")

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    def dim(self, name: str) -> ParamDim:
        for d in self.dims:
            if d.name == name:
                return d
        raise KeyError(name)

    def validate(self, setting: Mapping, allow_defaults: bool = False) -> None:
        """Raise :class:`SpaceError` unless `setting` assigns a legal value to every dim.

        With `allow_defaults`, a dim's declared default (``AUTO`` included) is
        accepted even when it lies outside the tuning range.
        """
        if set(setting) != set(self.names):
            missing = set(self.names) - set(setting)
            extra = set(setting) - set(self.names)
            raise SpaceError(f"{self.learner}: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for d in self.dims:
            v = setting[d.name]
            if allow_defaults and (v is d.default or (v is not AUTO and v == d.default)):
                continue
            if not d.contains(v):
                raise SpaceError(f"{self.learner}.{d.name}: {v!r} outside the tuning range")

    def is_legal(self, setting: Mapping) -> bool:
        try:
            self.validate(setting)
        except SpaceError:
            return False
        return True

    def with_defaults(self, **defaults) -> "ParamSpace":
        dims = []
        for d in self.dims:
            if d.name in defaults:
                d = ParamDim(d.name, d.kind, d.lo, d.hi, d.values, defaults[d.name])
            dims.append(d)
        return ParamSpace(self.learner, dims)

    def to_json(self) -> dict:
        return {"learner": self.learner, "dims": [d.to_json() for d in self.dims]}


def default_setting(space: ParamSpace) -> ParamSetting:
    return ParamSetting((d.name, d.default) for d in space.dims)


def sample(space: ParamSpace, rng: np.random.Generator) -> ParamSetting:
    """Draw each dimension independently and uniformly over its range."""
    return ParamSetting((d.name, d.sample(rng)) for d in space.dims)


def grid(space: ParamSpace, points_per_numeric_dim: int = 5) -> list[ParamSetting]:
    """Enumerate the Cartesian grid, row-major over the dimension order.

    Numeric dims get `points_per_numeric_dim` evenly spaced values (endpoints
    included); integer dims are rounded and deduplicated.
    """
    if points_per_numeric_dim < 2:
        raise SpaceError("points_per_numeric_dim must be >= 2")
    axes = [d.grid_values(points_per_numeric_dim) for d in space.dims]
    return [ParamSetting(zip(space.names, combo)) for combo in itertools.product(*axes)]


def grid_size(space: ParamSpace, points_per_numeric_dim: int = 5) -> int:
    return math.prod(len(d.grid_values(points_per_numeric_dim)) for d in space.dims)


def encode(space: ParamSpace, setting: Mapping) -> np.ndarray:
    """Map a setting onto [0, 1]^d for surrogate models.

    Numeric values are min-max scaled and saturate at the bounds (so resolved
    defaults outside the tuning range, or an unbounded depth, stay finite).
    Categorical values map to index / (n_values - 1).
    """
    out = np.empty(len(space.dims))
    for i, d in enumerate(space.dims):
        v = setting[d.name]
        if v is AUTO or v is None:
            raise SpaceError(f"{d.name}: cannot encode an unresolved auto value")
        if d.kind == CATEGORICAL:
            n = len(d.values)
            out[i] = 0.0 if n == 1 else d.values.index(v) / (n - 1)
        elif d.hi == d.lo:
            out[i] = 0.0
        else:
            out[i] = min(1.0, max(0.0, (float(v) - d.lo) / (d.hi - d.lo)))
    return out


def decode(space: ParamSpace, vector) -> ParamSetting:
    """Inverse of :func:`encode` for in-range values (integers and categories are rounded)."""
    vals = []
    for d, x in zip(space.dims, vector):
        x = min(1.0, max(0.0, float(x)))
        if d.kind == CATEGORICAL:
            n = len(d.values)
            vals.append(d.values[int(math.floor(x * (n - 1) + 0.5))])
        elif d.kind == INTEGER:
            vals.append(int(math.floor(d.lo + x * (d.hi - d.lo) + 0.5)))
        else:
            vals.append(d.lo + x * (d.hi - d.lo))
    return ParamSetting(zip(space.names, vals))


def cart_space() -> ParamSpace:
    return ParamSpace("cart", [
        ParamDim("criterion", CATEGORICAL, values=("gini", "entropy"), default="gini"),
        ParamDim("max_features", CONTINUOUS, 0.1, 1.0, default=AUTO),
        ParamDim("min_samples_split", INTEGER, 2, 30, default=2),
        ParamDim("min_samples_leaf", INTEGER, 1, 21, default=1),
        ParamDim("max_depth", INTEGER, 1, 21, default=AUTO),
    ])


def knn_space() -> ParamSpace:
    return ParamSpace("knn", [
        ParamDim("n_neighbors", INTEGER, 2, 10, default=5),
        ParamDim("weights", CATEGORICAL, values=("uniform", "distance"), default="uniform"),
    ])


def svm_space() -> ParamSpace:
    return ParamSpace("svm", [
        ParamDim("C", CONTINUOUS, 1.0, 100.0, default=1.0),
        ParamDim("kernel", CATEGORICAL, values=("rbf", "sigmoid"), default="rbf"),
        ParamDim("coef0", CONTINUOUS, 0.1, 1.0, default=0.0),
        ParamDim("gamma", CONTINUOUS, 0.1, 1.0, default=AUTO),
    ])


def rf_space() -> ParamSpace:
    return ParamSpace("rf", [
        ParamDim("criterion", CATEGORICAL, values=("gini", "entropy"), default="entropy"),
        ParamDim("max_features", CONTINUOUS, 0.1, 1.0, default=AUTO),
        ParamDim("min_samples_split", INTEGER, 2, 30, default=2),
        ParamDim("min_samples_leaf", INTEGER, 1, 21, default=1),
        ParamDim("n_estimators", INTEGER, 10, 100, default=10),
    ])


_BUILTIN = {"cart": cart_space, "knn": knn_space, "svm": svm_space, "rf": rf_space}
LEARNERS = tuple(_BUILTIN)


def builtin_space(learner: str) -> ParamSpace:
    try:
        return _BUILTIN[learner]()
    except KeyError:
        raise SpaceError(f"unknown learner {learner!r}; expected one of {LEARNERS}") from None


def _dim_from_json(entry: Mapping) -> ParamDim:
    try:
        name, kind = entry["name"], entry["kind"]
    except KeyError as exc:
        raise SpaceError(f"dimension entry missing field {exc.args[0]!r}") from None
    default = entry.get("default")
    if default is None or (default == "auto" and kind != CATEGORICAL):
        default = AUTO
    elif kind == INTEGER and isinstance(default, float) and default.is_integer():
        default = int(default)
    return ParamDim(name, kind, entry.get("lo"), entry.get("hi"),
                    tuple(entry.get("values") or ()), default)


def space_from_json(obj, learner: str | None = None) -> ParamSpace:
    """Build a space from ``{"learner": ..., "dims": [...]}`` or a bare list of dims."""
    if isinstance(obj, list):
        dims = obj
    else:
        dims = obj.get("dims", [])
        learner = obj.get("learner", learner)
    if learner is None:
        raise SpaceError("space definition does not name its learner")
    return ParamSpace(learner, [_dim_from_json(e) for e in dims])


def load_space(path, learner: str | None = None) -> ParamSpace:
    with open(Path(path), encoding="utf-8") as fh:
        return space_from_json(json.load(fh), learner)
