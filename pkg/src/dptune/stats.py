"""Scott-Knott ranking of treatments with a bootstrap test and A12 effect size.

Treatments are sorted by mean and split recursively at the cut that maximizes
the between-group sum of squares.  A cut is kept only when the two sides differ
significantly (bootstrap) and non-trivially (A12 of the better side over the
worse side at least ``a12_threshold``).  Each final group shares one rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STATS_SEED = 20180101
RESAMPLES = 512
CONFIDENCE = 0.95
A12_SMALL = 0.6


@dataclass(frozen=True)
class TreatmentSamples:
    name: str
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError(f"treatment {self.name!r} has no values")
        if not all(np.isfinite(vals)):
            raise ValueError(f"treatment {self.name!r} has non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def median(self) -> float:
        return float(np.median(self.values))


def a12(xs, ys) -> float:
    """Vargha-Delaney A12: P(x > y) + 0.5 * P(x == y), by sorting ``ys``."""
    x = np.asarray(xs, dtype=float)
    y = np.sort(np.asarray(ys, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("a12 needs two non-empty samples")
    below = np.searchsorted(y, x, side="left")
    upto = np.searchsorted(y, x, side="right")
    gt = int(below.sum())
    eq = int((upto - below).sum())
    return (gt + 0.5 * eq) / (x.size * y.size)


def bootstrap_significant(xs, ys, resamples: int = RESAMPLES, confidence: float = CONFIDENCE,
                          rng: np.random.Generator | None = None) -> bool:
    """Two-sided bootstrap test of the mean difference under a pooled null."""
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    rng = rng if rng is not None else np.random.default_rng(STATS_SEED)
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    observed = abs(x.mean() - y.mean())
    pool = np.concatenate([x, y])
    bx = rng.choice(pool, size=(resamples, x.size), replace=True)
    by = rng.choice(pool, size=(resamples, y.size), replace=True)
    diffs = np.abs(bx.mean(axis=1) - by.mean(axis=1))
    # Guard against float noise making an identical difference look smaller.
    hits = np.count_nonzero(diffs >= observed - 1e-12 * max(1.0, observed))
    return hits / resamples < 1 - confidence


def _best_cut(groups):
    """Cut index maximizing the between-group sum of squares (None if no gain)."""
    vals = [np.asarray(g.values) for g in groups]
    n = np.array([v.size for v in vals], dtype=float)
    s = np.array([v.sum() for v in vals])
    total_mean = s.sum() / n.sum()
    best, cut = 0.0, None
    for i in range(1, len(groups)):
        n1, n2 = n[:i].sum(), n[i:].sum()
        m1, m2 = s[:i].sum() / n1, s[i:].sum() / n2
        ss = n1 * (m1 - total_mean) ** 2 + n2 * (m2 - total_mean) ** 2
        if ss > best + 1e-15:
            best, cut = ss, i
    return cut


def _flat(groups):
    return np.concatenate([np.asarray(g.values) for g in groups])


def scott_knott(treatments, confidence: float = CONFIDENCE, a12_threshold: float = A12_SMALL,
                resamples: int = RESAMPLES, seed: int = STATS_SEED) -> dict[str, int]:
    """Rank treatments (1 = best); treatments in one cluster share a rank."""
    items = [t if isinstance(t, TreatmentSamples) else TreatmentSamples(*t) for t in treatments]
    if not items:
        raise ValueError("scott_knott needs at least one treatment")
    names = [t.name for t in items]
    if len(set(names)) != len(names):
        raise ValueError("treatment names must be unique")
    # Mean descending; equal means keep input order.
    ordered = sorted(items, key=lambda t: -t.mean)
    rng = np.random.default_rng(seed)
    clusters: list[list[TreatmentSamples]] = []

    def recurse(groups):
        if len(groups) > 1 and np.ptp(_flat(groups)) > 0:
            cut = _best_cut(groups)
            if cut is not None:
                hi, lo = _flat(groups[:cut]), _flat(groups[cut:])
                if (a12(hi, lo) >= a12_threshold
                        and bootstrap_significant(hi, lo, resamples, confidence, rng)):
                    recurse(groups[:cut])
                    recurse(groups[cut:])
                    return
        clusters.append(groups)

    recurse(ordered)
    return {t.name: rank for rank, group in enumerate(clusters, start=1) for t in group}


def rank_table(treatments, **kw) -> list[tuple[str, int, float]]:
    """``(name, rank, median)`` rows sorted by rank, then by descending mean."""
    items = [t if isinstance(t, TreatmentSamples) else TreatmentSamples(*t) for t in treatments]
    ranks = scott_knott(items, **kw)
    items.sort(key=lambda t: (ranks[t.name], -t.mean))
    return [(t.name, ranks[t.name], t.median) for t in items]
