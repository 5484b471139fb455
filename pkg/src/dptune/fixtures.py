"""Deterministic synthetic defect corpora for desk-scale end-to-end runs.

Two miniature projects with three releases each.  A project is a pool of 150
classes; release k holds the first 100, 125 or 150 of them, every metric
jittered by about 3% and 4% of labels flipped, so classes persist across
releases the way they do in real code bases.

Only three metrics carry signal.  The other seventeen are nuisance metrics
that correlate with one another but not with defects.

* ``alpha``: defect odds rise smoothly with size (``loc``) and coupling
  (``cbo``), a logistic signal.
* ``beta``: a class is defective when it is both highly coupled (``cbo``) and
  poorly cohesive (``lcom3``).  That conjunction needs a tree of depth two, so
  the bundled ``cart_depth1.json`` space, whose default pins ``max_depth = 1``,
  leaves an untuned CART well short of what tuning reaches.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .data import METRICS, Release, write_release
from .learners import TrainSet
from .param_space import cart_space

FIXTURE_SEED = 7
RELEASE_SIZES = {"alpha": (100, 125, 150), "beta": (100, 125, 150)}
CRIPPLED_SPACE = "cart_depth1.json"
JITTER = 0.03
FLIP_RATE = 0.04


def _nuisance_metrics(rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    """Plausible CK/OO metric columns driven by latents unrelated to defects."""
    size = rng.normal(0.0, 1.0, n)
    coupling = rng.normal(0.0, 1.0, n)
    cohesion = rng.normal(0.0, 1.0, n)
    loc = np.round(np.exp(5.0 + 0.9 * size)) + 1
    wmc = rng.poisson(np.exp(1.8 + 0.6 * size))
    m = {
        "loc": loc,
        "wmc": wmc.astype(float),
        "dit": rng.integers(1, 6, n).astype(float),
        "noc": rng.poisson(0.4, n).astype(float),
        "cbo": np.round(np.exp(1.6 + 0.7 * coupling)),
        "ce": np.round(np.exp(1.2 + 0.6 * coupling + 0.2 * rng.normal(size=n))),
        "ca": rng.poisson(np.exp(0.8 + 0.3 * coupling)).astype(float),
        "rfc": wmc + rng.poisson(np.exp(2.0 + 0.5 * size + 0.3 * coupling)),
        "lcom": np.round(np.exp(1.5 + 0.8 * size + 0.3 * rng.normal(size=n))),
        "lcom3": np.clip(1.0 + 0.35 * cohesion, 0.0, 2.0),
        "npm": np.round(wmc * rng.uniform(0.4, 0.9, n)),
        "dam": rng.uniform(0, 1, n),
        "moa": rng.poisson(1.0, n).astype(float),
        "mfa": rng.uniform(0, 1, n),
        "cam": np.clip(0.6 - 0.15 * size + 0.1 * rng.normal(size=n), 0.05, 1.0),
        "ic": rng.poisson(0.5, n).astype(float),
        "cbm": rng.poisson(0.7, n).astype(float),
        "max_cc": np.round(np.exp(1.0 + 0.4 * size + 0.3 * rng.normal(size=n))),
    }
    m["amc"] = loc / np.maximum(wmc, 1)
    m["avg_cc"] = np.round(m["max_cc"] * rng.uniform(0.3, 0.8, n), 4)
    return m


def _class_pool(project: str, rng: np.random.Generator, n: int):
    """Metrics and clean labels for the `n` classes of one project."""
    m = _nuisance_metrics(rng, n)
    size, coupling, cohesion = (rng.normal(0.0, 1.0, n) for _ in range(3))
    m["loc"] = np.round(np.exp(5.0 + 0.9 * size)) + 1
    m["cbo"] = np.round(np.exp(1.6 + 0.7 * coupling))
    m["lcom3"] = np.clip(1.0 + 0.35 * cohesion, 0.0, 2.0)
    if project == "alpha":
        logit = 2.5 * (size + coupling - 0.4)
        defective = rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-logit))
    else:
        defective = (m["cbo"] >= 6) & (m["lcom3"] >= 1.1)
    return np.column_stack([m[c] for c in METRICS]), defective


def generate_corpus(seed: int = FIXTURE_SEED) -> dict[str, list[Release]]:
    root = np.random.SeedSequence(seed)
    corpus = {}
    for project, child in zip(sorted(RELEASE_SIZES), root.spawn(len(RELEASE_SIZES))):
        rng = np.random.default_rng(child)
        sizes = RELEASE_SIZES[project]
        pool_x, pool_y = _class_pool(project, rng, max(sizes))
        releases = []
        for i, n in enumerate(sizes):
            x = pool_x[:n] * np.exp(rng.normal(0.0, JITTER, (n, len(METRICS))))
            y = pool_y[:n] ^ (rng.uniform(size=n) < FLIP_RATE)
            releases.append(Release(project, f"{project}-{i + 1}.0", TrainSet(x, y.astype(int))))
        corpus[project] = releases
    return corpus


def crippled_cart_space():
    return cart_space().with_defaults(max_depth=1)


def write_fixtures(out_dir, seed: int = FIXTURE_SEED) -> Path:
    """Write the CSVs, ``manifest.json`` and the crippled CART space into `out_dir`.

    Returns the manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for project, releases in generate_corpus(seed).items():
        files = []
        for rel in releases:
            name = f"{rel.version}.csv"
            write_release(rel, out / name)
            files.append(name)
        manifest[project] = files
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    (out / CRIPPLED_SPACE).write_text(
        json.dumps(crippled_cart_space().to_json(), indent=2) + "\n", encoding="utf-8")
    return path
