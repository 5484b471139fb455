import json

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from dptune.data import (
    METRICS, DataError, ProjectSeries, Release, load_manifest, load_release, split_release,
    transition_pairs, write_release,
)
from dptune.learners import TrainSet


def frame(n=5, bug=None, seed=0):
    rng = np.random.default_rng(seed)
    df = pd.DataFrame(rng.integers(0, 50, size=(n, len(METRICS))), columns=METRICS)
    df.insert(0, "version", "1.0")
    df.insert(0, "name", [f"C{i}" for i in range(n)])
    df["bug"] = bug if bug is not None else rng.integers(0, 3, n)
    return df


def release(n, seed=0):
    rng = np.random.default_rng(seed)
    return Release("p", "1", TrainSet(rng.normal(size=(n, 3)), rng.integers(0, 2, n)))


def test_metric_schema():
    assert len(METRICS) == 20 and len(set(METRICS)) == 20
    assert {"loc", "wmc", "cbo", "lcom3", "avg_cc", "max_cc"} <= set(METRICS)


def test_binarization(tmp_path):
    path = tmp_path / "r.csv"
    frame(4, bug=[2, 0, 1, 0]).to_csv(path, index=False)
    rel = load_release(path)
    assert rel.instances.labels.tolist() == [1, 0, 1, 0]
    assert rel.instances.features.shape == (4, 20)
    assert rel.version == "1.0"


@pytest.mark.parametrize("label", ["bug", "bugs", "defects"])
def test_label_column_names(tmp_path, label):
    df = frame(3, bug=[0, 3, 0]).rename(columns={"bug": label})
    df.to_csv(tmp_path / "r.csv", index=False)
    assert load_release(tmp_path / "r.csv").instances.labels.tolist() == [0, 1, 0]


def test_identifier_columns_are_optional(tmp_path):
    frame(3).drop(columns=["name", "version"]).to_csv(tmp_path / "r.csv", index=False)
    rel = load_release(tmp_path / "r.csv", project="x")
    assert (rel.project, rel.version) == ("x", "r")


def test_missing_metric_is_named(tmp_path):
    frame().drop(columns=["loc"]).to_csv(tmp_path / "r.csv", index=False)
    with pytest.raises(DataError, match="loc"):
        load_release(tmp_path / "r.csv")


def test_missing_label_column(tmp_path):
    frame().drop(columns=["bug"]).to_csv(tmp_path / "r.csv", index=False)
    with pytest.raises(DataError, match="defect column"):
        load_release(tmp_path / "r.csv")


def test_non_numeric_rows_reported(tmp_path):
    df = frame(5).astype({"cbo": object})
    df.loc[3, "cbo"] = "n/a"
    df.to_csv(tmp_path / "r.csv", index=False)
    with pytest.raises(DataError, match="line\\(s\\) 5"):
        load_release(tmp_path / "r.csv")


def test_missing_cells_reported(tmp_path):
    df = frame(4).astype({"wmc": object})
    df.loc[0, "wmc"] = ""
    df.to_csv(tmp_path / "r.csv", index=False)
    with pytest.raises(DataError, match="2"):
        load_release(tmp_path / "r.csv")


def test_unexpected_trailing_column(tmp_path):
    df = frame(3)
    df["comment"] = "x"
    df.to_csv(tmp_path / "r.csv", index=False)
    with pytest.raises(DataError, match="comment"):
        load_release(tmp_path / "r.csv")


def test_empty_file(tmp_path):
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(DataError, match="empty"):
        load_release(tmp_path / "e.csv")
    (tmp_path / "h.csv").write_text(",".join(METRICS + ("bug",)) + "\n")
    with pytest.raises(DataError, match="no data rows"):
        load_release(tmp_path / "h.csv")


def test_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    rel = Release("p", "2.0", TrainSet(rng.lognormal(size=(30, 20)), rng.integers(0, 2, 30)))
    write_release(rel, tmp_path / "r.csv")
    back = load_release(tmp_path / "r.csv", project="p")
    assert np.array_equal(back.instances.features, rel.instances.features)
    assert np.array_equal(back.instances.labels, rel.instances.labels)
    assert back.version == "2.0"


@pytest.mark.parametrize("n,sizes", [(300, (200, 100)), (10, (7, 3)), (3, (2, 1))])
def test_split_sizes(n, sizes):
    sp = split_release(release(n), np.random.default_rng(0))
    assert (len(sp.tune_train), len(sp.tune_validate)) == sizes


@given(st.integers(3, 400), st.integers(0, 1000))
def test_split_partitions(n, seed):
    sp = split_release(release(n), np.random.default_rng(seed))
    idx = np.concatenate([sp.train_index, sp.validate_index])
    assert sorted(idx.tolist()) == list(range(n))
    assert len(sp.train_index) == -(-2 * n // 3)
    assert abs(len(sp.train_index) - 2 * len(sp.validate_index)) <= 2


def test_split_determinism_and_error():
    a = split_release(release(50), np.random.default_rng(4))
    b = split_release(release(50), np.random.default_rng(4))
    assert np.array_equal(a.train_index, b.train_index)
    with pytest.raises(DataError):
        split_release(release(2), np.random.default_rng(0))


def test_series_needs_three_distinct_releases():
    rels = [Release("p", str(i), release(5).instances) for i in range(3)]
    series = ProjectSeries("p", rels)
    pairs = transition_pairs(series)
    assert [(a.version, b.version) for a, b in pairs] == [("0", "1"), ("1", "2")]
    with pytest.raises(DataError):
        ProjectSeries("p", rels[:1])
    with pytest.raises(DataError):
        ProjectSeries("p", [rels[0], rels[1], rels[0]])


def test_transition_count_scales():
    rels = [Release("p", str(i), release(5).instances) for i in range(6)]
    assert len(transition_pairs(ProjectSeries("p", rels))) == 5


def test_manifest_resolution(tmp_path):
    sub = tmp_path / "data"
    sub.mkdir()
    for v in ("1", "2", "3"):
        frame(6, seed=int(v)).to_csv(sub / f"p-{v}.csv", index=False)
    (tmp_path / "m.json").write_text(json.dumps({"p": [f"data/p-{v}.csv" for v in "123"]}))
    (series,) = load_manifest(tmp_path / "m.json")
    assert series.project == "p"
    assert [r.version for r in series.releases] == ["p-1", "p-2", "p-3"]


@pytest.mark.parametrize("content", ["{", "[]", "{}", '{"p": "a.csv"}'])
def test_bad_manifest(tmp_path, content):
    (tmp_path / "m.json").write_text(content)
    with pytest.raises(DataError):
        load_manifest(tmp_path / "m.json")


def test_missing_manifest(tmp_path):
    with pytest.raises(DataError):
        load_manifest(tmp_path / "nope.json")
