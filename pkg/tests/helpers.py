"""Shared builders for the test suite."""

import os
from pathlib import Path

import numpy as np

from xadg.dataset import Dataset, FeatureDomain, load_dataset, Recipe
from xadg.dtree import DecisionTree, Node, Predicate
from xadg.region import CategoricalRegion

REPO = Path(__file__).resolve().parents[1]


def data_dir() -> Path:
    return Path(os.environ.get("XADG_DATA_DIR", REPO / "data"))


def load_cars() -> Dataset:
    d = data_dir()
    return load_dataset(d / "car.csv", recipe=Recipe.from_file(d / "recipes" / "cars.json"))


def synth(seed: int, max_features: int = 8, max_rows: int = 500) -> Dataset:
    """Random categorical data with a noisy linear class rule."""
    rng = np.random.default_rng(seed)
    nf = int(rng.integers(2, max_features + 1))
    n = int(rng.integers(60, max_rows + 1))
    k = int(rng.integers(2, 4))
    doms = [int(rng.integers(2, 5)) for _ in range(nf)]
    w = rng.normal(size=(nf, k))
    recs = []
    for _ in range(n):
        codes = [int(rng.integers(d)) for d in doms]
        score = sum(w[j] * codes[j] for j in range(nf)) + rng.normal(size=k)
        r = {f"f{j}": f"v{c}" for j, c in enumerate(codes)}
        r["y"] = f"c{int(np.argmax(score))}"
        recs.append(r)
    return Dataset.from_records(recs, "y")


def schema(domains: dict, classes=("A", "B")):
    feats = tuple(FeatureDomain(n, "categorical", tuple(v)) for n, v in domains.items())
    return feats, FeatureDomain("y", "categorical", tuple(classes))


def make_tree(features, target, spec) -> DecisionTree:
    """Hand-built tree.

    ``spec`` is a class label for a leaf or ``(feature, value, true_spec,
    false_spec)`` for a one-value-vs-rest split.
    """
    doms = {f.name: f for f in features}
    classes = target.values
    nodes: list = []

    def build(s, depth, parent):
        nid = len(nodes)
        nodes.append(None)
        if not isinstance(s, tuple):
            counts = tuple(1 if c == s else 0 for c in classes)
            nodes[nid] = Node(nid, depth, parent, counts)
            return nid, counts
        f, v, ts, fs = s
        t, tc = build(ts, depth + 1, nid)
        e, ec = build(fs, depth + 1, nid)
        counts = tuple(a + b for a, b in zip(tc, ec))
        pred = Predicate(f, CategoricalRegion.of([v], doms[f].values))
        nodes[nid] = Node(nid, depth, parent, counts, pred, t, e)
        return nid, counts

    build(spec, 0, None)
    depth = max(n.depth for n in nodes)
    return DecisionTree(tuple(features), target, tuple(nodes), max(depth, 1))


def all_instances(features):
    """Every combination of categorical values."""
    out = [{}]
    for f in features:
        out = [{**x, f.name: v} for x in out for v in f.values]
    return out


def grid_dataset(features, target) -> Dataset:
    inst = all_instances(features)
    X = np.array([[f.encode(x[f.name]) for f in features] for x in inst], dtype=float)
    return Dataset(tuple(features), target, X, np.zeros(len(inst), dtype=np.int64))
