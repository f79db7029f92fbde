"""Binary CART trees whose edges carry feature predicates."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import kernels
from .dataset import Dataset, DatasetError, FeatureDomain
from .region import CategoricalRegion, IntervalRegion, Region, region_from_json

# Splits whose score falls below the parent's by more than this are refused;
# zero-gain splits are allowed so that XOR-like interactions can be found.
_MIN_GAIN = 1e-9


@dataclass(frozen=True)
class Predicate:
    """``feature in region``."""

    feature: str
    region: Region

    def holds(self, instance: Mapping[str, Any]) -> bool:
        try:
            value = instance[self.feature]
        except KeyError:
            raise KeyError(f"instance has no value for feature {self.feature!r}") from None
        return self.region.contains(value)

    def mask(self, ds: Dataset) -> np.ndarray:
        return self.region.mask(ds.column(self.feature))

    def complement(self) -> Predicate:
        return Predicate(self.feature, self.region.complement())

    def describe(self) -> str:
        return self.region.describe(self.feature)

    def to_json(self) -> dict:
        return {"feature": self.feature, **self.region.to_json()}

    @classmethod
    def from_json(cls, data: dict, domains: Mapping[str, FeatureDomain]) -> Predicate:
        dom = domains[data["feature"]]
        return cls(data["feature"], region_from_json(data, dom.values if dom.is_categorical else None))

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class Node:
    id: int
    depth: int
    parent: int | None
    counts: tuple[int, ...]
    split: Predicate | None = None
    true_child: int | None = None
    false_child: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.counts))


@dataclass(frozen=True, eq=False)
class DecisionTree:
    features: tuple[FeatureDomain, ...]
    target: FeatureDomain
    nodes: tuple[Node, ...]
    max_depth: int
    seed: int = 0

    @property
    def root(self) -> Node:
        return self.nodes[0]

    @property
    def classes(self) -> tuple:
        return self.target.values

    @property
    def domains(self) -> dict[str, FeatureDomain]:
        return {f.name: f for f in self.features}

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes if n.is_leaf]

    def children(self, node_id: int) -> tuple[int, int] | tuple[()]:
        n = self.nodes[node_id]
        return () if n.is_leaf else (n.true_child, n.false_child)

    def sibling(self, node_id: int) -> int:
        p = self.nodes[self.nodes[node_id].parent]
        return p.false_child if p.true_child == node_id else p.true_child

    def edge_predicate(self, child: int) -> Predicate:
        """Predicate labelling the edge from ``child``'s parent into ``child``."""
        node = self.nodes[child]
        parent = self.nodes[node.parent]
        return parent.split if parent.true_child == child else parent.split.complement()

    def path(self, node_id: int) -> list[int]:
        """Node ids from the root down to ``node_id``."""
        out = []
        cur: int | None = node_id
        while cur is not None:
            out.append(cur)
            cur = self.nodes[cur].parent
        return out[::-1]

    def is_ancestor(self, a: int, b: int) -> bool:
        """True iff ``a`` is a proper ancestor of ``b``."""
        cur = self.nodes[b].parent
        while cur is not None:
            if cur == a:
                return True
            cur = self.nodes[cur].parent
        return False

    def reachable_region(self, node_id: int, feature: str) -> Region:
        """Values of ``feature`` that can reach ``node_id`` from the root."""
        region = self.domains[feature].full_region()
        path = self.path(node_id)
        for child in path[1:]:
            pred = self.edge_predicate(child)
            if pred.feature == feature:
                region = region & pred.region
        return region

    def restricted_edge_predicate(self, child: int) -> Predicate:
        """Edge predicate narrowed by the constraints on the same feature above it."""
        pred = self.edge_predicate(child)
        return Predicate(pred.feature, self.reachable_region(child, pred.feature))

    def leaf_of(self, instance: Mapping[str, Any]) -> Node:
        node = self.root
        while not node.is_leaf:
            node = self.nodes[node.true_child if node.split.holds(instance) else node.false_child]
        return node

    def predict(self, instance: Mapping[str, Any]) -> Any:
        return self.classes[self.leaf_of(instance).prediction]

    def predict_codes(self, ds: Dataset) -> np.ndarray:
        """Vectorised prediction over a dataset, as class codes."""
        out = np.empty(len(ds), dtype=np.int64)
        stack = [(0, np.arange(len(ds)))]
        while stack:
            nid, rows = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                out[rows] = node.prediction
                continue
            m = node.split.region.mask(ds.column(node.split.feature)[rows])
            stack.append((node.true_child, rows[m]))
            stack.append((node.false_child, rows[~m]))
        return out

    def stats(self) -> dict:
        return tree_stats(self)

    def to_json(self) -> dict:
        nodes = []
        for n in self.nodes:
            d = {"id": n.id, "depth": n.depth, "parent": n.parent, "counts": list(n.counts)}
            if not n.is_leaf:
                d["split"] = n.split.to_json()
                d["true"] = n.true_child
                d["false"] = n.false_child
            nodes.append(d)
        return {
            "format": "xadg-tree/1",
            "features": [f.to_json() for f in self.features],
            "target": self.target.to_json(),
            "max_depth": self.max_depth,
            "seed": self.seed,
            "nodes": nodes,
        }

    @classmethod
    def from_json(cls, data: dict) -> DecisionTree:
        features = tuple(FeatureDomain.from_json(f) for f in data["features"])
        domains = {f.name: f for f in features}
        nodes = []
        for d in data["nodes"]:
            split = Predicate.from_json(d["split"], domains) if "split" in d else None
            nodes.append(
                Node(
                    id=d["id"],
                    depth=d["depth"],
                    parent=d["parent"],
                    counts=tuple(d["counts"]),
                    split=split,
                    true_child=d.get("true"),
                    false_child=d.get("false"),
                )
            )
        return cls(
            features,
            FeatureDomain.from_json(data["target"]),
            tuple(nodes),
            data["max_depth"],
            data.get("seed", 0),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> DecisionTree:
        return cls.from_json(json.loads(Path(path).read_text()))


def _best_split(X: np.ndarray, y: np.ndarray, features, n_classes: int):
    counts = np.bincount(y, minlength=n_classes).astype(np.int64)
    parent = float((counts * counts).sum()) / len(y)
    best, best_j, best_arg = -np.inf, -1, None
    for j, dom in enumerate(features):
        col = np.ascontiguousarray(X[:, j])
        if dom.is_categorical:
            score, arg = kernels.categorical_split(col.astype(np.int64), y, len(dom.values), n_classes)
        else:
            score, arg = kernels.numeric_split(col, y, n_classes)
        if score > best:
            best, best_j, best_arg = score, j, arg
    if best_j < 0 or best - parent < -_MIN_GAIN:
        return None
    dom = features[best_j]
    if dom.is_categorical:
        return Predicate(dom.name, CategoricalRegion.of([dom.values[int(best_arg)]], dom.values)), best_j
    return Predicate(dom.name, IntervalRegion.below(float(best_arg))), best_j


def fit(train: Dataset, max_depth: int, seed: int = 0) -> DecisionTree:
    """Grow a CART tree by greedy Gini minimisation.

    Categorical features are split one value against the rest, numeric
    features at midpoints between consecutive distinct values. Growth stops at
    ``max_depth``, on pure nodes, and when no split separates the rows.
    A split is taken even when it does not lower the impurity. Ties
    go to the lower feature index, then the lower value. ``seed`` is recorded
    for provenance; the learner itself is deterministic.
    """
    if len(train) == 0:
        raise DatasetError("cannot fit a tree on an empty training set")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    X, y = train.X, train.y
    n_classes = len(train.classes)
    nodes: list[Node | None] = []

    def grow(rows: np.ndarray, depth: int, parent: int | None) -> int:
        nid = len(nodes)
        nodes.append(None)
        counts = np.bincount(y[rows], minlength=n_classes)
        split = None
        if depth < max_depth and len(rows) >= 2 and np.count_nonzero(counts) > 1:
            split = _best_split(X[rows], y[rows], train.features, n_classes)
        if split is None:
            nodes[nid] = Node(nid, depth, parent, tuple(int(c) for c in counts))
            return nid
        pred, j = split
        m = pred.region.mask(X[rows, j])
        t = grow(rows[m], depth + 1, nid)
        f = grow(rows[~m], depth + 1, nid)
        nodes[nid] = Node(nid, depth, parent, tuple(int(c) for c in counts), pred, t, f)
        return nid

    grow(np.arange(len(train)), 0, None)
    return DecisionTree(train.features, train.target, tuple(nodes), max_depth, seed)


def tree_stats(dt: DecisionTree) -> dict:
    depths = [n.depth for n in dt.leaves()]
    return {
        "nodes": len(dt.nodes),
        "edges": len(dt.nodes) - 1,
        "leaves": len(depths),
        "depth": max(depths),
        "avg_path_length": float(np.mean(depths)),
    }
