"""Classification by grounded semantics over the activated sub-framework."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import kernels
from .adg import Adg
from .af import Framework, Label, Labelling, grounded_labelling
from .dataset import Dataset
from .dtree import DecisionTree
from .extended import DnfSupport, Xadg, lift

DECIDED = "decided"
FALLBACK = "undecided-fallback"


def _as_xadg(g: Xadg | Adg) -> Xadg:
    return lift(g) if isinstance(g, Adg) else g


def eval_support(s: DnfSupport, x: Mapping[str, Any]) -> bool:
    return s.holds(x)


def activated_subframework(g: Xadg | Adg, x: Mapping[str, Any]) -> Framework:
    g = _as_xadg(g)
    active = [a.id for a in g.arguments if a.support.holds(x)]
    return Framework(tuple(a.id for a in g.arguments), g.attacks).restrict(active)


@dataclass(frozen=True)
class ClassificationResult:
    prediction: Any
    status: str
    accepted: frozenset
    labelling: Labelling

    @property
    def decided(self) -> bool:
        return self.status == DECIDED


def classify(g: Xadg | Adg, x: Mapping[str, Any], fallback: Any = None) -> ClassificationResult:
    g = _as_xadg(g)
    af = activated_subframework(g, x)
    lab = grounded_labelling(af)
    accepted = lab.in_args
    concl = {a.conclusion for a in g.arguments if a.id in accepted and a.is_predictive}
    if len(concl) == 1:
        return ClassificationResult(next(iter(concl)), DECIDED, accepted, lab)
    return ClassificationResult(fallback, FALLBACK, accepted, lab)


def activation_matrix(g: Xadg, ds: Dataset) -> np.ndarray:
    """``(len(ds), n_args)`` boolean matrix of support truth values."""
    out = np.empty((len(ds), len(g.arguments)), dtype=bool)
    for j, a in enumerate(g.arguments):
        out[:, j] = a.support.mask(ds)
    return out


def label_batch(g: Xadg, ds: Dataset) -> np.ndarray:
    """Grounded label codes (see :mod:`xadg.kernels`) per instance and argument."""
    index = {a.id: j for j, a in enumerate(g.arguments)}
    indptr, targets = kernels.to_csr(len(index), [(index[a], index[b]) for a, b in g.attacks])
    return kernels.grounded_batch(activation_matrix(g, ds), indptr, targets)


def predict_codes(g: Xadg | Adg, ds: Dataset, fallback: int = -1) -> np.ndarray:
    """Class codes for every instance of ``ds``; ``fallback`` where undecided."""
    g = _as_xadg(g)
    classes = list(ds.classes)
    n = len(ds)
    if not g.arguments or n == 0:
        return np.full(n, fallback, dtype=np.int64)
    labels = label_batch(g, ds)
    accepted = labels == kernels.IN
    has = np.zeros((n, len(classes)), dtype=bool)
    for j, a in enumerate(g.arguments):
        if a.is_predictive:
            k = classes.index(a.conclusion) if a.conclusion in classes else None
            if k is None:
                raise ValueError(f"conclusion {a.conclusion!r} is not a class of the dataset")
            has[:, k] |= accepted[:, j]
    decided = has.sum(axis=1) == 1
    return np.where(decided, np.argmax(has, axis=1), fallback).astype(np.int64)


@dataclass(frozen=True)
class EquivalenceReport:
    agree: int
    disagree: list
    undecided: int

    @property
    def total(self) -> int:
        return self.agree + len(self.disagree)

    @property
    def rate(self) -> float:
        return 1.0 if self.total == 0 else self.agree / self.total


def equivalence_report(dt: DecisionTree, g: Xadg | Adg, ds: Dataset) -> EquivalenceReport:
    """Compare graph and tree on every instance; ``disagree`` is (index, tree, graph)."""
    expected = dt.predict_codes(ds)
    got = predict_codes(g, ds, fallback=-1)
    classes = ds.classes
    bad = np.flatnonzero(expected != got)
    disagree = [
        (int(i), classes[expected[i]], None if got[i] < 0 else classes[got[i]]) for i in bad
    ]
    return EquivalenceReport(len(ds) - len(bad), disagree, int((got < 0).sum()))


def classify_dataset(g: Xadg | Adg, ds: Dataset, fallback: Any) -> list[dict]:
    """Per-instance predictions with status and accepted arguments."""
    g = _as_xadg(g)
    labels = label_batch(g, ds) if g.arguments else np.zeros((len(ds), 0), dtype=np.int8)
    codes = predict_codes(g, ds, fallback=-1)
    ids = [a.id for a in g.arguments]
    rows = []
    for i in range(len(ds)):
        code = int(codes[i])
        rows.append(
            {
                "index": i,
                "prediction": fallback if code < 0 else ds.classes[code],
                "status": FALLBACK if code < 0 else DECIDED,
                "accepted": [ids[j] for j in np.flatnonzero(labels[i] == kernels.IN)],
            }
        )
    return rows


def write_predictions(rows: list[dict], path: str | Path, fmt: str = "csv") -> None:
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(rows, indent=1, default=str) + "\n")
        return
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "prediction", "status", "accepted"])
        for r in rows:
            w.writerow([r["index"], r["prediction"], r["status"], " ".join(f"a{a}" for a in r["accepted"])])


__all__ = [
    "ClassificationResult",
    "DECIDED",
    "EquivalenceReport",
    "FALLBACK",
    "Label",
    "activated_subframework",
    "activation_matrix",
    "classify",
    "classify_dataset",
    "equivalence_report",
    "eval_support",
    "label_batch",
    "predict_codes",
    "write_predictions",
]
