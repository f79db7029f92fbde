"""Repeated split/fit/build/evaluate runs with 95% confidence intervals."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .dataset import Dataset, Recipe, load_dataset, split
from .extended import PipelineConfig, build_xadg, support_stats
from .inference import predict_codes

Z95 = 1.96

# Depth used for each benchmark dataset.
DEFAULT_DEPTHS = {"cars": 6, "census": 4, "bank": 3, "myocardial": 3}

# Reference 95% intervals per benchmark dataset, shown next to reproduced values.
REFERENCE_RANGES = {
    "cars": {
        "tree_nodes": (26.6, 27.3),
        "tree_edges": (25.6, 26.3),
        "avg_path_length": (5.1, 5.2),
        "arguments": (8.3, 9.0),
        "attacks": (7.7, 9.6),
        "supports_min": (1.8, 2.0),
        "supports_max": (3.3, 3.6),
        "supports_avg": (2.6, 2.7),
        "accuracy": (0.940, 0.946),
        "balanced_accuracy": (0.939, 0.946),
    },
    "census": {
        "tree_nodes": (26.7, 27.4),
        "tree_edges": (25.7, 26.4),
        "avg_path_length": (3.8, 3.9),
        "arguments": (8.4, 8.9),
        "attacks": (6.4, 8.3),
        "supports_min": (2.0, 2.1),
        "supports_max": (3.9, 4.0),
        "supports_avg": (2.5, 2.6),
        "accuracy": (0.839, 0.841),
        "balanced_accuracy": (0.728, 0.732),
    },
    "bank": {
        "tree_nodes": (15, 15),
        "tree_edges": (14, 14),
        "avg_path_length": (3.0, 3.0),
        "arguments": (6.8, 7.0),
        "attacks": (2.0, 2.0),
        "supports_min": (2.0, 2.0),
        "supports_max": (2.9, 3.0),
        "supports_avg": (2.3, 2.3),
        "accuracy": (0.898, 0.900),
        "balanced_accuracy": (0.651, 0.658),
    },
    "myocardial": {
        "tree_nodes": (15, 15),
        "tree_edges": (14, 14),
        "avg_path_length": (3.0, 3.0),
        "arguments": (3.2, 3.7),
        "attacks": (1.0, 1.3),
        "supports_min": (1.1, 1.3),
        "supports_max": (1.2, 1.4),
        "supports_avg": (1.1, 1.3),
        "accuracy": (0.796, 0.809),
        "balanced_accuracy": (0.600, 0.611),
    },
}

# Single-valued results of the greedy ADG builder that xADGs are compared with.
BASELINES = {
    "cars-prior": {
        "accuracy": 0.88,
        "balanced_accuracy": 0.88,
        "arguments": 8,
        "attacks": 11,
        "supports_min": 1,
        "supports_max": 1,
        "supports_avg": 1,
    },
    "census-prior": {
        "accuracy": 0.83,
        "balanced_accuracy": 0.75,
        "arguments": 21,
        "attacks": 78,
        "supports_min": 1,
        "supports_max": 1,
        "supports_avg": 1,
    },
}


class ExperimentError(ValueError):
    pass


def balanced_accuracy(predictions: Sequence, truth: Sequence, classes: Sequence | None = None) -> float:
    """Unweighted mean of per-class recall over the classes of ``truth``."""
    pred = list(predictions)
    true = list(truth)
    if len(pred) != len(true):
        raise ExperimentError(f"length mismatch: {len(pred)} predictions, {len(true)} labels")
    if not true:
        raise ExperimentError("balanced accuracy of an empty sample")
    present = sorted(set(true), key=str)
    if classes is not None:
        missing = [c for c in classes if c not in set(true)]
        if missing:
            raise ExperimentError(f"classes absent from truth: {missing}")
        present = list(classes)
    recalls = []
    for c in present:
        idx = [i for i, t in enumerate(true) if t == c]
        recalls.append(sum(pred[i] == c for i in idx) / len(idx))
    return float(np.mean(recalls))


def confidence_interval(values: Sequence[float]) -> tuple[float, float, float]:
    """``(mean, low, high)`` with a normal-approximation 95% interval."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ExperimentError("a confidence interval needs at least 2 values")
    mean = float(v.mean())
    half = Z95 * float(v.std(ddof=1)) / math.sqrt(v.size)
    return mean, mean - half, mean + half


@dataclass(frozen=True)
class RunRecord:
    seed: int
    accuracy: float
    balanced_accuracy: float
    tree_nodes: int
    tree_edges: int
    tree_depth: int
    avg_path_length: float
    arguments: int
    attacks: int
    supports_min: int
    supports_max: int
    supports_avg: float
    clauses_min: int
    clauses_max: int
    clauses_avg: float
    undecided_rate: float
    wall_time: float = field(default=0.0, compare=False)

    def metrics(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("seed", "wall_time")}


METRICS = tuple(f.name for f in fields(RunRecord) if f.name not in ("seed", "wall_time"))


@dataclass(frozen=True)
class Summary:
    runs: int
    intervals: dict[str, tuple[float, float, float]]
    method: str = "mean ± 1.96·sd/√runs (normal approximation, sample sd)"

    def mean(self, metric: str) -> float:
        return self.intervals[metric][0]

    def to_json(self) -> dict:
        return {
            "runs": self.runs,
            "method": self.method,
            "metrics": {k: {"mean": m, "low": lo, "high": hi} for k, (m, lo, hi) in self.intervals.items()},
        }


def summarize(records: Sequence[RunRecord]) -> Summary:
    records = sorted(records, key=lambda r: r.seed)
    intervals = {m: confidence_interval([getattr(r, m) for r in records]) for m in METRICS}
    return Summary(len(records), intervals)


@dataclass(frozen=True)
class ExperimentConfig:
    max_depth: int = 6
    runs: int = 100
    train_fraction: float = 0.8
    base_seed: int = 0
    max_supports: int | None = None
    workers: int = 1

    def validate(self) -> None:
        if self.runs < 2:
            raise ExperimentError("runs must be >= 2")
        if self.max_depth < 1:
            raise ExperimentError("max_depth must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ExperimentError("train_fraction must lie in (0, 1)")
        if self.workers < 1:
            raise ExperimentError("workers must be >= 1")


def run_once(ds: Dataset, config: ExperimentConfig, seed: int) -> RunRecord:
    start = time.perf_counter()
    train, test = split(ds, config.train_fraction, seed)
    result = build_xadg(train, PipelineConfig(config.max_depth, seed, config.max_supports))
    g = result.xadg
    majority = list(train.classes).index(train.majority_class())
    raw = predict_codes(g, test, fallback=-1)
    undecided = raw < 0
    pred = np.where(undecided, majority, raw)
    classes = test.classes
    truth = [classes[c] for c in test.y]
    present = [c for c in classes if c in set(truth)]
    tstats = result.tree.stats()
    sstats = support_stats(g)
    return RunRecord(
        seed=seed,
        accuracy=float((pred == test.y).mean()),
        balanced_accuracy=balanced_accuracy([classes[c] for c in pred], truth, present),
        tree_nodes=tstats["nodes"],
        tree_edges=tstats["edges"],
        tree_depth=tstats["depth"],
        avg_path_length=tstats["avg_path_length"],
        arguments=len(g.arguments),
        attacks=len(g.attacks),
        supports_min=sstats["min"],
        supports_max=sstats["max"],
        supports_avg=sstats["avg"],
        clauses_min=sstats["clauses_min"],
        clauses_max=sstats["clauses_max"],
        clauses_avg=sstats["clauses_avg"],
        undecided_rate=float(undecided.mean()),
        wall_time=time.perf_counter() - start,
    )


def _run_star(args):
    return run_once(*args)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    records: tuple[RunRecord, ...]
    summary: Summary
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "records": [{"seed": r.seed, **r.metrics()} for r in self.records],
            "summary": self.summary.to_json(),
            "metadata": self.metadata,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")


def run_experiment(ds: Dataset, config: ExperimentConfig = ExperimentConfig(), **meta: Any) -> ExperimentResult:
    """Run ``config.runs`` independent pipelines; run ``i`` uses seed ``base_seed + i``."""
    config.validate()
    started = datetime.now(timezone.utc).isoformat()
    seeds = [config.base_seed + i for i in range(config.runs)]
    jobs = [(ds, config, s) for s in seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            records = list(pool.map(_run_star, jobs))
    else:
        records = [run_once(*j) for j in jobs]
    records = tuple(sorted(records, key=lambda r: r.seed))
    metadata = {
        "started": started,
        "n_instances": len(ds),
        "n_features": len(ds.features),
        "wall_times": [r.wall_time for r in records],
        **meta,
    }
    return ExperimentResult(config, records, summarize(records), metadata)


def compare_baseline(summary: Summary, baseline: str | dict) -> list[dict]:
    """Per-metric rows: baseline value, reproduced mean and interval, delta."""
    if isinstance(baseline, str):
        if baseline not in BASELINES:
            raise ExperimentError(f"unknown baseline {baseline!r}; known: {sorted(BASELINES)}")
        baseline = BASELINES[baseline]
    rows = []
    for metric, ref in baseline.items():
        mean, lo, hi = summary.intervals[metric]
        rows.append({"metric": metric, "baseline": ref, "mean": mean, "low": lo, "high": hi, "delta": mean - ref})
    return rows


_ROWS = (
    ("Tree depth", "tree_depth"),
    ("Avg. path length", "avg_path_length"),
    ("Tree nodes", "tree_nodes"),
    ("Tree edges", "tree_edges"),
    ("xADG args.", "arguments"),
    ("xADG atts.", "attacks"),
    ("Supports min", "supports_min"),
    ("Supports max", "supports_max"),
    ("Supports average", "supports_avg"),
    ("Clauses average", "clauses_avg"),
    ("Accuracy", "accuracy"),
    ("Balanced Acc.", "balanced_accuracy"),
    ("Undecided rate", "undecided_rate"),
)


def format_table(summary: Summary, reference: dict | None = None, title: str = "") -> str:
    """Plain-text table: one row per metric with the 95% interval."""
    prec = lambda m: 3 if m in ("accuracy", "balanced_accuracy", "undecided_rate") else 1
    lines = [title] if title else []
    head = f"{'':<20}{'mean':>10}  {'95% CI':<20}"
    if reference:
        head += f"{'reference':<20}"
    lines.append(head)
    for label, m in _ROWS:
        mean, lo, hi = summary.intervals[m]
        p = prec(m)
        line = f"{label:<20}{mean:>10.{p}f}  {f'[{lo:.{p}f}, {hi:.{p}f}]':<20}"
        if reference and m in reference:
            a, b = reference[m]
            line += f"[{a}, {b}]"
        lines.append(line)
    lines.append(f"runs: {summary.runs}; CI: {summary.method}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExperimentFile:
    """Experiment description loaded from JSON."""

    data: str
    target: str | None = None
    recipe: dict | None = None
    name: str | None = None
    max_depth: int | None = None
    runs: int = 100
    train_fraction: float = 0.8
    seed: int = 0
    max_supports: int | None = None
    workers: int = 1

    @classmethod
    def load(cls, path: str | Path) -> ExperimentFile:
        path = Path(path)
        data = json.loads(path.read_text())
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ExperimentError(f"unknown experiment keys {sorted(unknown)}")
        recipe = data.get("recipe")
        if isinstance(recipe, str):
            data["recipe"] = json.loads((path.parent / recipe).read_text())
        data["data"] = str(path.parent / data["data"])
        return cls(**data)

    def config(self) -> ExperimentConfig:
        depth = self.max_depth or DEFAULT_DEPTHS.get(self.name or "", 6)
        return ExperimentConfig(depth, self.runs, self.train_fraction, self.seed, self.max_supports, self.workers)

    def dataset(self) -> Dataset:
        recipe = Recipe.from_dict(self.recipe) if self.recipe else None
        return load_dataset(self.data, self.target, recipe)
