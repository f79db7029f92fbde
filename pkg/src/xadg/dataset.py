"""Tabular datasets: CSV loading, preprocessing recipes and train/test splits."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .region import CategoricalRegion, IntervalRegion, Region

log = logging.getLogger(__name__)

DEFAULT_MISSING = ("", "?", "NA")

Instance = Mapping[str, Any]


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureDomain:
    """Value domain of one column.

    Categorical domains keep an ordered, duplicate-free value list; numeric
    domains keep the observed ``[low, high]`` range.
    """

    name: str
    kind: str  # "categorical" | "numeric"
    values: tuple = ()
    low: float = math.nan
    high: float = math.nan

    def __post_init__(self):
        if self.kind == "categorical":
            if len(set(self.values)) != len(self.values):
                raise DatasetError(f"duplicate values in domain of {self.name!r}")
        elif self.kind == "numeric":
            if self.low > self.high:
                raise DatasetError(f"numeric domain of {self.name!r} has min > max")
        else:
            raise DatasetError(f"unknown feature kind {self.kind!r}")

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"

    def full_region(self) -> Region:
        if self.is_categorical:
            return CategoricalRegion.full(self.values)
        return IntervalRegion.full()

    def encode(self, value: Any) -> float:
        if self.is_categorical:
            return float(self.values.index(value))
        return float(value)

    def decode(self, code: float) -> Any:
        if self.is_categorical:
            return self.values[int(code)]
        return float(code)

    def to_json(self) -> dict:
        if self.is_categorical:
            return {"name": self.name, "kind": self.kind, "values": list(self.values)}
        return {"name": self.name, "kind": self.kind, "low": self.low, "high": self.high}

    @classmethod
    def from_json(cls, data: dict) -> FeatureDomain:
        if data["kind"] == "categorical":
            return cls(data["name"], "categorical", tuple(data["values"]))
        return cls(data["name"], "numeric", low=float(data["low"]), high=float(data["high"]))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded table: ``X`` holds numeric values or categorical value codes,
    ``y`` holds class codes into ``target.values``."""

    features: tuple[FeatureDomain, ...]
    target: FeatureDomain
    X: np.ndarray
    y: np.ndarray
    dropped_rows: int = 0
    dropped_columns: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.target.is_categorical:
            raise DatasetError("target must be categorical")
        if self.X.shape != (len(self.y), len(self.features)):
            raise DatasetError("X shape does not match schema and target length")
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def classes(self) -> tuple:
        return self.target.values

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    def feature_index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(name)

    def domain(self, name: str) -> FeatureDomain:
        return self.features[self.feature_index(name)]

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_index(name)]

    def instance(self, i: int) -> dict:
        return {f.name: f.decode(v) for f, v in zip(self.features, self.X[i])}

    def instances(self) -> list[dict]:
        return [self.instance(i) for i in range(len(self))]

    def label(self, i: int) -> Any:
        return self.target.values[int(self.y[i])]

    def labels(self) -> list:
        return [self.target.values[int(c)] for c in self.y]

    def majority_class(self) -> Any:
        counts = np.bincount(self.y, minlength=len(self.classes))
        return self.classes[int(np.argmax(counts))]

    def subset(self, rows: np.ndarray) -> Dataset:
        rows = np.asarray(rows, dtype=np.int64)
        return replace(self, X=self.X[rows].copy(), y=self.y[rows].copy())

    def schema_json(self) -> dict:
        return {"features": [f.to_json() for f in self.features], "target": self.target.to_json()}

    def to_csv(self, path: str | Path, delimiter: str = ",") -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, delimiter=delimiter)
            w.writerow(self.feature_names + [self.target.name])
            for i in range(len(self)):
                row = [
                    f.decode(v) if f.is_categorical else repr(float(v))
                    for f, v in zip(self.features, self.X[i])
                ]
                w.writerow(row + [self.label(i)])

    @classmethod
    def from_records(
        cls,
        records: Sequence[Mapping[str, Any]],
        target: str,
        categorical: Iterable[str] = (),
    ) -> Dataset:
        """Build a dataset from dict rows; string-valued columns become categorical."""
        if not records:
            raise DatasetError("no records")
        names = list(records[0])
        raw = {n: [r[n] for r in records] for n in names}
        forced = set(categorical) | {target}
        for n in names:
            if n not in forced and any(isinstance(v, str) for v in raw[n]):
                forced.add(n)
        return _build(raw, names, target, forced)


def _parse_float(s: str) -> float | None:
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def _sort_key(v: Any):
    return (0, float(v), "") if _parse_float(str(v)) is not None else (1, 0.0, str(v))


def _build(raw: dict[str, list], names: list[str], target: str, categorical: set[str]) -> Dataset:
    features = []
    cols = []
    for n in names:
        if n == target:
            continue
        vals = raw[n]
        if n in categorical:
            domain = tuple(sorted(set(vals), key=_sort_key))
            index = {v: i for i, v in enumerate(domain)}
            features.append(FeatureDomain(n, "categorical", domain))
            cols.append(np.array([index[v] for v in vals], dtype=np.float64))
        else:
            arr = np.array([float(v) for v in vals], dtype=np.float64)
            features.append(FeatureDomain(n, "numeric", low=float(arr.min()), high=float(arr.max())))
            cols.append(arr)
    classes = tuple(sorted(set(raw[target]), key=_sort_key))
    index = {v: i for i, v in enumerate(classes)}
    y = np.array([index[v] for v in raw[target]], dtype=np.int64)
    X = np.column_stack(cols) if cols else np.zeros((len(y), 0))
    return Dataset(tuple(features), FeatureDomain(target, "categorical", classes), X, y)


def load_csv(
    path: str | Path,
    target: str,
    missing: Iterable[str] = DEFAULT_MISSING,
    delimiter: str = ",",
    max_missing_fraction: float | None = None,
    drop: Iterable[str] = (),
    categorical: Iterable[str] = (),
) -> Dataset:
    """Read a headed CSV file into a :class:`Dataset`.

    Columns listed in ``drop`` and columns whose missing rate exceeds
    ``max_missing_fraction`` are removed first; afterwards every row with any
    missing value is dropped. A column is numeric iff all of its remaining
    values parse as finite numbers, unless it is the target or forced
    ``categorical``.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DatasetError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [[c.strip() for c in r] for r in rows[1:]]
    if target not in header:
        raise DatasetError(f"{path}: target column {target!r} not in header")
    for r in body:
        if len(r) != len(header):
            raise DatasetError(f"{path}: ragged row {r!r}")
    missing = set(missing)
    drop = set(drop)
    unknown = drop - set(header)
    if unknown:
        raise DatasetError(f"cannot drop unknown columns {sorted(unknown)}")

    keep = [j for j, h in enumerate(header) if h not in drop]
    dropped_cols = [h for h in header if h in drop]
    if max_missing_fraction is not None and body:
        kept = []
        for j in keep:
            rate = sum(r[j] in missing for r in body) / len(body)
            if rate > max_missing_fraction and header[j] != target:
                dropped_cols.append(header[j])
            else:
                kept.append(j)
        keep = kept

    clean = [r for r in body if not any(r[j] in missing for j in keep)]
    n_dropped = len(body) - len(clean)
    if n_dropped:
        log.info("%s: dropped %d rows with missing values", path.name, n_dropped)
    if not clean:
        raise DatasetError(f"{path}: no rows left after removing missing values")

    names = [header[j] for j in keep]
    raw = {header[j]: [r[j] for r in clean] for j in keep}
    forced = set(categorical) | {target}
    for n in names:
        if n not in forced and any(_parse_float(v) is None for v in raw[n]):
            forced.add(n)
    ds = _build(raw, names, target, forced)
    if len(ds.classes) < 2:
        raise DatasetError(f"{path}: target {target!r} has a single class")
    return replace(ds, dropped_rows=n_dropped, dropped_columns=tuple(dropped_cols))


@dataclass(frozen=True)
class Recipe:
    """Declarative preprocessing recipe.

    JSON keys (all optional)::

        target                name of the target column
        missing_markers       list of strings treated as missing
        delimiter             CSV delimiter
        max_missing_fraction  drop columns whose missing rate exceeds this
        drop_features         columns to remove
        categorical           columns forced categorical
        group_classes         {"new_class": ["old", ...], ...}
    """

    target: str | None = None
    missing_markers: tuple[str, ...] = DEFAULT_MISSING
    delimiter: str = ","
    max_missing_fraction: float | None = None
    drop_features: tuple[str, ...] = ()
    categorical: tuple[str, ...] = ()
    group_classes: Mapping[str, tuple] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Recipe:
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise DatasetError(f"unknown recipe keys {sorted(extra)}")
        kw = dict(data)
        for key in ("missing_markers", "drop_features", "categorical"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "group_classes" in kw:
            kw["group_classes"] = {k: tuple(v) for k, v in kw["group_classes"].items()}
        return cls(**kw)

    @classmethod
    def from_file(cls, path: str | Path) -> Recipe:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def preprocess(ds: Dataset, recipe: Recipe) -> Dataset:
    """Apply target selection, feature drops and class grouping."""
    if recipe.target and recipe.target != ds.target.name:
        ds = _retarget(ds, recipe.target)
    if recipe.drop_features:
        unknown = set(recipe.drop_features) - set(ds.feature_names)
        if unknown:
            raise DatasetError(f"recipe drops unknown features {sorted(unknown)}")
        keep = [i for i, f in enumerate(ds.features) if f.name not in recipe.drop_features]
        ds = replace(
            ds,
            features=tuple(ds.features[i] for i in keep),
            X=ds.X[:, keep].copy(),
            dropped_columns=ds.dropped_columns + tuple(recipe.drop_features),
        )
    if recipe.group_classes:
        ds = _group_classes(ds, recipe.group_classes)
    return ds


def _retarget(ds: Dataset, name: str) -> Dataset:
    j = ds.feature_index(name)
    new_dom = ds.features[j]
    if new_dom.is_categorical:
        labels = [new_dom.values[int(c)] for c in ds.X[:, j]]
    else:
        labels = [f"{v:g}" for v in ds.X[:, j]]
    classes = tuple(sorted(set(labels), key=_sort_key))
    if len(classes) < 2:
        raise DatasetError(f"target {name!r} has a single class")
    index = {v: i for i, v in enumerate(classes)}
    old = ds.target
    old_col = ds.y.astype(np.float64)
    features = list(ds.features)
    X = ds.X.copy()
    features[j] = old
    X[:, j] = old_col
    return replace(
        ds,
        features=tuple(features),
        target=FeatureDomain(name, "categorical", classes),
        X=X,
        y=np.array([index[v] for v in labels], dtype=np.int64),
    )


def _group_classes(ds: Dataset, groups: Mapping[str, Iterable]) -> Dataset:
    mapping = {}
    for new, olds in groups.items():
        for old in olds:
            if old not in ds.classes:
                raise DatasetError(f"recipe groups unknown class {old!r}")
            mapping[old] = new
    labels = [mapping.get(c, c) for c in ds.labels()]
    classes = tuple(sorted(set(labels), key=_sort_key))
    index = {v: i for i, v in enumerate(classes)}
    return replace(
        ds,
        target=FeatureDomain(ds.target.name, "categorical", classes),
        y=np.array([index[v] for v in labels], dtype=np.int64),
    )


def load_dataset(path: str | Path, target: str | None = None, recipe: Recipe | None = None) -> Dataset:
    """Load a CSV and apply a recipe; column-level recipe steps run before row cleaning."""
    recipe = recipe or Recipe()
    target = recipe.target or target
    if target is None:
        raise DatasetError("no target column given")
    ds = load_csv(
        path,
        target,
        missing=recipe.missing_markers,
        delimiter=recipe.delimiter,
        max_missing_fraction=recipe.max_missing_fraction,
        drop=recipe.drop_features,
        categorical=recipe.categorical,
    )
    return preprocess(ds, replace(recipe, target=None, drop_features=()))


def split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded random partition; the train part gets ``floor(N * train_fraction)`` rows."""
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train fraction must lie in (0, 1), got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(len(ds))
    n_train = int(math.floor(len(ds) * train_fraction + 1e-9))
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))


def encode_rows(
    rows: Sequence[Mapping[str, Any]],
    features: Sequence[FeatureDomain],
    target: FeatureDomain,
    strict_labels: bool = True,
) -> Dataset:
    """Encode raw rows against a fixed schema.

    Categorical values must belong to the schema's domain. Rows without a
    target value get class code 0, so unlabelled files can still be scored;
    with ``strict_labels`` off, unknown class labels are treated the same way.
    """
    X = np.empty((len(rows), len(features)), dtype=np.float64)
    y = np.zeros(len(rows), dtype=np.int64)
    for i, r in enumerate(rows):
        for j, f in enumerate(features):
            if f.name not in r:
                raise DatasetError(f"row {i}: no value for feature {f.name!r}")
            v = r[f.name]
            try:
                X[i, j] = f.encode(v if f.is_categorical or not isinstance(v, str) else v.strip())
            except ValueError:
                raise DatasetError(f"row {i}: value {v!r} not valid for feature {f.name!r}") from None
        label = r.get(target.name)
        if label is not None and label != "":
            if label not in target.values:
                if not strict_labels:
                    continue
                raise DatasetError(f"row {i}: unknown class {label!r}")
            y[i] = target.values.index(label)
    return Dataset(tuple(features), target, X, y)


def read_rows(path: str | Path, delimiter: str = ",") -> list[dict[str, str]]:
    try:
        with open(path, newline="") as fh:
            return [
                {k.strip(): (v or "").strip() for k, v in r.items()}
                for r in csv.DictReader(fh, delimiter=delimiter)
            ]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
