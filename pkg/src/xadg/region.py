"""Value regions for a single feature.

A region is the set of values a predicate admits. Categorical regions are
subsets of an ordered value domain; numeric regions are finite unions of
disjoint half-open intervals ``[lo, hi)`` over the real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

INF = math.inf


class Region:
    """Common interface of :class:`CategoricalRegion` and :class:`IntervalRegion`."""

    def complement(self) -> Region:
        raise NotImplementedError

    def intersect(self, other: Region) -> Region:
        raise NotImplementedError

    def union(self, other: Region) -> Region:
        raise NotImplementedError

    def is_empty(self) -> bool:
        raise NotImplementedError

    def is_full(self) -> bool:
        raise NotImplementedError

    def contains(self, value: Any) -> bool:
        raise NotImplementedError

    def issubset(self, other: Region) -> bool:
        return self.intersect(other.complement()).is_empty()

    def mask(self, column: np.ndarray) -> np.ndarray:
        """Boolean membership over an encoded dataset column."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def describe(self, feature: str) -> str:
        raise NotImplementedError

    def __and__(self, other: Region) -> Region:
        return self.intersect(other)

    def __or__(self, other: Region) -> Region:
        return self.union(other)

    def __invert__(self) -> Region:
        return self.complement()


def _check_same_kind(a: Region, b: Region) -> None:
    if type(a) is not type(b):
        raise TypeError(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, CategoricalRegion) and a.domain != b.domain:
        raise ValueError("categorical regions over different domains")


@dataclass(frozen=True)
class CategoricalRegion(Region):
    values: frozenset
    domain: tuple

    def __post_init__(self):
        extra = set(self.values) - set(self.domain)
        if extra:
            raise ValueError(f"values outside domain: {sorted(map(str, extra))}")

    @classmethod
    def of(cls, values: Iterable, domain: Iterable) -> CategoricalRegion:
        return cls(frozenset(values), tuple(domain))

    @classmethod
    def full(cls, domain: Iterable) -> CategoricalRegion:
        domain = tuple(domain)
        return cls(frozenset(domain), domain)

    def complement(self) -> CategoricalRegion:
        return CategoricalRegion(frozenset(self.domain) - self.values, self.domain)

    def intersect(self, other: Region) -> CategoricalRegion:
        _check_same_kind(self, other)
        return CategoricalRegion(self.values & other.values, self.domain)

    def union(self, other: Region) -> CategoricalRegion:
        _check_same_kind(self, other)
        return CategoricalRegion(self.values | other.values, self.domain)

    def is_empty(self) -> bool:
        return not self.values

    def is_full(self) -> bool:
        return len(self.values) == len(self.domain)

    def contains(self, value: Any) -> bool:
        return value in self.values

    def issubset(self, other: Region) -> bool:
        _check_same_kind(self, other)
        return self.values <= other.values

    def codes(self) -> np.ndarray:
        return np.array([i for i, v in enumerate(self.domain) if v in self.values], dtype=np.int64)

    def mask(self, column: np.ndarray) -> np.ndarray:
        keep = np.zeros(len(self.domain), dtype=bool)
        keep[self.codes()] = True
        return keep[column.astype(np.int64)]

    def sorted_values(self) -> list:
        return [v for v in self.domain if v in self.values]

    def to_json(self) -> dict:
        return {"in": self.sorted_values()}

    def describe(self, feature: str) -> str:
        vals = self.sorted_values()
        if len(vals) == 1:
            return f"{feature} = {vals[0]}"
        if len(vals) == len(self.domain) - 1:
            (missing,) = [v for v in self.domain if v not in self.values]
            return f"{feature} != {missing}"
        return f"{feature} in {{{', '.join(map(str, vals))}}}"

    def __repr__(self) -> str:
        return f"CategoricalRegion({self.sorted_values()!r})"


def _canonical(intervals: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    out: list[list[float]] = []
    for lo, hi in sorted((float(a), float(b)) for a, b in intervals):
        if not lo < hi:
            continue
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


@dataclass(frozen=True)
class IntervalRegion(Region):
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", _canonical(self.intervals))

    @classmethod
    def full(cls) -> IntervalRegion:
        return cls(((-INF, INF),))

    @classmethod
    def below(cls, threshold: float) -> IntervalRegion:
        return cls(((-INF, threshold),))

    @classmethod
    def at_least(cls, threshold: float) -> IntervalRegion:
        return cls(((threshold, INF),))

    def complement(self) -> IntervalRegion:
        gaps = []
        cursor = -INF
        for lo, hi in self.intervals:
            if lo > cursor:
                gaps.append((cursor, lo))
            cursor = hi
        if cursor < INF:
            gaps.append((cursor, INF))
        return IntervalRegion(tuple(gaps))

    def intersect(self, other: Region) -> IntervalRegion:
        _check_same_kind(self, other)
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalRegion(tuple(out))

    def union(self, other: Region) -> IntervalRegion:
        _check_same_kind(self, other)
        return IntervalRegion(self.intervals + other.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def is_full(self) -> bool:
        return self.intervals == ((-INF, INF),)

    def contains(self, value: Any) -> bool:
        x = float(value)
        return any(lo <= x < hi for lo, hi in self.intervals)

    def mask(self, column: np.ndarray) -> np.ndarray:
        out = np.zeros(column.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (column >= lo) & (column < hi)
        return out

    def to_json(self) -> dict:
        return {
            "intervals": [
                [None if math.isinf(lo) else lo, None if math.isinf(hi) else hi]
                for lo, hi in self.intervals
            ]
        }

    def describe(self, feature: str) -> str:
        parts = []
        for lo, hi in self.intervals:
            if math.isinf(lo) and math.isinf(hi):
                parts.append(f"{feature} any")
            elif math.isinf(lo):
                parts.append(f"{feature} < {hi:g}")
            elif math.isinf(hi):
                parts.append(f"{feature} >= {lo:g}")
            else:
                parts.append(f"{lo:g} <= {feature} < {hi:g}")
        if not parts:
            return f"{feature} none"
        return " or ".join(parts)

    def __repr__(self) -> str:
        return f"IntervalRegion({list(self.intervals)!r})"


def region_from_json(data: dict, domain: tuple | None) -> Region:
    """Inverse of ``Region.to_json``; ``domain`` is required for categorical regions."""
    if "in" in data:
        if domain is None:
            raise ValueError("categorical region literal needs a value domain")
        return CategoricalRegion.of(data["in"], domain)
    if "intervals" in data:
        return IntervalRegion(
            tuple(
                (-INF if lo is None else float(lo), INF if hi is None else float(hi))
                for lo, hi in data["intervals"]
            )
        )
    raise ValueError(f"not a region literal: {data!r}")
