import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xadg.region import CategoricalRegion, IntervalRegion, region_from_json

DOMAIN = ("a", "b", "c", "d", "e")

cat_regions = st.frozensets(st.sampled_from(DOMAIN)).map(lambda s: CategoricalRegion(s, DOMAIN))

finite = st.floats(-100, 100, allow_nan=False).map(lambda x: round(x, 1))
bound = st.one_of(finite, st.just(-math.inf), st.just(math.inf))
interval_regions = st.lists(st.tuples(bound, bound), max_size=4).map(IntervalRegion)
probes = st.lists(finite, min_size=1, max_size=30)


def test_categorical_basics():
    r = CategoricalRegion.of(["a", "c"], DOMAIN)
    assert r.contains("a") and not r.contains("b")
    assert r.complement().values == frozenset({"b", "d", "e"})
    assert CategoricalRegion.full(DOMAIN).is_full()
    assert r.describe("f") == "f in {a, c}"
    assert CategoricalRegion.of(["a"], DOMAIN).describe("f") == "f = a"
    assert CategoricalRegion.of(DOMAIN[1:], DOMAIN).describe("f") == "f != a"


def test_categorical_rejects_foreign_values():
    with pytest.raises(ValueError):
        CategoricalRegion.of(["z"], DOMAIN)


def test_mixing_kinds_fails():
    with pytest.raises(TypeError):
        CategoricalRegion.full(DOMAIN) & IntervalRegion.full()
    with pytest.raises(ValueError):
        CategoricalRegion.full(DOMAIN) | CategoricalRegion.full(("x",))


def test_interval_canonical_form():
    r = IntervalRegion(((3, 5), (0, 1), (1, 2), (4, 6), (7, 7)))
    assert r.intervals == ((0.0, 2.0), (3.0, 6.0))
    assert IntervalRegion.below(2).complement() == IntervalRegion.at_least(2)
    assert r.contains(0) and not r.contains(2) and r.contains(5.5)


def test_interval_describe():
    assert IntervalRegion.below(2.5).describe("x") == "x < 2.5"
    assert IntervalRegion.at_least(1).describe("x") == "x >= 1"
    assert IntervalRegion(()).describe("x") == "x none"


@given(cat_regions, cat_regions)
def test_categorical_algebra(a, b):
    assert ~~a == a
    assert ~(a | b) == (~a & ~b)
    assert (a & b).issubset(a)
    assert a.issubset(a | b)
    assert (a & ~a).is_empty() and (a | ~a).is_full()


@given(interval_regions, interval_regions, probes)
def test_interval_algebra_pointwise(a, b, xs):
    for x in xs:
        assert (a & b).contains(x) == (a.contains(x) and b.contains(x))
        assert (a | b).contains(x) == (a.contains(x) or b.contains(x))
        assert (~a).contains(x) == (not a.contains(x))
    assert ~~a == a


@given(interval_regions, probes)
def test_interval_mask_matches_contains(r, xs):
    col = np.array(xs)
    assert r.mask(col).tolist() == [r.contains(x) for x in xs]


@given(cat_regions)
def test_categorical_mask_matches_contains(r):
    col = np.arange(len(DOMAIN), dtype=float)
    assert r.mask(col).tolist() == [r.contains(v) for v in DOMAIN]


@given(interval_regions)
def test_interval_json_roundtrip(r):
    assert region_from_json(r.to_json(), None) == r


@given(cat_regions)
def test_categorical_json_roundtrip(r):
    assert region_from_json(r.to_json(), DOMAIN) == r


def test_region_from_json_errors():
    with pytest.raises(ValueError):
        region_from_json({"in": ["a"]}, None)
    with pytest.raises(ValueError):
        region_from_json({"bogus": 1}, None)
