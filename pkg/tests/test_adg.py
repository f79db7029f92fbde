import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xadg.adg import (
    Adg,
    AdgArgument,
    check_well_formed,
    extract_adg,
    simplify_adg,
    simplify_steps,
)
from xadg.dataset import split
from xadg.dtree import Predicate, fit
from xadg.inference import classify, equivalence_report
from xadg.region import CategoricalRegion
from helpers import all_instances, grid_dataset, load_cars, make_tree, schema, synth

F = schema({"f1": ("v1", "v2", "v3"), "f2": ("w1", "w2")})


def by_support(adg):
    return {(a.describe()) for a in adg.arguments}


def assert_equivalent(dt, adg, features):
    for x in all_instances(features):
        r = classify(adg, x)
        assert r.decided and r.prediction == dt.predict(x), x


def test_depth_one_tree():
    dt = make_tree(*F, ("f1", "v1", "A", "B"))
    adg = extract_adg(dt)
    assert [a.is_predictive for a in adg.arguments] == [True, True]
    assert adg.attacks == frozenset()
    assert not check_well_formed(adg)


def test_two_level_example():
    dt = make_tree(*F, ("f1", "v1", "A", ("f2", "w1", "A", "B")))
    adg = extract_adg(dt)
    assert by_support(adg) == {"<f1 = v1, A>", "<f2 = w1, A>", "<f2 = w2, B>", "<f1 != v1, ->"}
    a1 = next(a for a in adg.arguments if a.describe() == "<f1 = v1, A>")
    a3 = next(a for a in adg.arguments if a.describe() == "<f2 = w2, B>")
    # one-way: the shallower edge defeats the deeper one
    assert adg.attacks == {(a1.id, a3.id)}
    assert not check_well_formed(adg)
    assert_equivalent(dt, adg, F[0])


def test_single_leaf_tree():
    dt = make_tree(*F, "B")
    adg = extract_adg(dt)
    (arg,) = adg.arguments
    assert arg.predicate is None and arg.conclusion == "B" and not adg.attacks
    assert classify(adg, {"f1": "v2", "f2": "w1"}).prediction == "B"


def test_supports_are_path_restricted():
    feats, target = schema({"f": ("a", "b", "c")})
    dt = make_tree(feats, target, ("f", "a", "A", ("f", "b", "B", "A")))
    adg = extract_adg(dt)
    deep_false = next(a for a in adg.arguments if a.edge == (2, 4))
    assert deep_false.predicate.region.values == frozenset({"c"})


def test_simplify_collapses_same_class_children():
    dt = make_tree(*F, ("f1", "v1", "A", ("f2", "w1", "B", "B")))
    out = simplify_adg(dt, extract_adg(dt))
    assert by_support(out) == {"<f1 = v1, A>", "<f1 != v1, B>"}
    assert not out.attacks
    assert_equivalent(dt, out, F[0])


def test_simplify_fixed_point_is_identity():
    dt = make_tree(*F, ("f1", "v1", "A", ("f2", "w1", "A", "B")))
    adg = extract_adg(dt)
    assert simplify_adg(dt, adg) is adg
    assert list(simplify_steps(dt, adg)) == []


def test_simplify_root_collapse():
    dt = make_tree(*F, ("f1", "v1", "B", "B"))
    out = simplify_adg(dt, extract_adg(dt))
    (arg,) = out.arguments
    assert arg.predicate is None and arg.conclusion == "B" and arg.edge == (None, 0)


def test_simplify_cascades_to_root():
    dt = make_tree(*F, ("f1", "v1", ("f2", "w1", "A", "A"), "A"))
    out = simplify_adg(dt, extract_adg(dt))
    assert [a.describe() for a in out.arguments] == ["<true, A>"]


def test_check_well_formed_violations():
    feats, target = F
    p = lambda f, v: Predicate(f, CategoricalRegion.of([v], next(d for d in feats if d.name == f).values))
    a = AdgArgument(0, p("f1", "v1"), "A")
    b = AdgArgument(1, p("f2", "w1"), "B")
    c = AdgArgument(2, p("f1", "v2"), "B")
    d = AdgArgument(3, p("f2", "w2"), "A")
    missing = Adg((a, b), frozenset(), feats, target)
    assert any("missing attack" in v for v in check_well_formed(missing))
    same_feature = Adg((a, c), frozenset({(0, 2)}), feats, target)
    assert any("same-feature" in v for v in check_well_formed(same_feature))
    same_concl = Adg((a, d), frozenset({(0, 3)}), feats, target)
    assert any("same-conclusion" in v for v in check_well_formed(same_concl))


def test_adg_validation():
    feats, target = F
    with pytest.raises(ValueError):
        Adg((AdgArgument(0, None, "A"), AdgArgument(0, None, "B")), frozenset(), feats, target)
    with pytest.raises(ValueError):
        Adg((AdgArgument(0, None, "A"),), frozenset({(0, 1)}), feats, target)


def test_json_and_dot_roundtrip(tmp_path):
    ds = synth(4)
    dt = fit(ds, 4)
    adg = extract_adg(dt)
    adg.save(tmp_path / "a.json")
    back = Adg.load(tmp_path / "a.json")
    assert back.to_json() == adg.to_json()
    assert back.tree is not None
    assert equivalence_report(back.tree, back, ds).rate == 1.0
    dot = adg.to_dot()
    assert dot.startswith('digraph "adg"') and dot.count("\" -> \"") == len(adg.attacks)


@pytest.mark.parametrize("seed", range(12))
def test_extract_and_simplify_on_random_trees(seed):
    ds = synth(seed)
    tr, te = split(ds, 0.8, seed)
    dt = fit(tr, 2 + seed % 5)
    adg = extract_adg(dt)
    assert not check_well_formed(adg)
    out = simplify_adg(dt, adg)
    for g in (adg, out):
        for part in (tr, te):
            rep = equivalence_report(dt, g, part)
            assert not rep.disagree and rep.undecided == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 6))
def test_simplify_is_monotone_and_idempotent(seed, depth):
    ds = synth(seed, max_rows=200)
    dt = fit(ds, depth)
    prev = extract_adg(dt)
    assert not check_well_formed(prev)
    for step in simplify_steps(dt, prev):
        assert len(step.arguments) <= len(prev.arguments)
        assert len(step.attacks) <= len(prev.attacks)
        prev = step
    again = simplify_adg(dt, prev)
    assert again is prev


def test_cars_equivalence():
    ds = load_cars()
    tr, te = split(ds, 0.8, 1)
    dt = fit(tr, 6)
    adg = extract_adg(dt)
    out = simplify_adg(dt, adg)
    for g in (adg, out):
        assert equivalence_report(dt, g, ds).rate == 1.0
