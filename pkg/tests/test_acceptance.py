"""Acceptance criteria, one test per criterion.

Each test prints its measurements and the terminal summary lists one
PASS/FAIL line per criterion. Criteria that this implementation cannot meet
are marked strict xfail: the check still runs at its stated tolerance and
must fail; an unexpected pass turns the suite red.

Data files are read from ``XADG_DATA_DIR`` (default: ``data/``).
"""

import itertools
import time

import numpy as np
import pytest

from xadg.adg import check_well_formed, extract_adg, simplify_adg, simplify_steps
from xadg.af import Framework, Label, enumerate_semantics, grounded_labelling
from xadg.dataset import Recipe, load_dataset, split
from xadg.dtree import Predicate
from xadg.experiment import DEFAULT_DEPTHS, ExperimentConfig, run_experiment
from xadg.extended import (
    DnfSupport,
    PipelineConfig,
    apply_m1,
    apply_m2,
    build_xadg,
    check_well_built,
    lift,
    normalize,
    prune_inert,
)
from xadg.inference import equivalence_report
from xadg.region import CategoricalRegion
from helpers import all_instances, data_dir, load_cars, schema, synth

N_SYNTH = 24
RUNS = 100
BUILD_SECONDS = []


def within(value, interval, tol):
    lo, hi = interval
    return lo - tol <= value <= hi + tol


def within_rel(value, interval, frac):
    lo, hi = interval
    return lo * (1 - frac) <= value <= hi * (1 + frac)


@pytest.fixture(scope="module")
def suite():
    """Synthetic datasets plus cars, each with its train/test split and pipeline."""
    start = time.perf_counter()
    out = []
    for s in range(N_SYNTH):
        ds = synth(1000 + s)
        tr, te = split(ds, 0.8, s)
        out.append((f"synthetic-{s}", tr, te, build_xadg(tr, PipelineConfig(max_depth=2 + s % 5, seed=s))))
    tr, te = split(load_cars(), 0.8, 0)
    out.append(("cars", tr, te, build_xadg(tr, PipelineConfig(max_depth=6))))
    BUILD_SECONDS.append(time.perf_counter() - start)
    return out


@pytest.fixture(scope="module")
def cars_runs():
    ds = load_cars()
    return run_experiment(ds, ExperimentConfig(max_depth=DEFAULT_DEPTHS["cars"], runs=RUNS)).summary


@pytest.fixture(scope="module")
def census_runs():
    d = data_dir()
    ds = load_dataset(d / "adult.csv", recipe=Recipe.from_file(d / "recipes" / "census.json"))
    return run_experiment(ds, ExperimentConfig(max_depth=DEFAULT_DEPTHS["census"], runs=RUNS)).summary


@pytest.mark.criterion(1, "equivalence suite")
def test_equivalence_suite(suite, detail):
    start = time.perf_counter()
    assert sum(name.startswith("synthetic") for name, *_ in suite) >= 20
    checked = 0
    bad = []
    for name, tr, te, r in suite:
        assert len(tr.features) <= 8 and len(tr) + len(te) <= 1728
        for stage, g in (("extract", r.adg), ("simplify", r.simplified), ("m2", r.merged), ("m1", r.xadg)):
            for part in (tr, te):
                rep = equivalence_report(r.tree, g, part)
                checked += len(part)
                if rep.disagree or rep.undecided:
                    bad.append((name, stage, len(rep.disagree), rep.undecided))
    elapsed = time.perf_counter() - start + sum(BUILD_SECONDS)
    detail(f"{len(suite)} datasets, {checked} instance checks, {len(bad)} mismatching stages, "
           f"{elapsed:.1f}s including pipeline builds")
    assert not bad, bad
    assert elapsed < 60


@pytest.mark.criterion(2, "well-formedness")
def test_well_formedness(suite, detail):
    wf = {name: check_well_formed(r.adg) for name, _, _, r in suite}
    wb = {name: check_well_built(r.xadg) for name, _, _, r in suite}
    detail(f"{sum(not v for v in wf.values())}/{len(wf)} ADGs well-formed, "
           f"{sum(not v for v in wb.values())}/{len(wb)} xADGs well-built")
    assert not any(wf.values()) and not any(wb.values())


def _maximal_undec_by_enumeration(n, attacks):
    """Exhaustive: every reinstatement labelling is fixed by its in-set."""
    minus = [0] * n
    plus = [0] * n
    for a, b in attacks:
        plus[a] |= 1 << b
        minus[b] |= 1 << a
    labellings = []
    for s in range(1 << n):
        out = 0
        for i in range(n):
            if s >> i & 1:
                out |= plus[i]
        if s & out:
            continue
        ok = True
        for i in range(n):
            is_in, is_out = s >> i & 1, out >> i & 1
            all_out = minus[i] & ~out == 0
            if bool(is_in) != all_out or bool(is_out) != bool(minus[i] & s):
                ok = False
                break
        if ok:
            labellings.append((s, out))
    full = (1 << n) - 1
    undecs = [full & ~(s | o) for s, o in labellings]
    top = [u for u in undecs if all(v & ~u == 0 for v in undecs)]
    assert len(top) == 1
    s, o = labellings[undecs.index(top[0])]
    return s, o


@pytest.mark.criterion(3, "semantics oracle")
def test_semantics_oracle(detail):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    mismatches = 0
    for _ in range(500):
        n = int(rng.integers(1, 9))
        density = rng.uniform(0.05, 0.5)
        attacks = [(a, b) for a in range(n) for b in range(n) if rng.random() < density]
        af = Framework(tuple(range(n)), frozenset(attacks))
        lab = grounded_labelling(af)
        s, o = _maximal_undec_by_enumeration(n, attacks)
        want_in = {i for i in range(n) if s >> i & 1}
        want_out = {i for i in range(n) if o >> i & 1}
        if lab.in_args != want_in or lab.out_args != want_out:
            mismatches += 1
        for p in enumerate_semantics(af, "preferred"):
            if not lab.in_args <= p:
                mismatches += 1
    elapsed = time.perf_counter() - start
    detail(f"500 frameworks, {mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0 and elapsed < 60


CARS_REF = {
    "accuracy": (0.940, 0.946),
    "balanced_accuracy": (0.939, 0.946),
    "arguments": (8.3, 9.0),
    "attacks": (7.7, 9.6),
    "supports_avg": (2.6, 2.7),
}


@pytest.mark.criterion("4a", "cars accuracy and supports")
def test_cars_accuracy_and_supports(cars_runs, detail):
    acc, bal, sup = (cars_runs.mean(m) for m in ("accuracy", "balanced_accuracy", "supports_avg"))
    detail(f"accuracy {acc:.3f}, balanced {bal:.3f}, supports avg {sup:.2f} over {cars_runs.runs} runs")
    assert within(acc, CARS_REF["accuracy"], 0.03)
    assert within(bal, CARS_REF["balanced_accuracy"], 0.03)
    assert within(sup, CARS_REF["supports_avg"], 0.5)


@pytest.mark.criterion("4b", "cars graph size")
@pytest.mark.xfail(strict=True, reason="exact equivalence needs one-way path-dependent attacks; "
                   "m2 then rarely finds identical attacker sets, so graphs stay larger than the bands")
def test_cars_graph_size(cars_runs, detail):
    args, atts = cars_runs.mean("arguments"), cars_runs.mean("attacks")
    detail(f"arguments {args:.2f} (band [5.81, 11.7]), attacks {atts:.2f} (band [4.62, 13.44])")
    assert within_rel(args, CARS_REF["arguments"], 0.30), f"arguments {args:.2f} outside band"
    assert within_rel(atts, CARS_REF["attacks"], 0.40), f"attacks {atts:.2f} outside band"


@pytest.mark.criterion("5a", "census reproduction")
def test_census_reproduction(census_runs, detail):
    acc = census_runs.mean("accuracy")
    detail(f"accuracy {acc:.3f} over {census_runs.runs} runs at depth {DEFAULT_DEPTHS['census']}")
    assert within(acc, (0.839, 0.841), 0.03)


BANK = data_dir() / "bank-full.csv"


@pytest.mark.criterion("5b", "bank reproduction")
@pytest.mark.xfail(not BANK.is_file(), strict=True, reason="bank marketing data is not shipped")
def test_bank_reproduction(detail):
    assert BANK.is_file(), f"data missing: {BANK} not found"
    recipe = Recipe.from_file(data_dir() / "recipes" / "bank.json")
    ds = load_dataset(BANK, recipe=recipe)
    s = run_experiment(ds, ExperimentConfig(max_depth=DEFAULT_DEPTHS["bank"], runs=RUNS)).summary
    acc, atts = s.mean("accuracy"), s.mean("attacks")
    detail(f"accuracy {acc:.3f}, attacks {atts:.2f}")
    assert within(acc, (0.898, 0.900), 0.03)
    assert abs(atts - 2.0) <= 1.0


def _replay_sizes(r):
    sizes = [(len(r.adg.arguments), len(r.adg.attacks))]
    prev = r.adg
    for step in simplify_steps(r.tree, r.adg):
        sizes.append((len(step.arguments), len(step.attacks)))
        prev = step
    g = lift(prev)
    for e in r.xadg.log:
        if e["op"] == "m2":
            g = apply_m2(g, e["kept"], e["merged"])
        elif e["op"] == "m1":
            g = apply_m1(g, e["removed"])
        elif e["op"] == "prune":
            g = prune_inert(g)
        else:
            continue
        sizes.append((len(g.arguments), len(g.attacks)))
    return sizes, g


def _random_support(rng, feats):
    clauses = []
    for _ in range(int(rng.integers(0, 5))):
        c = []
        for _ in range(int(rng.integers(0, 4))):
            f = feats[int(rng.integers(len(feats)))]
            vals = [v for v in f.values if rng.random() < 0.5]
            c.append(Predicate(f.name, CategoricalRegion.of(vals, f.values)))
        clauses.append(tuple(c))
    return DnfSupport(tuple(clauses))


@pytest.mark.criterion(6, "monotonicity and idempotence")
def test_monotonicity(suite, detail):
    steps = increases = 0
    for _, _, _, r in suite:
        sizes, replayed = _replay_sizes(r)
        assert [a.id for a in replayed.arguments] == [a.id for a in r.xadg.arguments]
        steps += len(sizes) - 1
        increases += sum(b[0] > a[0] or b[1] > a[1] for a, b in zip(sizes, sizes[1:]))
        once = simplify_adg(r.tree, r.adg)
        assert simplify_adg(r.tree, once) is once
        for a in r.xadg.arguments:
            assert normalize(a.support) == a.support
    rng = np.random.default_rng(6)
    feats, _ = schema({"f1": ("a", "b", "c"), "f2": ("x", "y"), "f3": ("p", "q", "r")})
    grid = all_instances(feats)
    broken = 0
    for _ in range(500):
        s = _random_support(rng, feats)
        n = normalize(s)
        if normalize(n) != n or [n.holds(x) for x in grid] != [s.holds(x) for x in grid]:
            broken += 1
    detail(f"{steps} recorded steps, {increases} increases; 500 random supports, {broken} normalisation failures")
    assert increases == 0 and broken == 0


@pytest.mark.criterion(7, "prior-work deltas")
def test_prior_work_deltas(cars_runs, census_runs, detail):
    c_att, c_args = census_runs.mean("attacks"), census_runs.mean("arguments")
    acc = cars_runs.mean("accuracy")
    detail(f"census attacks {c_att:.2f} < 78, census arguments {c_args:.2f} < 21, cars accuracy {acc:.3f} > 0.88")
    assert c_att < 78 and c_args < 21 and acc > 0.88
