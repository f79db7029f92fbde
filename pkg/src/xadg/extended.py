"""Extended argumentative decision graphs: arguments with DNF supports.

A support is a disjunction of clauses, each clause a conjunction of
predicates. ``TRUE`` is the single empty clause, ``FALSE`` the empty
disjunction. Supports are kept well-built: one predicate per feature inside
a clause, no full-domain predicates, no clause implied by another and no two
clauses that differ on exactly one feature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .adg import Adg, extract_adg, simplify_adg
from .dataset import Dataset, FeatureDomain
from .dot import digraph
from .dtree import DecisionTree, Predicate, fit

Clause = tuple[Predicate, ...]


@dataclass(frozen=True)
class DnfSupport:
    clauses: tuple[Clause, ...]

    @classmethod
    def of(cls, predicate: Predicate | None) -> DnfSupport:
        return TRUE if predicate is None else cls(((predicate,),))

    @property
    def is_true(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    @property
    def is_false(self) -> bool:
        return not self.clauses

    def n_predicates(self) -> int:
        return sum(len(c) for c in self.clauses)

    def features(self) -> set[str]:
        return {p.feature for c in self.clauses for p in c}

    def holds(self, instance: Mapping[str, Any]) -> bool:
        return any(all(p.holds(instance) for p in c) for c in self.clauses)

    def mask(self, ds: Dataset) -> np.ndarray:
        out = np.zeros(len(ds), dtype=bool)
        for c in self.clauses:
            m = np.ones(len(ds), dtype=bool)
            for p in c:
                m &= p.mask(ds)
            out |= m
        return out

    def describe(self) -> str:
        if self.is_false:
            return "false"
        if self.is_true:
            return "true"
        parts = [" AND ".join(p.describe() for p in c) for c in self.clauses]
        if len(parts) == 1:
            return parts[0]
        return " OR ".join(f"({p})" if len(c) > 1 else p for p, c in zip(parts, self.clauses))

    def to_json(self) -> list:
        return [[p.to_json() for p in c] for c in self.clauses]

    @classmethod
    def from_json(cls, data: list, domains: Mapping[str, FeatureDomain]) -> DnfSupport:
        return cls(tuple(tuple(Predicate.from_json(p, domains) for p in c) for c in data))

    def __str__(self) -> str:
        return self.describe()


TRUE = DnfSupport(((),))
FALSE = DnfSupport(())


def _clause_key(c: Clause) -> str:
    return json.dumps([p.to_json() for p in c], sort_keys=True, default=str)


def _normalize_clause(c: Iterable[Predicate]) -> Clause | None:
    """Intersect same-feature predicates; None if the clause is unsatisfiable."""
    by_feature: dict[str, Any] = {}
    for p in c:
        r = by_feature.get(p.feature)
        by_feature[p.feature] = p.region if r is None else r & p.region
    out = []
    for f in sorted(by_feature):
        r = by_feature[f]
        if r.is_empty():
            return None
        if not r.is_full():
            out.append(Predicate(f, r))
    return tuple(out)


def _implies(c1: Clause, c2: Clause) -> bool:
    """True iff clause ``c2`` implies ``c1`` (``c1`` subsumes ``c2``)."""
    regions = {p.feature: p.region for p in c2}
    for p in c1:
        r = regions.get(p.feature)
        if r is None or not r.issubset(p.region):
            return False
    return True


def _merge_pair(c1: Clause, c2: Clause) -> Clause | None:
    if len(c1) != len(c2):
        return None
    if [p.feature for p in c1] != [p.feature for p in c2]:
        return None
    diff = [i for i, (p, q) in enumerate(zip(c1, c2)) if p.region != q.region]
    if len(diff) != 1:
        return None
    i = diff[0]
    merged = list(c1)
    merged[i] = Predicate(c1[i].feature, c1[i].region | c2[i].region)
    return _normalize_clause(merged)


def normalize(support: DnfSupport | Iterable[Iterable[Predicate]]) -> DnfSupport:
    """Smallest well-built rewrite of a DNF; never changes its truth function."""
    raw = support.clauses if isinstance(support, DnfSupport) else support
    clauses = []
    for c in raw:
        nc = _normalize_clause(c)
        if nc is not None:
            clauses.append(nc)
    changed = True
    while changed:
        changed = False
        uniq = {_clause_key(c): c for c in clauses}
        clauses = [uniq[k] for k in sorted(uniq)]
        if any(len(c) == 0 for c in clauses):
            return TRUE
        kept = [
            c
            for i, c in enumerate(clauses)
            if not any(j != i and _implies(d, c) for j, d in enumerate(clauses))
        ]
        if len(kept) != len(clauses):
            clauses, changed = kept, True
            continue
        for i in range(len(clauses)):
            for j in range(i + 1, len(clauses)):
                m = _merge_pair(clauses[i], clauses[j])
                if m is not None:
                    clauses = [c for k, c in enumerate(clauses) if k not in (i, j)] + [m]
                    changed = True
                    break
            if changed:
                break
    return DnfSupport(tuple(clauses))


def negate(s: DnfSupport) -> DnfSupport:
    """DNF of NOT ``s``: complement each literal and distribute."""
    acc = TRUE
    for c in s.clauses:
        acc = normalize([d + (p.complement(),) for d in acc.clauses for p in c])
    return acc


def conjoin(a: DnfSupport, b: DnfSupport) -> DnfSupport:
    return normalize([c + d for c in a.clauses for d in b.clauses])


def disjoin(a: DnfSupport, b: DnfSupport) -> DnfSupport:
    return normalize(a.clauses + b.clauses)


def well_built_violations(s: DnfSupport) -> list[str]:
    out = []
    for c in s.clauses:
        feats = [p.feature for p in c]
        if len(set(feats)) != len(feats):
            out.append(f"clause repeats a feature: {feats}")
    for i, c in enumerate(s.clauses):
        for j, d in enumerate(s.clauses):
            if i != j and _implies(d, c) and (not _implies(c, d) or i > j):
                out.append(f"clause {i} is redundant given clause {j}")
    return out


def check_well_built(g: Xadg) -> list[str]:
    """Well-built violations of every argument, prefixed with its id."""
    return [f"a{a.id}: {v}" for a in g.arguments for v in well_built_violations(a.support)]


@dataclass(frozen=True)
class XArgument:
    id: int
    support: DnfSupport
    conclusion: Any = None

    @property
    def is_predictive(self) -> bool:
        return self.conclusion is not None

    @property
    def is_vacuous(self) -> bool:
        """True when no instance can activate the argument."""
        return self.support.is_false

    def describe(self) -> str:
        concl = "-" if self.conclusion is None else str(self.conclusion)
        return f"<{self.support.describe()}, {concl}>"


def normalize_well_built(a: XArgument) -> XArgument:
    """``a`` with a well-built support; check ``is_vacuous`` on the result."""
    return replace(a, support=normalize(a.support))


@dataclass(frozen=True, eq=False)
class Xadg:
    arguments: tuple[XArgument, ...]
    attacks: frozenset
    features: tuple[FeatureDomain, ...]
    target: FeatureDomain
    tree: DecisionTree | None = field(default=None, repr=False)
    log: tuple[dict, ...] = ()

    def __post_init__(self):
        ids = {a.id for a in self.arguments}
        if len(ids) != len(self.arguments):
            raise ValueError("duplicate argument ids")
        for a, b in self.attacks:
            if a not in ids or b not in ids:
                raise ValueError(f"attack ({a}, {b}) references an unknown argument")

    def by_id(self, arg_id: int) -> XArgument:
        for a in self.arguments:
            if a.id == arg_id:
                return a
        raise KeyError(arg_id)

    def attackers(self, arg_id: int) -> frozenset:
        return frozenset(a for a, b in self.attacks if b == arg_id)

    def targets(self, arg_id: int) -> frozenset:
        return frozenset(b for a, b in self.attacks if a == arg_id)

    def _with(self, arguments, attacks, entry: dict | None = None) -> Xadg:
        log = self.log if entry is None else self.log + (entry,)
        return Xadg(tuple(arguments), frozenset(attacks), self.features, self.target, self.tree, log)

    def to_json(self) -> dict:
        return {
            "format": "xadg-xadg/1",
            "features": [f.to_json() for f in self.features],
            "target": self.target.to_json(),
            "arguments": [
                {"id": a.id, "support": a.support.to_json(), "conclusion": a.conclusion}
                for a in self.arguments
            ],
            "attacks": sorted([a, b] for a, b in self.attacks),
            "log": list(self.log),
            "tree": None if self.tree is None else self.tree.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> Xadg:
        features = tuple(FeatureDomain.from_json(f) for f in data["features"])
        domains = {f.name: f for f in features}
        args = tuple(
            XArgument(d["id"], DnfSupport.from_json(d["support"], domains), d["conclusion"])
            for d in data["arguments"]
        )
        tree = DecisionTree.from_json(data["tree"]) if data.get("tree") else None
        return cls(
            args,
            frozenset(tuple(p) for p in data["attacks"]),
            features,
            FeatureDomain.from_json(data["target"]),
            tree,
            tuple(data.get("log", ())),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Xadg:
        return cls.from_json(json.loads(Path(path).read_text()))

    def to_dot(self) -> str:
        nodes = []
        for a in self.arguments:
            attrs = {"label": f"a{a.id}\n{a.describe()}"}
            if a.is_predictive:
                attrs.update(shape="box", style="filled", fillcolor="lightblue")
            else:
                attrs.update(shape="ellipse", style="dashed")
            nodes.append((f"a{a.id}", attrs))
        return digraph("xadg", nodes, [(f"a{a}", f"a{b}", {}) for a, b in sorted(self.attacks)])


class ModificationError(ValueError):
    pass


def lift(adg: Adg) -> Xadg:
    """The same graph with every support as a one-predicate DNF."""
    args = tuple(XArgument(a.id, DnfSupport.of(a.predicate), a.conclusion) for a in adg.arguments)
    return Xadg(args, adg.attacks, adg.features, adg.target, adg.tree)


def apply_m1(g: Xadg, arg_id: int, allow_attacked: bool = False) -> Xadg:
    """Remove non-predictive ``arg_id``, folding NOT(its support) into its targets.

    Targets whose support becomes unsatisfiable can never be activated and
    are removed as well.
    """
    a = g.by_id(arg_id)
    if a.is_predictive:
        raise ModificationError(f"a{arg_id} is predictive")
    if g.attackers(arg_id) and not allow_attacked:
        raise ModificationError(f"a{arg_id} is attacked")
    targets = g.targets(arg_id)
    if not targets:
        raise ModificationError(f"a{arg_id} attacks nothing")
    neg = negate(a.support)
    args, vacuous = [], {arg_id}
    for b in g.arguments:
        if b.id == arg_id:
            continue
        if b.id in targets:
            b = replace(b, support=conjoin(b.support, neg))
            if b.support.is_false:
                vacuous.add(b.id)
                continue
        args.append(b)
    attacks = {(x, y) for x, y in g.attacks if x not in vacuous and y not in vacuous}
    entry = {"op": "m1", "removed": arg_id, "targets": sorted(targets)}
    if len(vacuous) > 1:
        entry["vacuous"] = sorted(vacuous - {arg_id})
    return g._with(args, attacks, entry)


def apply_m2(g: Xadg, keep_id: int, drop_id: int) -> Xadg:
    """Merge predictive ``drop_id`` into ``keep_id`` by OR-ing their supports."""
    a, b = g.by_id(keep_id), g.by_id(drop_id)
    if keep_id == drop_id:
        raise ModificationError("cannot merge an argument with itself")
    if not (a.is_predictive and b.is_predictive):
        raise ModificationError("both arguments must be predictive")
    if a.conclusion != b.conclusion:
        raise ModificationError("conclusions differ")
    if g.attackers(keep_id) != g.attackers(drop_id) or g.targets(keep_id) != g.targets(drop_id):
        raise ModificationError("attacker or target sets differ")
    merged = replace(a, support=disjoin(a.support, b.support))
    args = [merged if x.id == keep_id else x for x in g.arguments if x.id != drop_id]
    attacks = {(x, y) for x, y in g.attacks if drop_id not in (x, y)}
    return g._with(args, attacks, {"op": "m2", "kept": keep_id, "merged": drop_id})


def apply_m3(g: Xadg, attack: tuple[int, int]) -> Xadg:
    """Drop one attack, folding NOT(attacker support) into the target."""
    x, y = attack
    if (x, y) not in g.attacks:
        raise ModificationError(f"attack {attack} is absent")
    neg = negate(g.by_id(x).support)
    args = [replace(b, support=conjoin(b.support, neg)) if b.id == y else b for b in g.arguments]
    return g._with(args, g.attacks - {(x, y)}, {"op": "m3", "attack": [x, y]})


def prune_inert(g: Xadg) -> Xadg:
    """Drop non-predictive arguments that neither attack nor are attacked."""
    touched = {x for pair in g.attacks for x in pair}
    dead = sorted(a.id for a in g.arguments if not a.is_predictive and a.id not in touched)
    if not dead:
        return g
    args = [a for a in g.arguments if a.id not in dead]
    return g._with(args, g.attacks, {"op": "prune", "removed": dead})


def support_stats(g: Xadg) -> dict:
    if not g.arguments:
        raise ValueError("support statistics of an empty graph")
    preds = [a.support.n_predicates() for a in g.arguments]
    clauses = [len(a.support.clauses) for a in g.arguments]
    return {
        "min": min(preds),
        "max": max(preds),
        "avg": float(np.mean(preds)),
        "clauses_min": min(clauses),
        "clauses_max": max(clauses),
        "clauses_avg": float(np.mean(clauses)),
    }


@dataclass(frozen=True)
class PipelineConfig:
    max_depth: int = 6
    seed: int = 0
    max_supports: int | None = None
    m1_allow_attacked: bool = False
    prune_inert: bool = True
    guard: bool = True


@dataclass(frozen=True, eq=False)
class PipelineResult:
    tree: DecisionTree
    adg: Adg
    simplified: Adg
    merged: Xadg
    xadg: Xadg


def _m2_candidates(g: Xadg, cap: int | None):
    ids = sorted(a.id for a in g.arguments)
    for i, x in enumerate(ids):
        for y in ids[i + 1 :]:
            try:
                h = apply_m2(g, x, y)
            except ModificationError:
                continue
            if cap is not None and h.by_id(x).support.n_predicates() > cap:
                continue
            yield x, y, h


def _m1_candidates(g: Xadg, cap: int | None, allow_attacked: bool):
    for a in sorted(g.arguments, key=lambda a: a.id):
        try:
            h = apply_m1(g, a.id, allow_attacked)
        except ModificationError:
            continue
        if cap is not None and any(b.support.n_predicates() > cap for b in h.arguments):
            continue
        yield a.id, h


def compact(g: Xadg, config: PipelineConfig = PipelineConfig(), ds: Dataset | None = None) -> tuple[Xadg, Xadg]:
    """Merge (m2) to a fixed point, then fold away non-predictive arguments (m1).

    Returns the graph after the merge loop and the final graph. Non-predictive
    arguments left without any attack are dropped at the end. When
    ``config.guard`` is set and both ``ds`` and ``g.tree`` are available,
    every step is checked against the tree's predictions on ``ds``; a step
    that changes any prediction is skipped and logged as rejected.
    """
    from .inference import predict_codes

    expected = None
    if config.guard and ds is not None and g.tree is not None:
        expected = g.tree.predict_codes(ds)

    def agrees(h: Xadg) -> bool:
        if expected is None:
            return True
        return bool(np.array_equal(predict_codes(h, ds, fallback=-1), expected))

    rejected: set = set()

    def run(step):
        nonlocal g
        while True:
            for key, h in step(g):
                if key in rejected:
                    continue
                if agrees(h):
                    g = h
                    break
                rejected.add(key)
                g = g._with(g.arguments, g.attacks, {"op": "rejected", "step": list(key)})
            else:
                return

    cap, loose = config.max_supports, config.m1_allow_attacked
    run(lambda g: ((("m2", x, y), h) for x, y, h in _m2_candidates(g, cap)))
    merged = g
    run(lambda g: ((("m1", x), h) for x, h in _m1_candidates(g, cap, loose)))
    if config.prune_inert:
        g = prune_inert(g)
    return merged, g


def build_xadg(ds: Dataset, config: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """Fit a tree on ``ds`` and carry it through every stage to an xADG."""
    dt = fit(ds, config.max_depth, config.seed)
    adg = extract_adg(dt)
    simple = simplify_adg(dt, adg)
    merged, final = compact(lift(simple), config, ds)
    return PipelineResult(dt, adg, simple, merged, final)
