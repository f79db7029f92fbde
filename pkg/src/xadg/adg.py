"""Argumentative decision graphs extracted from decision trees.

Every tree edge becomes one argument whose support is the edge predicate.
Edges into leaves give predictive arguments (conclusion = leaf class), edges
into internal nodes give non-predictive ones (no conclusion).

Edge supports are narrowed by the constraints the path above already puts on
the same feature, so an argument is only activated by instances that can
actually traverse its edge.

Two arguments can attack each other only when their edges do not lie on a
common root-to-leaf path, their features differ and their conclusions
differ. Such a pair gets exactly one attack:

* a non-predictive argument attacks predictive ones whose edge hangs below
  its source node; otherwise it neither attacks nor is attacked;
* between predictive arguments the edge with the shallower source attacks
  the deeper one, ties going to the lower argument id.

The edge leaving a node towards an instance's path is then never attacked
by an activated argument and defeats every activated argument hanging in
the sibling subtree, so grounded classification reproduces the tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator

from .af import Framework
from .dataset import FeatureDomain
from .dot import digraph
from .dtree import DecisionTree, Predicate


@dataclass(frozen=True)
class AdgArgument:
    """``<predicate, conclusion>``; ``predicate`` None means always true."""

    id: int
    predicate: Predicate | None
    conclusion: Any = None
    edge: tuple[int | None, int] | None = None

    @property
    def is_predictive(self) -> bool:
        return self.conclusion is not None

    @property
    def feature(self) -> str | None:
        return None if self.predicate is None else self.predicate.feature

    def describe(self) -> str:
        support = "true" if self.predicate is None else self.predicate.describe()
        concl = "-" if self.conclusion is None else str(self.conclusion)
        return f"<{support}, {concl}>"


@dataclass(frozen=True, eq=False)
class Adg:
    arguments: tuple[AdgArgument, ...]
    attacks: frozenset
    features: tuple[FeatureDomain, ...]
    target: FeatureDomain
    tree: DecisionTree | None = field(default=None, repr=False)

    def __post_init__(self):
        ids = {a.id for a in self.arguments}
        if len(ids) != len(self.arguments):
            raise ValueError("duplicate argument ids")
        for a, b in self.attacks:
            if a not in ids or b not in ids:
                raise ValueError(f"attack ({a}, {b}) references an unknown argument")

    def by_id(self, arg_id: int) -> AdgArgument:
        for a in self.arguments:
            if a.id == arg_id:
                return a
        raise KeyError(arg_id)

    def framework(self) -> Framework:
        return Framework(tuple(a.id for a in self.arguments), self.attacks)

    def to_json(self) -> dict:
        return {
            "format": "xadg-adg/1",
            "features": [f.to_json() for f in self.features],
            "target": self.target.to_json(),
            "arguments": [
                {
                    "id": a.id,
                    "support": None if a.predicate is None else a.predicate.to_json(),
                    "conclusion": a.conclusion,
                    "edge": None if a.edge is None else list(a.edge),
                }
                for a in self.arguments
            ],
            "attacks": sorted([a, b] for a, b in self.attacks),
            "tree": None if self.tree is None else self.tree.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> Adg:
        features = tuple(FeatureDomain.from_json(f) for f in data["features"])
        domains = {f.name: f for f in features}
        args = tuple(
            AdgArgument(
                d["id"],
                None if d["support"] is None else Predicate.from_json(d["support"], domains),
                d["conclusion"],
                None if d["edge"] is None else tuple(d["edge"]),
            )
            for d in data["arguments"]
        )
        tree = DecisionTree.from_json(data["tree"]) if data.get("tree") else None
        return cls(
            args,
            frozenset(tuple(p) for p in data["attacks"]),
            features,
            FeatureDomain.from_json(data["target"]),
            tree,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Adg:
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
        edges = [(f"a{a}", f"a{b}", {}) for a, b in sorted(self.attacks)]
        return digraph("adg", nodes, edges)


def attack_relation(tree: DecisionTree, args: tuple[AdgArgument, ...]) -> frozenset:
    """Attack pairs between edge arguments of ``tree`` (see module docstring)."""
    ancestors = {n.id: set(tree.path(n.id)[:-1]) for n in tree.nodes}
    edged = [a for a in args if a.edge is not None and a.edge[0] is not None]
    out = set()
    for u in edged:
        su, cu = u.edge
        for v in edged:
            if v is u or not v.is_predictive:
                continue
            sv, cv = v.edge
            if su == sv or u.feature == v.feature or u.conclusion == v.conclusion:
                continue
            # one edge lies below the other on a root-to-leaf path
            if cu == sv or cu in ancestors[sv] or cv == su or cv in ancestors[su]:
                continue
            if su in ancestors[sv]:
                out.add((u.id, v.id))
            elif u.is_predictive and sv not in ancestors[su]:
                if (tree.nodes[su].depth, u.id) < (tree.nodes[sv].depth, v.id):
                    out.add((u.id, v.id))
    return frozenset(out)


def extract_adg(dt: DecisionTree) -> Adg:
    """Build the well-formed ADG of a decision tree."""
    if dt.root.is_leaf:
        arg = AdgArgument(0, None, dt.classes[dt.root.prediction], (None, 0))
        return Adg((arg,), frozenset(), dt.features, dt.target, dt)
    args = []
    edges = [n for n in dt.nodes if n.parent is not None]
    for node in [n for n in edges if n.is_leaf] + [n for n in edges if not n.is_leaf]:
        concl = dt.classes[node.prediction] if node.is_leaf else None
        pred = dt.restricted_edge_predicate(node.id)
        args.append(AdgArgument(len(args), pred, concl, (node.parent, node.id)))
    args = tuple(args)
    return Adg(args, attack_relation(dt, args), dt.features, dt.target, dt)


def simplify_steps(dt: DecisionTree, adg: Adg) -> Iterator[Adg]:
    """Yield the ADG after each collapse performed by :func:`simplify_adg`."""
    current = adg
    changed = True
    while changed:
        changed = False
        for node in dt.nodes:
            if node.is_leaf:
                continue
            nxt = _collapse(dt, current, node.id)
            if nxt is None or len(nxt.attacks) > len(current.attacks):
                continue
            current = nxt
            changed = True
            yield current


def _collapse(dt: DecisionTree, adg: Adg, node_id: int) -> Adg | None:
    node = dt.nodes[node_id]
    by_edge = {a.edge: a for a in adg.arguments if a.edge is not None}
    a = by_edge.get((node.id, node.true_child))
    b = by_edge.get((node.id, node.false_child))
    if a is None or b is None:
        return None
    if not (a.is_predictive and b.is_predictive) or a.conclusion != b.conclusion:
        return None
    if a.feature != b.feature:
        return None
    reachable = dt.reachable_region(node.id, a.feature)
    if not reachable.issubset(a.predicate.region | b.predicate.region):
        return None
    args = {x.id: x for x in adg.arguments if x.id not in (a.id, b.id)}
    if node.parent is None:
        new_id = max([a.id, b.id, *args]) + 1
        args[new_id] = AdgArgument(new_id, None, a.conclusion, (None, node.id))
    else:
        c = by_edge[(node.parent, node.id)]
        args[c.id] = replace(c, conclusion=a.conclusion)
    kept = tuple(sorted(args.values(), key=lambda x: x.id))
    return Adg(kept, attack_relation(dt, kept), adg.features, adg.target, dt)


def simplify_adg(dt: DecisionTree, adg: Adg) -> Adg:
    """Collapse sibling leaf arguments that draw the same conclusion.

    When both edges leaving a node ``N`` are predictive with equal
    conclusions and jointly cover every value of the split feature that can
    reach ``N``, both are removed and the edge entering ``N`` takes over
    their conclusion. Repeats until nothing changes. If ``N`` is the root the
    result is a single always-true argument.

    Attacks are recomputed with the extraction rule on the pruned tree, which
    can occasionally add more attacks than the collapse removes. Such a
    collapse is skipped, so the attack count never grows.
    """
    out = adg
    for out in simplify_steps(dt, adg):
        pass
    return out


def check_well_formed(adg: Adg) -> list[str]:
    """Violations of the three well-formedness constraints; empty iff well-formed."""
    out = []
    args = {a.id: a for a in adg.arguments}
    for x, y in sorted(adg.attacks):
        a, b = args[x], args[y]
        if a.feature is not None and a.feature == b.feature:
            out.append(f"same-feature attack a{x} -> a{y} on {a.feature!r}")
        if a.conclusion is not None and a.conclusion == b.conclusion:
            out.append(f"same-conclusion attack a{x} -> a{y} ({a.conclusion!r})")
    pred = [a for a in adg.arguments if a.is_predictive]
    for i, a in enumerate(pred):
        for b in pred[i + 1 :]:
            if a.conclusion == b.conclusion or a.feature == b.feature:
                continue
            if (a.id, b.id) not in adg.attacks and (b.id, a.id) not in adg.attacks:
                out.append(f"missing attack between a{a.id} and a{b.id}")
    return out
