"""Abstract argumentation frameworks, labellings and Dung semantics."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Mapping

Arg = Hashable


class Label(str, Enum):
    IN = "in"
    OUT = "out"
    UNDEC = "undec"


class SemanticsError(ValueError):
    pass


@dataclass(frozen=True)
class Framework:
    """``<Ar, R>`` with ``R`` a set of ``(attacker, target)`` pairs."""

    arguments: tuple
    attacks: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "arguments", tuple(self.arguments))
        object.__setattr__(self, "attacks", frozenset(self.attacks))
        if len(set(self.arguments)) != len(self.arguments):
            raise SemanticsError("duplicate argument ids")
        known = set(self.arguments)
        for a, b in self.attacks:
            if a not in known or b not in known:
                raise SemanticsError(f"attack ({a!r}, {b!r}) references an unknown argument")

    @cached_property
    def _plus(self) -> dict:
        out = {a: set() for a in self.arguments}
        for a, b in self.attacks:
            out[a].add(b)
        return out

    @cached_property
    def _minus(self) -> dict:
        out = {a: set() for a in self.arguments}
        for a, b in self.attacks:
            out[b].add(a)
        return out

    def _check(self, a: Arg) -> None:
        if a not in self._plus:
            raise KeyError(f"unknown argument {a!r}")

    def attacked_by(self, a: Arg) -> frozenset:
        """``a+``: arguments that ``a`` attacks."""
        self._check(a)
        return frozenset(self._plus[a])

    def attackers(self, a: Arg) -> frozenset:
        """``a-``: arguments attacking ``a``."""
        self._check(a)
        return frozenset(self._minus[a])

    def attacked_by_set(self, args: Iterable[Arg]) -> frozenset:
        out = set()
        for a in args:
            out |= self.attacked_by(a)
        return frozenset(out)

    def attackers_set(self, args: Iterable[Arg]) -> frozenset:
        out = set()
        for a in args:
            out |= self.attackers(a)
        return frozenset(out)

    def restrict(self, args: Iterable[Arg]) -> Framework:
        keep = set(args)
        return Framework(
            tuple(a for a in self.arguments if a in keep),
            frozenset((a, b) for a, b in self.attacks if a in keep and b in keep),
        )

    def __len__(self) -> int:
        return len(self.arguments)


@dataclass(frozen=True)
class Labelling(Mapping):
    labels: Mapping

    def __getitem__(self, a: Arg) -> Label:
        return self.labels[a]

    def __iter__(self) -> Iterator:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def _with(self, label: Label) -> frozenset:
        return frozenset(a for a, v in self.labels.items() if v == label)

    @property
    def in_args(self) -> frozenset:
        return self._with(Label.IN)

    @property
    def out_args(self) -> frozenset:
        return self._with(Label.OUT)

    @property
    def undec_args(self) -> frozenset:
        return self._with(Label.UNDEC)

    @classmethod
    def from_sets(cls, af: Framework, in_args: Iterable, out_args: Iterable = ()) -> Labelling:
        ins, outs = set(in_args), set(out_args)
        return cls(
            {a: Label.IN if a in ins else Label.OUT if a in outs else Label.UNDEC for a in af.arguments}
        )


def is_conflict_free(af: Framework, args: Iterable[Arg]) -> bool:
    s = set(args)
    return not (s & af.attacked_by_set(s))


def defends(af: Framework, args: Iterable[Arg], a: Arg) -> bool:
    """``args`` defends ``a`` iff every attacker of ``a`` is attacked by ``args``."""
    return af.attackers(a) <= af.attacked_by_set(args)


def is_reinstatement(af: Framework, lab: Mapping) -> bool:
    """Out iff some attacker is in; in iff every attacker is out."""
    if set(lab) != set(af.arguments):
        return False
    for a in af.arguments:
        att = af.attackers(a)
        if (lab[a] == Label.OUT) != any(lab[b] == Label.IN for b in att):
            return False
        if (lab[a] == Label.IN) != all(lab[b] == Label.OUT for b in att):
            return False
    return True


def _grounded(af: Framework) -> tuple[Labelling, int]:
    labels: dict = {}
    rounds = 0
    while True:
        new_in = [
            a
            for a in af.arguments
            if a not in labels and all(labels.get(b) == Label.OUT for b in af.attackers(a))
        ]
        if not new_in:
            break
        rounds += 1
        for a in new_in:
            labels[a] = Label.IN
        for b in af.attacked_by_set(new_in):
            if b not in labels:
                labels[b] = Label.OUT
    for a in af.arguments:
        labels.setdefault(a, Label.UNDEC)
    return Labelling(labels), rounds


def grounded_labelling(af: Framework) -> Labelling:
    """Least fixed point: label in whatever has all attackers out, label out
    whatever an in argument attacks, repeat; everything left is undec."""
    return _grounded(af)[0]


def grounded_extension(af: Framework) -> frozenset:
    return grounded_labelling(af).in_args


def characteristic(af: Framework, args: Iterable[Arg]) -> frozenset:
    """``F(args)``: the arguments defended by ``args``."""
    plus = af.attacked_by_set(args)
    return frozenset(a for a in af.arguments if af.attackers(a) <= plus)


def enumerate_semantics(af: Framework, kind: str, cap: int = 16) -> set[frozenset]:
    """All admissible, complete or preferred extensions by exhaustive search."""
    if kind not in ("admissible", "complete", "preferred"):
        raise SemanticsError(f"unknown semantics {kind!r}")
    n = len(af.arguments)
    if n > cap:
        raise SemanticsError(f"{n} arguments exceed the enumeration cap of {cap}")
    idx = {a: i for i, a in enumerate(af.arguments)}
    plus = [0] * n
    minus = [0] * n
    for a, b in af.attacks:
        plus[idx[a]] |= 1 << idx[b]
        minus[idx[b]] |= 1 << idx[a]

    admissible, complete = [], []
    for s in range(1 << n):
        s_plus = 0
        members = [i for i in range(n) if s >> i & 1]
        for i in members:
            s_plus |= plus[i]
        if s & s_plus:
            continue
        f = 0
        for i in range(n):
            if minus[i] & ~s_plus == 0:
                f |= 1 << i
        if s & ~f:
            continue
        admissible.append(s)
        if s == f:
            complete.append(s)

    if kind == "admissible":
        chosen = admissible
    elif kind == "complete":
        chosen = complete
    else:
        chosen = [s for s in admissible if not any(t != s and t & s == s for t in admissible)]
    return {frozenset(af.arguments[i] for i in range(n) if s >> i & 1) for s in chosen}


_APX_ARG = re.compile(r"^arg\((.+)\)\.$")
_APX_ATT = re.compile(r"^att\((.+),(.+)\)\.$")


def to_apx(af: Framework) -> str:
    """ASPARTIX text: one ``arg(x).`` line per argument, one ``att(x,y).`` per attack."""
    lines = [f"arg({a})." for a in af.arguments]
    lines += [f"att({a},{b})." for a, b in sorted(af.attacks, key=lambda p: (str(p[0]), str(p[1])))]
    return "\n".join(lines) + "\n"


def from_apx(text: str) -> Framework:
    args, atts = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if m := _APX_ARG.match(line):
            args.append(m.group(1).strip())
        elif m := _APX_ATT.match(line):
            atts.append((m.group(1).strip(), m.group(2).strip()))
        else:
            raise SemanticsError(f"cannot parse line {raw!r}")
    return Framework(tuple(args), frozenset(atts))


def to_dot(af: Framework, labelling: Mapping | None = None, names: Mapping | None = None) -> str:
    from .dot import digraph

    colors = {Label.IN: "palegreen", Label.OUT: "lightpink", Label.UNDEC: "lightgrey"}
    nodes = []
    for a in af.arguments:
        attrs = {"label": str(names[a]) if names else str(a)}
        if labelling is not None:
            attrs.update(style="filled", fillcolor=colors[labelling[a]])
        nodes.append((a, attrs))
    return digraph("af", nodes, [(a, b, {}) for a, b in sorted(af.attacks, key=str)])
