"""Security label lattices.

Two instances are provided: the two-point lattice ``pub < sec`` and the
powerset lattice over a declared set of principals, ordered by inclusion.
Labels carry their lattice so that mixing instances is caught early.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator


class LatticeError(ValueError):
    """Raised when labels from different lattice instances are combined."""


class Lattice:
    name: str

    def top(self) -> "Label":
        raise NotImplementedError

    def bottom(self) -> "Label":
        raise NotImplementedError

    def elements(self) -> Iterator["Label"]:
        raise NotImplementedError

    def parse(self, text: str) -> "Label":
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class Label:
    """A lattice element. ``level`` is 0/1 for two-point, a frozenset otherwise."""

    lattice: Lattice = field(compare=False, repr=False, hash=False)
    kind: str
    level: object

    def __str__(self) -> str:
        if self.kind == "two":
            return "sec" if self.level else "pub"
        return "{" + ",".join(sorted(self.level)) + "}"

    def __repr__(self) -> str:
        return f"Label({self})"


class TwoPoint(Lattice):
    name = "two-point"

    def __init__(self) -> None:
        self.pub = Label(self, "two", 0)
        self.sec = Label(self, "two", 1)

    def top(self) -> Label:
        return self.sec

    def bottom(self) -> Label:
        return self.pub

    def elements(self) -> Iterator[Label]:
        yield self.pub
        yield self.sec

    def parse(self, text: str) -> Label:
        if text == "pub":
            return self.pub
        if text == "sec":
            return self.sec
        raise LatticeError(f"not a two-point label: {text!r}")

    def __repr__(self) -> str:
        return "TwoPoint()"


class Powerset(Lattice):
    name = "powerset"

    def __init__(self, principals: Iterable[str]) -> None:
        self.principals = frozenset(principals)

    def of(self, *names: str) -> Label:
        s = frozenset(names)
        if not s <= self.principals:
            raise LatticeError(f"unknown principals: {sorted(s - self.principals)}")
        return Label(self, "set", s)

    def top(self) -> Label:
        return Label(self, "set", self.principals)

    def bottom(self) -> Label:
        return Label(self, "set", frozenset())

    def elements(self) -> Iterator[Label]:
        names = sorted(self.principals)
        for mask in range(1 << len(names)):
            yield self.of(*(n for i, n in enumerate(names) if mask >> i & 1))

    def parse(self, text: str) -> Label:
        text = text.strip()
        if not (text.startswith("{") and text.endswith("}")):
            raise LatticeError(f"not a powerset label: {text!r}")
        body = text[1:-1].strip()
        names = [p.strip() for p in body.split(",")] if body else []
        return self.of(*names)

    def __repr__(self) -> str:
        return f"Powerset({sorted(self.principals)})"


TWO_POINT = TwoPoint()
PUB = TWO_POINT.pub
SEC = TWO_POINT.sec


def _same(l1: Label, l2: Label) -> None:
    if l1.kind != l2.kind:
        raise LatticeError(f"labels {l1} and {l2} come from different lattices")


def leq(l1: Label, l2: Label) -> bool:
    """l1 flows to l2."""
    if l1.kind == "two" and l2.kind == "two":
        return l1.level <= l2.level
    _same(l1, l2)
    return l1.level <= l2.level


def join(l1: Label, l2: Label) -> Label:
    _same(l1, l2)
    if l1.kind == "two":
        return l1 if l1.level >= l2.level else l2
    return Label(l1.lattice, "set", l1.level | l2.level)


def meet(l1: Label, l2: Label) -> Label:
    _same(l1, l2)
    if l1.kind == "two":
        return l1 if l1.level <= l2.level else l2
    return Label(l1.lattice, "set", l1.level & l2.level)


def parse_label(text: str, lattice: Lattice | None = None) -> Label:
    """Parse a label literal; without a lattice the literal picks one."""
    if lattice is not None:
        return lattice.parse(text)
    if text in ("pub", "sec"):
        return TWO_POINT.parse(text)
    body = text.strip()[1:-1]
    names = [p.strip() for p in body.split(",") if p.strip()]
    return Powerset(names).of(*names)
