"""Labeled values, labeled references, clearance, and rule restrictions.

A restriction family maps rule names to predicates.  The runtime calls a
predicate with a ``PredicateView`` assembled from the head task erased at its
own label, so a predicate cannot observe anything the head could not.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from .fmap import FMap
from .labels import Label, join, leq
from .syntax import (LAddr, Labeled, LabelV, Term, address_vars, has_bullet, is_value)
from .target import Stuck

__all__ = ["LCell", "op_label", "op_unlabel", "op_labelOf", "op_new", "op_read", "op_write",
           "PredicateView", "Restrictions", "p_norefs", "clearance_predicates",
           "always_true", "combine", "address_vars", "reference_free"]


@dataclass(frozen=True, slots=True)
class LCell:
    """Labeled-store cell: protecting label, label of the creating task, contents."""
    label: Label
    creator: Label
    value: Term


def _label_arg(t: Term) -> Label:
    if type(t) is not LabelV:
        raise Stuck(t)
    return t.label


def _flows(a: Label, b: Label) -> bool:
    return a.kind == b.kind and leq(a, b)


def op_label(l_new: Term, body: Term, cur: Label) -> Term:
    lab = _label_arg(l_new)
    if not _flows(cur, lab):
        raise Stuck(l_new)
    return Labeled(lab, body)


def op_unlabel(v: Term, cur: Label) -> tuple[Term, Label]:
    if type(v) is not Labeled or v.label.kind != cur.kind:
        raise Stuck(v)
    return v.body, join(cur, v.label)


def op_labelOf(v: Term) -> tuple[str, Term]:
    if type(v) is Labeled:
        return "I-labelOf", LabelV(v.label)
    if type(v) is LAddr:
        return "I-labelOf2", LabelV(v.label)
    raise Stuck(v)


def op_new(l_new: Term, v: Term, cur: Label, lstore: FMap, key: tuple) -> tuple[Term, FMap]:
    lab = _label_arg(l_new)
    if not _flows(cur, lab) or not is_value(v) or key in lstore:
        raise Stuck(l_new)
    return LAddr(key, lab), lstore.set(key, LCell(lab, cur, v))


def op_read(ref: Term, cur: Label, lstore: FMap) -> tuple[Term, Label]:
    if type(ref) is not LAddr or ref.key not in lstore:
        raise Stuck(ref)
    cell = lstore[ref.key]
    if cell.label != ref.label or cell.label.kind != cur.kind:
        raise Stuck(ref)
    return cell.value, join(cur, ref.label)


def op_write(ref: Term, v: Term, cur: Label, lstore: FMap) -> FMap:
    if type(ref) is not LAddr or ref.key not in lstore or not is_value(v):
        raise Stuck(ref)
    cell = lstore[ref.key]
    if cell.label != ref.label or not _flows(cur, ref.label):
        raise Stuck(ref)
    return lstore.set(ref.key, LCell(cell.label, cell.creator, v))


# -- restrictions -----------------------------------------------------------------

@dataclass(frozen=True)
class PredicateView:
    """What a predicate may look at: the head task erased at its own label."""
    rule: str
    task_id: tuple
    label: Label
    clearance: Label
    redex: Term                   # the focus, erased at ``label``
    erased: Callable = field(default=None, repr=False, compare=False)  # () -> erased config


Predicate = Callable[[PredicateView], bool]


@dataclass(frozen=True)
class Restrictions:
    name: str
    predicates: Mapping[str, tuple[Predicate, ...]]

    def allows(self, view: PredicateView) -> bool:
        for p in self.predicates.get(view.rule, ()):
            if not p(view):
                return False
        return True

    def __bool__(self) -> bool:
        return bool(self.predicates)


def combine(*families: Restrictions) -> Restrictions:
    merged: dict[str, tuple] = {}
    for fam in families:
        for rule, preds in fam.predicates.items():
            assert rule != "I-noStep", "I-noStep cannot be restricted"
            merged[rule] = merged.get(rule, ()) + tuple(preds)
    return Restrictions("+".join(f.name for f in families) or "none", merged)


def always_true(rules=("I-send", "I-sandbox", "I-setLabel", "T-app", "I-recv")) -> Restrictions:
    return Restrictions("true", {r: (lambda view: True,) for r in rules})


def reference_free(t: Term) -> bool:
    """AV(t) = ∅, judged on an erased term: opaque (erased) parts count as unsafe."""
    return not address_vars(t) and not has_bullet(t)


def p_norefs() -> Restrictions:
    """No addresses may leave a task: sandbox bodies, payloads, labeled-store contents."""
    return Restrictions("norefs", {
        "I-send": (lambda v: reference_free(v.redex.payload),),
        "I-sandbox": (lambda v: reference_free(v.redex.body),),
        "I-new": (lambda v: reference_free(v.redex.value),),
        "I-write": (lambda v: reference_free(v.redex.value),),
    })


def clearance_predicates() -> Restrictions:
    def set_label(v):
        return _flows(v.redex.label.label, v.clearance)

    def send(v):
        return _flows(v.redex.label.label, v.clearance)

    def new(v):
        return _flows(v.redex.label.label, v.clearance)

    def sandbox(v):
        return _flows(v.label, v.clearance)

    def set_clearance(v):
        return _flows(v.redex.label.label, v.clearance)

    def unlabel(v):
        return _flows(join(v.label, v.redex.value.label), v.clearance)

    def read(v):
        return _flows(join(v.label, v.redex.ref.label), v.clearance)

    return Restrictions("clearance", {
        "I-setLabel": (set_label,), "I-send": (send,), "I-new": (new,),
        "I-sandbox": (sandbox,), "I-setClearance": (set_clearance,),
        "I-unlabel": (unlabel,), "I-read": (read,),
    })
