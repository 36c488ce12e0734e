"""Small-step rules of the target calculus over a per-task store.

A store is an ``FMap`` from integer indices to target values; ``Addr(i)``
points into it.  ``step_target`` handles a single redex; the embedding in
``runtime`` locates redexes and plugs results back.
"""
from __future__ import annotations

from dataclasses import dataclass

from .fmap import FMap
from .syntax import (Addr, App, Assign, Decomposition, Deref, Diverge, Fix, If, Lam,
                     Ref, TBool, Term, decompose, free_vars, fresh_name, is_value, subst)


class Stuck(Exception):
    """No rule applies to the focus."""


@dataclass(frozen=True, slots=True)
class TargetStep:
    rule: str
    store: FMap
    expr: Term


def fresh_index(store) -> int:
    return max(store) + 1 if store else 0


def step_target(store: FMap, redex: Term) -> TargetStep:
    cls = type(redex)
    if cls is App:
        fn, arg = redex.fn, redex.arg
        if type(fn) is Lam and is_value(arg):
            return TargetStep("T-app", store, subst(fn.body, fn.param, arg, "T"))
    elif cls is If:
        c = redex.cond
        if type(c) is TBool:
            return TargetStep("T-ifTrue" if c.value else "T-ifFalse", store,
                              redex.then if c.value else redex.orelse)
    elif cls is Ref:
        if is_value(redex.init):
            a = fresh_index(store)
            return TargetStep("T-ref", store.set(a, redex.init), Addr(a))
    elif cls is Deref:
        r = redex.ref
        if type(r) is Addr and r.index in store:
            return TargetStep("T-deref", store, store[r.index])
    elif cls is Assign:
        r, v = redex.ref, redex.value
        if type(r) is Addr and is_value(v):
            return TargetStep("T-ass", store.set(r.index, v), v)
    elif cls is Fix:
        f = redex.fn
        if type(f) is Lam:
            return TargetStep("T-fix", store, subst(f.body, f.param, redex, "T"))
    elif cls is Diverge:
        return TargetStep("T-diverge", store, redex)
    raise Stuck(redex)


def decompose_target(e: Term) -> Decomposition:
    """Context/focus split that stops at nested ⌊·⌋ payloads still running."""
    return decompose(e, cross=False)


def let(x: str, e1: Term, e2: Term) -> Term:
    return App(Lam(x, e2), e1)


def seq(e1: Term, e2: Term) -> Term:
    x = fresh_name("_", {n for _, n in free_vars(e2)})
    return App(Lam(x, e2), e1)
