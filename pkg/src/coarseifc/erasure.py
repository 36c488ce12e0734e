"""Erasure ε_l and l-equivalence."""
from __future__ import annotations

from .config import Configuration, ErasedConfiguration, Task
from .extensions import LCell
from .fmap import FMap
from .ifc import Message, filter_queue
from .labels import Label, leq
from .syntax import Bullet, Labeled, Term, contains_labeled, map_kids

_BULLET = Bullet()


def erase_term(t: Term, l: Label) -> Term:
    """Homomorphic, except that ``Labeled l' e`` with l' ⋢ l keeps only its label."""
    if not contains_labeled(t):
        return t
    cls = type(t)
    if cls is Labeled:
        if not leq(t.label, l):
            return t if type(t.body) is Bullet else Labeled(t.label, _BULLET)
        body = erase_term(t.body, l)
        return t if body is t.body else Labeled(t.label, body)
    if not cls.kids:
        return t
    return map_kids(t, lambda k: erase_term(k, l))


def erase_store(store: FMap, l: Label) -> FMap:
    out = {a: erase_term(v, l) for a, v in store.items()}
    return store if all(out[a] is store[a] for a in out) else FMap(out)


def erase_task(t: Task, l: Label) -> Task | None:
    if not leq(t.label, l):
        return None
    store, expr = erase_store(t.store, l), erase_term(t.expr, l)
    if store is t.store and expr is t.expr:
        return t
    return Task(store, expr, t.id, t.label, t.clearance, t.fresh)


def erase_queue(q: tuple, l: Label) -> tuple:
    """ε_l(Θ) = Θ ⪯ l, with payloads erased as terms."""
    out = []
    for m in filter_queue(q, l):
        p = erase_term(m.payload, l)
        out.append(m if p is m.payload else Message(m.label, m.sender, p))
    return tuple(out)


def erase_queues(queues: FMap, registry: FMap, l: Label) -> FMap:
    return FMap({i: erase_queue(q, l) for i, q in queues.items() if leq(registry[i], l)})


def erase_lstore(lstore: FMap, l: Label) -> FMap:
    out = {}
    for k, cell in lstore.items():
        if not leq(cell.creator, l):
            continue  # allocated by an unobservable task
        if not leq(cell.label, l):
            out[k] = cell if type(cell.value) is Bullet else LCell(cell.label, cell.creator, _BULLET)
        else:
            out[k] = LCell(cell.label, cell.creator, erase_term(cell.value, l))
    return FMap(out)


def erase_config(c: Configuration, l: Label) -> ErasedConfiguration:
    tasks = tuple(e for e in (erase_task(t, l) for t in c.tasks) if e is not None)
    registry = FMap({i: lab for i, lab in c.registry.items() if leq(lab, l)})
    return ErasedConfiguration(erase_queues(c.queues, c.registry, l), tasks, registry,
                               erase_lstore(c.lstore, l))


def l_equiv(c1: Configuration, c2: Configuration, l: Label) -> bool:
    return erase_config(c1, l) == erase_config(c2, l)
