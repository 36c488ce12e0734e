"""Single shared heap variant and its isomorphism to the per-task-store language.

Target addresses are pairs ``CAddr(task, index)`` into one global heap.  The
engine always refuses to let addresses leave a task (the norefs discipline),
which is what makes the heap split back into independent per-task stores.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .config import Configuration, ErasedConfiguration, Task
from .erasure import erase_lstore, erase_queues, erase_term
from .extensions import PredicateView, Restrictions, combine, p_norefs
from .fmap import EMPTY, FMap
from .ifc import filter_queue, step_ifc_redex
from .labels import Label, leq
from .runtime import (RR, SchedulerPolicy, Semantics, Step, TerminalError, kappa_empty,
                      run)
from .syntax import (BORDER_IT, BORDER_TI, IFC, TARGET, Addr, Assign, CAddr, Deref, Ref,
                     TaskIdV, Term, address_vars, decompose, is_value, map_kids)
from .target import Stuck, step_target


@dataclass(frozen=True, slots=True)
class CTask:
    expr: Term
    id: tuple
    label: Label
    clearance: Label
    fresh: int = 0


@dataclass(frozen=True, slots=True)
class ConcreteConfiguration:
    queues: FMap
    heap: FMap          # (task id, index) -> target value
    tasks: tuple        # tuple[CTask, ...]
    registry: FMap
    lstore: FMap = field(default_factory=FMap)


class NotWellFormed(ValueError):
    pass


# -- well-formedness -----------------------------------------------------------------

def _caddrs(t: Term):
    return (a for a in address_vars(t) if type(a) is CAddr)


def _plain_addrs(t: Term) -> bool:
    return any(type(a) is Addr for a in address_vars(t))


def _target_addrs(t: Term) -> bool:
    return any(type(a) in (Addr, CAddr) for a in address_vars(t))


def wf_violations(c: ConcreteConfiguration) -> list[str]:
    out = []
    ids = [t.id for t in c.tasks]
    if len(set(ids)) != len(ids):
        out.append("duplicate task ids")
    live = set(ids)
    for t in c.tasks:
        for a in _caddrs(t.expr):
            if a.task != t.id:
                out.append(f"task {t.id} holds foreign address {a}")
        if _plain_addrs(t.expr):
            out.append(f"task {t.id} holds an untagged address")
    for (i, a), v in c.heap.items():
        if i not in live:
            out.append(f"heap cell {(i, a)} belongs to no live task")
        for x in _caddrs(v):
            if x.task != i:
                out.append(f"heap cell {(i, a)} holds foreign address {x}")
    for i, q in c.queues.items():
        for m in q:
            if _target_addrs(m.payload):
                out.append(f"queue {i} carries an address")
    for k, cell in c.lstore.items():
        if _target_addrs(cell.value):
            out.append(f"labeled cell {k} stores an address")
    return out


def wf(c: ConcreteConfiguration) -> bool:
    return not wf_violations(c)


# -- the isomorphism -------------------------------------------------------------------

def _untag(t: Term) -> Term:
    if type(t) is CAddr:
        return Addr(t.index)
    if not _target_addrs(t):
        return t
    return map_kids(t, _untag)


def _tag(t: Term, owner: tuple) -> Term:
    if type(t) is Addr:
        return CAddr(owner, t.index)
    if not _target_addrs(t):
        return t
    return map_kids(t, lambda k: _tag(k, owner))


def _no_addresses(t: Term, where: str) -> Term:
    if _target_addrs(t):
        raise NotWellFormed(f"{where} carries an address that belongs to no task")
    return t


def iso_f(c: ConcreteConfiguration) -> Configuration:
    """Split the heap into one store per task, dropping the owner tags."""
    problems = wf_violations(c)
    if problems:
        raise NotWellFormed("; ".join(problems))
    stores: dict[tuple, dict] = {t.id: {} for t in c.tasks}
    for (i, a), v in c.heap.items():
        stores[i][a] = _untag(v)
    tasks = tuple(Task(FMap(stores[t.id]), _untag(t.expr), t.id, t.label, t.clearance, t.fresh)
                  for t in c.tasks)
    return Configuration(c.queues, tasks, c.registry, c.lstore)


def iso_f_inv(c: Configuration) -> ConcreteConfiguration:
    """Merge per-task stores into one heap keyed by (task, index)."""
    heap = {}
    tasks = []
    for t in c.tasks:
        for a, v in t.store.items():
            heap[(t.id, a)] = _tag(v, t.id)
        tasks.append(CTask(_tag(t.expr, t.id), t.id, t.label, t.clearance, t.fresh))
    for i, q in c.queues.items():
        for m in q:
            _no_addresses(m.payload, f"queue {i}")
    for k, cell in c.lstore.items():
        _no_addresses(cell.value, f"labeled cell {k}")
    if len({t.id for t in tasks}) != len(tasks):
        raise NotWellFormed("duplicate task ids")
    return ConcreteConfiguration(c.queues, FMap(heap), tuple(tasks), c.registry, c.lstore)


# -- erasure ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ErasedConcrete(ConcreteConfiguration):
    pass


def erase_concrete(c: ConcreteConfiguration, l: Label) -> ErasedConcrete:
    visible = {t.id for t in c.tasks if leq(t.label, l)}
    tasks = tuple(CTask(erase_term(t.expr, l), t.id, t.label, t.clearance, t.fresh)
                  for t in c.tasks if t.id in visible)
    heap = FMap({k: erase_term(v, l) for k, v in c.heap.items() if k[0] in visible})
    registry = FMap({i: lab for i, lab in c.registry.items() if leq(lab, l)})
    return ErasedConcrete(erase_queues(c.queues, c.registry, l), heap, tasks, registry,
                          erase_lstore(c.lstore, l))


# -- stepping ------------------------------------------------------------------------------

def _step_heap(heap: FMap, owner: tuple, redex: Term):
    cls = type(redex)
    if cls is Ref:
        if not is_value(redex.init):
            raise Stuck(redex)
        used = [a for (i, a) in heap if i == owner]
        a = max(used) + 1 if used else 0
        return "T-ref", heap.set((owner, a), redex.init), CAddr(owner, a)
    if cls is Deref:
        r = redex.ref
        if type(r) is CAddr and (r.task, r.index) in heap:
            return "T-deref", heap, heap[(r.task, r.index)]
        raise Stuck(redex)
    if cls is Assign:
        r, v = redex.ref, redex.value
        if type(r) is CAddr and is_value(v):
            return "T-ass", heap.set((r.task, r.index), v), v
        raise Stuck(redex)
    if type(redex) is Addr:
        raise Stuck(redex)
    s = step_target(EMPTY, redex)   # the store-free rules
    return s.rule, heap, s.expr


@dataclass(frozen=True)
class ConcreteSemantics:
    scheduler: SchedulerPolicy = RR
    extra: Restrictions | None = None       # families on top of the built-in norefs
    recv_filter: object = filter_queue

    @property
    def restrictions(self) -> Restrictions:
        fams = [p_norefs()] + ([self.extra] if self.extra else [])
        return combine(*fams)

    def abstract(self) -> Semantics:
        """The per-task-store semantics this engine is isomorphic to."""
        return Semantics(self.scheduler, kappa_empty, self.restrictions, self.recv_filter)

    def is_terminal(self, c: ConcreteConfiguration) -> bool:
        ts = c.tasks
        return not ts or (is_value(ts[0].expr) and self.scheduler.done(ts) == ts)

    def erase(self, c: ConcreteConfiguration, l: Label) -> ErasedConcrete:
        return erase_concrete(c, l)

    def step(self, c: ConcreteConfiguration) -> Step:
        return step_concrete(c, self)


_RULE_NAMES = {"I-sandbox": "C-sandbox", "I-send": "C-send"}


def _gc(c: ConcreteConfiguration) -> ConcreteConfiguration:
    live = {t.id for t in c.tasks}
    if all(i in live for (i, _) in c.heap):
        return c
    return replace(c, heap=FMap({k: v for k, v in c.heap.items() if k[0] in live}))


def step_concrete(c: ConcreteConfiguration, sem: ConcreteSemantics) -> Step:
    sched = sem.scheduler
    ts = c.tasks
    if not ts:
        raise TerminalError("no tasks left")
    head, rest = ts[0], ts[1:]
    restrictions = sem.restrictions

    def allowed(rule, focus):
        if rule not in restrictions.predicates:
            return True
        view = PredicateView(rule, head.id, head.label, head.clearance,
                             erase_term(focus, head.label),
                             lambda: erase_concrete(c, head.label))
        return restrictions.allows(view)

    def no_step():
        nts = sched.no_step(ts)
        nc = c if nts is ts else _gc(replace(c, tasks=nts))
        return Step("I-noStep", head.id, head.label, nc)

    if is_value(head.expr):
        nts = sched.done(ts)
        if nts == ts:
            raise TerminalError("head task finished and the scheduler keeps it")
        if not allowed("I-done", head.expr):
            return no_step()
        return Step("I-done", head.id, head.label, _gc(replace(c, tasks=nts)))

    d = decompose(head.expr)
    focus, kind, ctx = d.focus, d.kind, d.context
    try:
        if kind == TARGET:
            rule, heap, e = _step_heap(c.heap, head.id, focus)
            nh = CTask(ctx.plug(e), head.id, head.label, head.clearance, head.fresh)
            nc = replace(c, heap=heap, tasks=sched.step((nh,) + rest))
        elif kind in (BORDER_IT, BORDER_TI):
            rule = "I-border" if kind == BORDER_IT else "T-border"
            nh = replace(head, expr=ctx.plug(focus.inner.inner))
            nc = replace(c, tasks=sched.step((nh,) + rest))
        elif kind == IFC:
            eff = step_ifc_redex(c.queues, head.id, head.label, focus,
                                 clearance=head.clearance, lstore=c.lstore,
                                 fresh=head.fresh, recv_filter=sem.recv_filter)
            rule = eff.rule
            if eff.spawn is not None:
                cid = head.id + (head.fresh,)
                child = CTask(eff.spawn, cid, head.label, head.clearance, 0)
                parent = CTask(ctx.plug(TaskIdV(cid)), head.id, head.label, head.clearance,
                               head.fresh + 1)
                nc = ConcreteConfiguration(c.queues.set(cid, ()), c.heap,
                                           sched.sandbox((parent,) + rest + (child,)),
                                           c.registry.set(cid, head.label), c.lstore)
            else:
                label = head.label if eff.label is None else eff.label
                nh = CTask(ctx.plug(eff.expr), head.id, label,
                           head.clearance if eff.clearance is None else eff.clearance,
                           head.fresh if eff.fresh is None else eff.fresh)
                reg = c.registry if label == head.label else c.registry.set(head.id, label)
                nc = ConcreteConfiguration(c.queues if eff.queues is None else eff.queues,
                                           c.heap, sched.step((nh,) + rest), reg,
                                           c.lstore if eff.lstore is None else eff.lstore)
        else:
            raise Stuck(focus)
    except Stuck:
        return no_step()
    if not allowed(rule, focus):
        return no_step()
    return Step(_RULE_NAMES.get(rule, rule), head.id, head.label, _gc(nc))


# -- the commuting square ------------------------------------------------------------------

def _abstract_rule(rule: str) -> str:
    return {"C-sandbox": "I-sandbox", "C-send": "I-send"}.get(rule, rule)


def check_functorial(c: ConcreteConfiguration, sem: ConcreteSemantics = ConcreteSemantics(),
                     probes: tuple = ()) -> tuple[bool, str]:
    """Step-then-map equals map-then-step, and erasure commutes with the map."""
    abstract = sem.abstract()
    a = iso_f(c)
    if sem.is_terminal(c) != abstract.is_terminal(a):
        return False, "terminal status differs"
    for l in probes:
        ea = iso_f(erase_concrete(c, l))
        ea = ErasedConfiguration(ea.queues, ea.tasks, ea.registry, ea.lstore)
        if ea != abstract.erase(a, l):
            return False, f"erasure at {l} does not commute with f"
    if sem.is_terminal(c):
        return True, "both terminal"
    sc = sem.step(c)
    sa = abstract.step(a)
    if (_abstract_rule(sc.rule), sc.task, sc.label) != (sa.rule, sa.task, sa.label):
        return False, f"rules differ: {sc.rule} vs {sa.rule}"
    if not wf(sc.config):
        return False, "step broke well-formedness: " + "; ".join(wf_violations(sc.config))
    if iso_f(sc.config) != sa.config:
        return False, "configurations differ after one step"
    return True, sa.rule


def random_wf_config(seed: int, sem: ConcreteSemantics = ConcreteSemantics(),
                     max_walk: int = 30, params=None) -> ConcreteConfiguration:
    """A generated configuration advanced a random number of steps, so heaps fill up."""
    import random
    from .generate import random_config
    rng = random.Random(f"walk:{seed}")
    c = iso_f_inv(random_config(seed, params))
    for _ in range(rng.randint(0, max_walk)):
        if sem.is_terminal(c):
            break
        c = sem.step(c).config
    return c


def run_concrete(c: ConcreteConfiguration, sem: ConcreteSemantics = ConcreteSemantics(),
                 max_steps: int = 1000):
    return run(c, max_steps=max_steps, engine=sem)


__all__ = ["CTask", "ConcreteConfiguration", "ConcreteSemantics", "NotWellFormed", "wf",
           "wf_violations", "iso_f", "iso_f_inv", "erase_concrete", "step_concrete",
           "check_functorial", "random_wf_config", "run_concrete", "ErasedConcrete"]
