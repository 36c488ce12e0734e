"""The embedding: mixed decomposition, border rules, sandboxing, schedulers, ↪."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from .config import Configuration, Task
from .erasure import erase_config, erase_term
from .extensions import PredicateView, Restrictions
from .fmap import EMPTY, FMap
from .ifc import filter_queue, step_ifc_redex
from .syntax import (BORDER_IT, BORDER_TI, IFC, TARGET, Decomposition, Fix, Lam, Recv,
                     TVar, TaskIdV, Term, ToI, ToT, decompose, free_vars, fresh_name,
                     is_value)
from .target import Stuck, step_target


# -- schedulers -------------------------------------------------------------------

@dataclass(frozen=True)
class SchedulerPolicy:
    name: str
    step: Callable[[tuple], tuple]
    done: Callable[[tuple], tuple]
    no_step: Callable[[tuple], tuple]
    sandbox: Callable[[tuple], tuple]


def _rotate(ts: tuple) -> tuple:
    return ts[1:] + ts[:1]


def _drop(ts: tuple) -> tuple:
    return ts[1:]


def _same(ts: tuple) -> tuple:
    return ts


def _seq_done(ts: tuple) -> tuple:
    return ts if len(ts) == 1 else ts[1:]


def _seq_sandbox(ts: tuple) -> tuple:
    return ts[-1:] + ts[:-1]


RR = SchedulerPolicy("rr", _rotate, _drop, _drop, _rotate)
SEQ = SchedulerPolicy("seq", _same, _seq_done, _same, _seq_sandbox)
SCHEDULERS = {"rr": RR, "seq": SEQ}


def scheduler_rr() -> SchedulerPolicy:
    return RR


def scheduler_seq() -> SchedulerPolicy:
    return SEQ


# -- sandbox store policies ----------------------------------------------------------

def kappa_identity(s: FMap) -> FMap:
    return s


def kappa_empty(s: FMap) -> FMap:
    return EMPTY


KAPPAS = {"identity": kappa_identity, "empty": kappa_empty}


@dataclass(frozen=True)
class Semantics:
    """Everything that parameterises ↪ besides the configuration."""
    scheduler: SchedulerPolicy = RR
    kappa: Callable[[FMap], FMap] = kappa_identity
    restrictions: Restrictions | None = None
    recv_filter: Callable = filter_queue

    def step(self, c: Configuration) -> "Step":
        return step_config(c, self)

    def is_terminal(self, c: Configuration) -> bool:
        return is_terminal(c, self.scheduler)

    def erase(self, c: Configuration, l):
        return erase_config(c, l)


class TerminalError(RuntimeError):
    """Stepping a terminal configuration."""


@dataclass(frozen=True, slots=True)
class Step:
    rule: str
    task: tuple
    label: object
    config: Configuration


def is_terminal(c: Configuration, sched: SchedulerPolicy) -> bool:
    ts = c.tasks
    if not ts:
        return True
    return is_value(ts[0].expr) and sched.done(ts) == ts


def decompose_mixed(e: Term) -> Decomposition:
    return decompose(e, cross=True)


def _allowed(sem: Semantics, rule: str, head: Task, focus: Term, c: Configuration) -> bool:
    r = sem.restrictions
    if not r or rule not in r.predicates:
        return True
    view = PredicateView(rule, head.id, head.label, head.clearance,
                         erase_term(focus, head.label),
                         lambda: erase_config(c, head.label))
    return r.allows(view)


def _no_step(c: Configuration, head: Task, sched: SchedulerPolicy) -> Step:
    ts = sched.no_step(c.tasks)
    nc = c if ts is c.tasks else replace(c, tasks=ts)
    return Step("I-noStep", head.id, head.label, nc)


def step_config(c: Configuration, sem: Semantics = Semantics()) -> Step:
    sched = sem.scheduler
    ts = c.tasks
    if not ts:
        raise TerminalError("no tasks left")
    head = ts[0]
    rest = ts[1:]
    expr = head.expr

    if is_value(expr):
        new_ts = sched.done(ts)
        if new_ts == ts:
            raise TerminalError("head task finished and the scheduler keeps it")
        if not _allowed(sem, "I-done", head, expr, c):
            return _no_step(c, head, sched)
        return Step("I-done", head.id, head.label, replace(c, tasks=new_ts))

    d = decompose(expr)
    focus, kind, ctx = d.focus, d.kind, d.context
    try:
        if kind == TARGET:
            r = step_target(head.store, focus)
            rule = r.rule
            new_head = Task(r.store, ctx.plug(r.expr), head.id, head.label,
                            head.clearance, head.fresh)
            nc = replace(c, tasks=sched.step((new_head,) + rest))
        elif kind == BORDER_IT or kind == BORDER_TI:
            rule = "I-border" if kind == BORDER_IT else "T-border"
            new_head = replace(head, expr=ctx.plug(focus.inner.inner))
            nc = replace(c, tasks=sched.step((new_head,) + rest))
        elif kind == IFC:
            eff = step_ifc_redex(c.queues, head.id, head.label, focus,
                                 clearance=head.clearance, lstore=c.lstore,
                                 fresh=head.fresh, recv_filter=sem.recv_filter)
            rule = eff.rule
            if eff.spawn is not None:
                child_id = head.id + (head.fresh,)
                child = Task(sem.kappa(head.store), eff.spawn, child_id, head.label,
                             head.clearance, 0)
                parent = Task(head.store, ctx.plug(TaskIdV(child_id)), head.id, head.label,
                              head.clearance, head.fresh + 1)
                nc = Configuration(c.queues.set(child_id, ()),
                                   sched.sandbox((parent,) + rest + (child,)),
                                   c.registry.set(child_id, head.label), c.lstore)
            else:
                label = head.label if eff.label is None else eff.label
                new_head = Task(head.store, ctx.plug(eff.expr), head.id, label,
                                head.clearance if eff.clearance is None else eff.clearance,
                                head.fresh if eff.fresh is None else eff.fresh)
                registry = c.registry if label == head.label else c.registry.set(head.id, label)
                nc = Configuration(c.queues if eff.queues is None else eff.queues,
                                   sched.step((new_head,) + rest), registry,
                                   c.lstore if eff.lstore is None else eff.lstore)
        else:
            raise Stuck(focus)
    except Stuck:
        return _no_step(c, head, sched)
    if not _allowed(sem, rule, head, focus, c):
        return _no_step(c, head, sched)
    return Step(rule, head.id, head.label, nc)


# -- running -------------------------------------------------------------------------

TERMINAL = "terminal"
BUDGET = "budget-exhausted"
LIVELOCK = "head-livelock"


@dataclass(frozen=True)
class Trace:
    initial: Configuration
    steps: tuple
    outcome: str

    @property
    def final(self) -> Configuration:
        return self.steps[-1].config if self.steps else self.initial

    @property
    def rules(self) -> list[str]:
        return [s.rule for s in self.steps]


def run(c: Configuration, sem: Semantics = Semantics(), max_steps: int = 1000,
        engine=None) -> Trace:
    """Step until terminal, out of budget, or a Seq head that can never move."""
    engine = engine or sem
    steps = []
    cur = c
    for _ in range(max_steps):
        if engine.is_terminal(cur):
            return Trace(c, tuple(steps), TERMINAL)
        s = engine.step(cur)
        steps.append(s)
        if s.rule == "I-noStep" and s.config == cur:
            return Trace(c, tuple(steps), LIVELOCK)
        cur = s.config
    outcome = TERMINAL if engine.is_terminal(cur) else BUDGET
    return Trace(c, tuple(steps), outcome)


def blocking_recv_macro(x1: str, x2: str, body: Term, k: str = "k") -> Term:
    """⌈fix (λk. ⌊recv x1, x2 in body else ⌈k⌉⌋)⌉, renaming k if body mentions it."""
    names = {n for _, n in free_vars(body)}
    if k in names:
        k = fresh_name(k, names)
    return ToI(Fix(Lam(k, ToT(Recv(x1, x2, body, ToI(TVar(k)))))))
