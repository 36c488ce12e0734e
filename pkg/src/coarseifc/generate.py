"""Random programs and l-equivalent configuration pairs.

Low structure of a pair is drawn from one random stream and every erased
region (high tasks, hidden messages, labeled secrets) from a separate
stream per side, so both sides agree on everything an observer at ``pub``
can see.  Only the two-point lattice is generated.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .config import Configuration, Task, make_config
from .fmap import EMPTY
from .ifc import Message
from .labels import PUB, SEC, Label
from .runtime import blocking_recv_macro
from .syntax import (App, Assign, Deref, Diverge, GetClearance, GetLabel, GetTaskId,
                     If, IVar, LabelE, LabelOf, LabelOp, LabelV, Labeled, Lam, New, Read,
                     Recv, Ref, Sandbox, Send, SetClearance, SetLabel, TBool, TVar, TaskIdV,
                     Term, ToI, ToT, Unit, Unlabel, Write)


@dataclass
class GenParams:
    max_tasks: int = 4
    max_depth: int = 6          # bound on generator nesting, not on runtime growth
    p_high: float = 0.4
    p_absent: float = 0.25      # a high task may be finished (absent) on either side
    extensions: bool = True
    clearance: bool = False
    p_blocking: float = 0.004
    p_diverge_high: float = 0.04
    p_diverge_low: float = 0.01
    p_ref_payload: float = 0.08


def seq_i(a: Term, b: Term, x: str) -> Term:
    """IFC-level ``a; b`` through the target language."""
    return ToI(App(Lam(x, ToT(b)), ToT(a)))


class _Gen:
    def __init__(self, rng: random.Random, high: bool, ids: list, params: GenParams,
                 secret: "_Gen | None" = None, prefix: str = "v"):
        self.rng, self.high, self.ids, self.p = rng, high, ids, params
        self.secret = secret      # generator for erased regions, None when there are none
        self.prefix = prefix
        self.n = 0

    def name(self) -> str:
        self.n += 1
        return f"{self.prefix}{self.n}"

    def lab(self) -> Term:
        """A label argument; ``(getLabel)`` keeps working after the task's label rose."""
        r = self.rng.random()
        if r < 0.6:
            return GetLabel()
        if self.high or r < 0.75:
            return LabelV(SEC)
        return LabelV(PUB)

    def dest(self) -> Term:
        r = self.rng.random()
        if r < 0.25:
            return GetTaskId()
        return TaskIdV(self.rng.choice(self.ids))

    def tbool(self) -> Term:
        return TBool(self.rng.random() < 0.5)

    def payload(self) -> Term:
        r = self.rng.random()
        if r < self.p.p_ref_payload:
            return ToI(Ref(self.tbool()))
        if r < 0.75:
            return ToI(self.tbool())
        if r < 0.8:
            return GetLabel()
        if r < 0.88:
            return Labeled(SEC, self.secret_body()) if self.secret else LabelV(PUB)
        if r < 0.94:
            return LabelV(self.rng.choice((PUB, SEC)))
        return Unit()

    def secret_body(self) -> Term:
        s = self.secret
        if s.rng.random() < 0.6:
            return ToI(s.tbool())
        return s.stmt(2)

    def leaf(self) -> Term:
        r = self.rng.random()
        if r < 0.35:
            return Send(self.dest(), self.lab(), self.payload())
        if r < 0.5:
            return GetLabel()
        if r < 0.6:
            return LabelOp(self.rng.choice(("leq", "join", "meet")), GetLabel(), self.lab())
        if r < 0.7:
            return ToI(self.tbool())
        if r < 0.8:
            return SetLabel(LabelV(SEC))
        if r < 0.9:
            x = self.name()
            return ToI(App(Lam(x, TVar(x)), self.tbool()))
        return GetTaskId()

    def stmt(self, d: int) -> Term:
        if d <= 1:
            return self.leaf()
        rng, p = self.rng, self.p
        kinds = ["send", "recv", "recv", "leaf", "setLabel", "sandbox", "refs", "branch",
                 "seq", "sendSandbox"]
        if p.extensions:
            kinds += ["labeled", "lref"]
            if self.secret:
                kinds += ["unlabelSecret"]
        if p.clearance:
            kinds += ["clearance"]
        k = rng.choice(kinds)
        if rng.random() < (p.p_diverge_high if self.high else p.p_diverge_low):
            return ToI(Diverge())
        if rng.random() < p.p_blocking:
            m, s = self.name(), self.name()
            return blocking_recv_macro(m, s, self.use_msg(m, s, d - 1))
        if k == "send":
            return Send(self.dest(), self.lab(), self.payload())
        if k == "recv":
            m, s = self.name(), self.name()
            return Recv(m, s, self.use_msg(m, s, d - 1), self.stmt(d - 1))
        if k == "leaf":
            return self.leaf()
        if k == "setLabel":
            return seq_i(SetLabel(LabelV(SEC)), self.stmt(d - 1), self.name())
        if k == "sandbox":
            return Sandbox(self.program(d - 1))
        if k == "sendSandbox":
            return Send(Sandbox(self.program(d - 1)), self.lab(), self.payload())
        if k == "refs":
            r = self.name()
            body = If(Deref(TVar(r)), ToT(self.stmt(d - 1)), ToT(self.stmt(d - 1)))
            return ToI(App(Lam(r, App(Lam(self.name(), body),
                                      Assign(TVar(r), self.tbool()))),
                           Ref(self.tbool())))
        if k == "branch":
            return ToI(If(self.tbool(), ToT(self.stmt(d - 1)), ToT(self.stmt(d - 1))))
        if k == "seq":
            return seq_i(self.stmt(d - 1), self.stmt(d - 1), self.name())
        if k == "labeled":
            v = LabelE(self.lab(), self.stmt(d - 1))
            r = rng.random()
            if r < 0.4:
                return Unlabel(v)
            if r < 0.7:
                return LabelOf(v)
            return Send(self.dest(), self.lab(), v)
        if k == "lref":
            r = self.name()
            lab = self.lab()
            use = rng.random()
            if use < 0.5:
                inner = App(Lam(self.name(), ToT(Read(ToI(TVar(r))))),
                            ToT(Write(ToI(TVar(r)), self.payload())))
            elif use < 0.8:
                inner = ToT(LabelOf(ToI(TVar(r))))
            else:
                inner = ToT(Send(self.dest(), self.lab(), ToI(TVar(r))))
            return ToI(App(Lam(r, inner), ToT(New(lab, ToI(self.tbool())))))
        if k == "unlabelSecret":
            secret = Labeled(SEC, ToI(self.secret.tbool()))
            return ToI(If(ToT(Unlabel(secret)), ToT(self.stmt(d - 1)), ToT(self.stmt(d - 1))))
        if k == "clearance":
            if rng.random() < 0.5:
                return seq_i(SetClearance(LabelV(PUB if rng.random() < 0.5 else SEC)),
                             self.stmt(d - 1), self.name())
            return Send(self.dest(), self.lab(), GetClearance())
        return self.leaf()

    def use_msg(self, m: str, s: str, d: int) -> Term:
        r = self.rng.random()
        if r < 0.4:
            return ToI(If(ToT(IVar(m)), ToT(self.stmt(d)), ToT(self.stmt(d))))
        if r < 0.7:
            return Send(self.dest(), self.lab(), IVar(m))
        if r < 0.85:
            return Send(IVar(s), self.lab(), self.payload())
        return seq_i(self.stmt(d), IVar(m), self.name())

    def program(self, d: int) -> Term:
        n = self.rng.randint(1, 3)
        prog = self.stmt(d)
        for _ in range(n - 1):
            prog = seq_i(prog, self.stmt(d), self.name())
        return prog


def _queue(g: _Gen, hidden: "_Gen | None", owner_high: bool) -> tuple:
    """Messages for one queue; low messages come from ``g``, hidden ones from ``hidden``."""
    if owner_high:
        if hidden is None:
            return ()
        return tuple(Message(SEC if hidden.rng.random() < 0.7 else PUB,
                             hidden.rng.choice(hidden.ids), hidden.payload())
                     for _ in range(hidden.rng.randint(0, 3)))
    low = [Message(PUB, g.rng.choice(g.ids), g.payload()) for _ in range(g.rng.randint(0, 2))]
    if hidden is None:
        return tuple(low)
    for _ in range(hidden.rng.randint(0, 2)):
        pos = hidden.rng.randint(0, len(low))
        low.insert(pos, Message(SEC, hidden.rng.choice(hidden.ids), hidden.payload()))
    return tuple(low)


def gen_equiv_pair(seed: int, l: Label = PUB, params: GenParams | None = None
                   ) -> tuple[Configuration, Configuration]:
    """Two configurations equal at ``l`` (must be ``pub``) and free to differ above it."""
    if l != PUB:
        raise ValueError("pairs are generated for the two-point lattice observed at pub")
    p = params or GenParams()
    master = random.Random(seed)
    low_seed = master.getrandbits(64)
    side_seeds = (master.getrandbits(64), master.getrandbits(64))
    shape = random.Random(low_seed)
    n = shape.randint(1, p.max_tasks)
    ids = [(i + 1,) for i in range(n)]
    high = [shape.random() < p.p_high for _ in ids]
    has_secrets = any(high)
    clearance = [SEC if not p.clearance or shape.random() < 0.6 else PUB for _ in ids]
    depth = [shape.randint(2, p.max_depth) for _ in ids]

    sides = []
    for s_seed in side_seeds:
        srng = random.Random(s_seed)
        hidden = _Gen(srng, True, ids, p, prefix="h") if has_secrets else None
        if hidden is not None:
            hidden.secret = hidden
        tasks: dict[tuple, Task] = {}
        queues = {}
        for i, tid in enumerate(ids):
            if high[i]:
                g = _Gen(srng, True, ids, p, secret=hidden, prefix=f"t{i}_")
                prog = g.program(srng.randint(2, p.max_depth))
                tasks[tid] = Task(EMPTY, prog, tid, SEC, SEC)
                queues[tid] = _queue(g, hidden, True)
            else:
                g = _Gen(random.Random(f"{low_seed}:{i}"), False, ids, p, secret=hidden)
                prog = g.program(depth[i])
                tasks[tid] = Task(EMPTY, prog, tid, PUB, clearance[i])
                queues[tid] = _queue(g, hidden, False)
        # order: low tasks keep their relative order; the last slot is shared by both sides
        last = ids[-1]
        order = [tid for i, tid in enumerate(ids[:-1]) if not high[i]]
        for i, tid in enumerate(ids[:-1]):
            if high[i] and srng.random() >= p.p_absent:
                order.insert(srng.randint(0, len(order)), tid)
        order.append(last)
        # absent high tasks keep their queue and registry entry, as after finishing
        gone = {tid: SEC for tid in ids if tid not in order}
        cfg = make_config([tasks[t] for t in order], queues, labels=gone)
        sides.append(cfg)
    return sides[0], sides[1]


def random_config(seed: int, params: GenParams | None = None) -> Configuration:
    return gen_equiv_pair(seed, PUB, params)[0]
