"""Single-task rules of the IFC language and the message-queue filter."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import extensions as ext
from .fmap import FMap
from .labels import Label, join, leq, meet
from .syntax import (GetClearance, GetLabel, GetTaskId, IBool, LabelE, LabelOf, LabelOp,
                     LabelV, New, Read, Recv, Sandbox, Send, SetClearance, SetLabel,
                     TaskIdV, Term, Unit, Unlabel, Write, subst, is_value)
from .target import Stuck


@dataclass(frozen=True, slots=True)
class Message:
    label: Label       # sender's chosen label
    sender: tuple      # sender task id
    payload: Term


def filter_queue(q: tuple, l: Label) -> tuple:
    """Θ ⪯ l: keep messages whose label flows to ``l``, preserving order."""
    return tuple(m for m in q if leq(m.label, l))


def no_filter(q: tuple, l: Label) -> tuple:
    """Deliberately broken filter used to sanity-check the harness."""
    return q


@dataclass(frozen=True, slots=True)
class IfcEffect:
    rule: str
    expr: Optional[Term] = None
    label: Optional[Label] = None
    clearance: Optional[Label] = None
    queues: Optional[FMap] = None
    lstore: Optional[FMap] = None
    fresh: Optional[int] = None
    spawn: Optional[Term] = None


LABEL_OPS = {"leq": lambda a, b: IBool(leq(a, b)),
             "join": lambda a, b: LabelV(join(a, b)),
             "meet": lambda a, b: LabelV(meet(a, b))}


def step_ifc_redex(queues: FMap, task_id: tuple, cur_label: Label, redex: Term, *,
                   clearance: Label | None = None, lstore: FMap | None = None,
                   fresh: int = 0,
                   recv_filter: Callable[[tuple, Label], tuple] = filter_queue) -> IfcEffect:
    """Apply the IFC rule matching ``redex`` or raise ``Stuck``."""
    cls = type(redex)
    if cls is GetTaskId:
        return IfcEffect("I-getTaskId", TaskIdV(task_id))
    if cls is GetLabel:
        return IfcEffect("I-getLabel", LabelV(cur_label))
    if cls is LabelOp:
        a, b = redex.left, redex.right
        if type(a) is LabelV and type(b) is LabelV and a.label.kind == b.label.kind:
            return IfcEffect("I-labelOp", LABEL_OPS[redex.op](a.label, b.label))
        raise Stuck(redex)
    if cls is SetLabel:
        new = redex.label
        if type(new) is LabelV and _flows(cur_label, new.label):
            return IfcEffect("I-setLabel", Unit(), label=new.label)
        raise Stuck(redex)
    if cls is Send:
        dest, lab = redex.dest, redex.label
        if (type(dest) is TaskIdV and type(lab) is LabelV and dest.id in queues
                and _flows(cur_label, lab.label) and is_value(redex.payload)):
            msg = Message(lab.label, task_id, redex.payload)
            return IfcEffect("I-send", Unit(),
                             queues=queues.set(dest.id, (msg,) + queues[dest.id]))
        raise Stuck(redex)
    if cls is Recv:
        if task_id not in queues:
            raise Stuck(redex)
        fq = recv_filter(queues[task_id], cur_label)
        if fq:
            *rest, last = fq
            body = subst(redex.then, redex.msg, last.payload, "I")
            body = subst(body, redex.sender, TaskIdV(last.sender), "I")
            return IfcEffect("I-recv", body, queues=queues.set(task_id, tuple(rest)))
        return IfcEffect("I-noRecv", redex.orelse, queues=queues.set(task_id, ()))
    if cls is Sandbox:
        return IfcEffect("I-sandbox", spawn=redex.body)

    # extensions
    if cls is LabelE:
        return IfcEffect("I-label", ext.op_label(redex.label, redex.body, cur_label))
    if cls is Unlabel:
        e, new = ext.op_unlabel(redex.value, cur_label)
        return IfcEffect("I-unlabel", e, label=new)
    if cls is LabelOf:
        rule, v = ext.op_labelOf(redex.value)
        return IfcEffect(rule, v)
    if cls is New:
        if lstore is None:
            raise Stuck(redex)
        addr, store = ext.op_new(redex.label, redex.value, cur_label, lstore,
                                 (task_id, fresh))
        return IfcEffect("I-new", addr, lstore=store, fresh=fresh + 1)
    if cls is Read:
        if lstore is None:
            raise Stuck(redex)
        v, new = ext.op_read(redex.ref, cur_label, lstore)
        return IfcEffect("I-read", v, label=new)
    if cls is Write:
        if lstore is None:
            raise Stuck(redex)
        return IfcEffect("I-write", Unit(),
                         lstore=ext.op_write(redex.ref, redex.value, cur_label, lstore))
    if cls is GetClearance:
        if clearance is None:
            raise Stuck(redex)
        return IfcEffect("I-getClearance", LabelV(clearance))
    if cls is SetClearance:
        new = redex.label
        if clearance is not None and type(new) is LabelV and new.label.kind == cur_label.kind:
            return IfcEffect("I-setClearance", Unit(), clearance=new.label)
        raise Stuck(redex)
    raise Stuck(redex)


def _flows(l1: Label, l2: Label) -> bool:
    return l1.kind == l2.kind and leq(l1, l2)
