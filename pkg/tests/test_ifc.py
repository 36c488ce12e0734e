import itertools

import pytest
from hypothesis import given, strategies as st

from coarseifc.fmap import FMap
from coarseifc.ifc import Message, filter_queue, step_ifc_redex
from coarseifc.labels import PUB, SEC, leq
from coarseifc.syntax import (GetLabel, GetTaskId, IBool, IVar, LabelOp, LabelV, Recv,
                              Sandbox, Send, SetLabel, TaskIdV, ToI, TBool, Unit)
from coarseifc.target import Stuck

Q = FMap({(1,): (), (2,): ()})


def step(redex, label=PUB, queues=Q, tid=(1,)):
    return step_ifc_redex(queues, tid, label, redex, clearance=SEC, lstore=FMap())


def test_get_task_id():
    e = step(GetTaskId(), tid=(2,))
    assert (e.rule, e.expr) == ("I-getTaskId", TaskIdV((2,)))


def test_get_label():
    assert step(GetLabel(), SEC).expr == LabelV(SEC)
    assert step(GetLabel(), PUB).rule == "I-getLabel"


@pytest.mark.parametrize("op,a,b,out", [
    ("leq", PUB, SEC, IBool(True)), ("leq", SEC, PUB, IBool(False)),
    ("join", PUB, SEC, LabelV(SEC)), ("meet", PUB, SEC, LabelV(PUB)),
])
def test_label_op(op, a, b, out):
    e = step(LabelOp(op, LabelV(a), LabelV(b)))
    assert (e.rule, e.expr) == ("I-labelOp", out)


def test_label_op_on_non_labels_is_stuck():
    with pytest.raises(Stuck):
        step(LabelOp("join", IBool(True), LabelV(PUB)))


def test_set_label_raises():
    e = step(SetLabel(LabelV(SEC)), PUB)
    assert (e.rule, e.expr, e.label) == ("I-setLabel", Unit(), SEC)


def test_set_label_cannot_lower():
    with pytest.raises(Stuck):
        step(SetLabel(LabelV(PUB)), SEC)


def test_send_prepends():
    q = FMap({(1,): (), (2,): (Message(PUB, (2,), Unit()),)})
    e = step(Send(TaskIdV((2,)), LabelV(SEC), IBool(True)), PUB, q)
    assert e.rule == "I-send" and e.expr == Unit()
    assert e.queues[(2,)] == (Message(SEC, (1,), IBool(True)), Message(PUB, (2,), Unit()))


def test_send_down_is_stuck():
    with pytest.raises(Stuck):
        step(Send(TaskIdV((2,)), LabelV(PUB), Unit()), SEC)


def test_send_to_missing_queue_is_stuck():
    with pytest.raises(Stuck):
        step(Send(TaskIdV((9,)), LabelV(PUB), Unit()))


def test_recv_takes_oldest_visible_and_drops_hidden():
    vs, vp = IBool(True), ToI(TBool(False))
    q = FMap({(1,): (Message(SEC, (9,), vs), Message(PUB, (7,), vp)), (2,): ()})
    e = step(Recv("m", "s", Send(IVar("s"), GetLabel(), IVar("m")), Unit()), PUB, q)
    assert e.rule == "I-recv"
    assert e.expr == Send(TaskIdV((7,)), GetLabel(), vp)
    assert e.queues[(1,)] == ()


def test_recv_keeps_filtered_prefix():
    m1, m2, m3 = (Message(PUB, (2,), IBool(b)) for b in (True, False, True))
    hidden = Message(SEC, (2,), Unit())
    q = FMap({(1,): (m1, hidden, m2, m3)})
    e = step(Recv("m", "s", IVar("m"), Unit()), PUB, q)
    assert e.expr == m3.payload
    assert e.queues[(1,)] == (m1, m2)


def test_no_recv_clears_queue():
    q = FMap({(1,): (Message(SEC, (2,), Unit()),)})
    e = step(Recv("m", "s", IVar("m"), IBool(False)), PUB, q)
    assert (e.rule, e.expr, e.queues[(1,)]) == ("I-noRecv", IBool(False), ())


def test_recv_without_queue_is_stuck():
    with pytest.raises(Stuck):
        step(Recv("m", "s", IVar("m"), Unit()), PUB, FMap())


def test_sandbox_spawns_body():
    e = step(Sandbox(GetLabel()))
    assert (e.rule, e.spawn) == ("I-sandbox", GetLabel())


def test_value_is_stuck():
    with pytest.raises(Stuck):
        step(Unit())


# -- the filter ----------------------------------------------------------------------

def _reference(q, l):
    return tuple(m for m in q if (m.label == PUB or l == SEC))


def _all_queues(n):
    msgs = [Message(lab, (s,), Unit()) for lab in (PUB, SEC) for s in (1, 2)]
    for k in range(n + 1):
        yield from itertools.product(msgs, repeat=k)


def test_filter_matches_brute_force_reference():
    count = 0
    for q in _all_queues(3):
        for l in (PUB, SEC):
            assert filter_queue(q, l) == _reference(q, l)
            count += 1
    assert count == 2 * (1 + 4 + 16 + 64)


def test_filter_examples():
    v1, v2 = IBool(True), IBool(False)
    q = (Message(SEC, (1,), v1), Message(PUB, (2,), v2))
    assert filter_queue(q, PUB) == (Message(PUB, (2,), v2),)
    assert filter_queue((), PUB) == ()
    assert filter_queue(q, SEC) == q


msgs = st.builds(Message, st.sampled_from([PUB, SEC]), st.just((1,)), st.just(Unit()))


@given(st.lists(msgs, max_size=6).map(tuple), st.sampled_from([PUB, SEC]),
       st.sampled_from([PUB, SEC]))
def test_filter_idempotent_and_monotone(q, l1, l2):
    assert filter_queue(filter_queue(q, l1), l1) == filter_queue(q, l1)
    if leq(l1, l2):
        small, big = filter_queue(q, l1), filter_queue(q, l2)
        it = iter(big)
        assert all(any(m is x for x in it) for m in small)


@given(st.lists(msgs, max_size=6).map(tuple), st.sampled_from([PUB, SEC]))
def test_queue_after_receive_is_below_current_label(q, l):
    e = step(Recv("m", "s", Unit(), Unit()), l, FMap({(1,): q}))
    assert all(leq(m.label, l) for m in e.queues[(1,)])
