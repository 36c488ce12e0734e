import pytest
from hypothesis import given, settings, strategies as st

from coarseifc.config import Task, make_config
from coarseifc.erasure import erase_term
from coarseifc.extensions import (LCell, always_true, clearance_predicates, combine, op_label,
                                  op_labelOf, op_new, op_read, op_unlabel, op_write, p_norefs,
                                  reference_free)
from coarseifc.fmap import EMPTY, FMap
from coarseifc.generate import GenParams, random_config
from coarseifc.ifc import step_ifc_redex
from coarseifc.labels import PUB, SEC, Powerset
from coarseifc.runtime import RR, SEQ, Semantics, run, step_config
from coarseifc.syntax import (Addr, App, GetClearance, GetLabel, IBool, LabelE, LabelOf, LabelV,
                              Labeled, LAddr, New, Read, Ref, Sandbox, Send, SetClearance,
                              SetLabel, TBool, TaskIdV, ToI, ToT, Unit, Unlabel, Write,
                              address_vars, decompose)
from coarseifc.target import Stuck

PS = Powerset(("A", "B"))
E = GetLabel()


# -- labeled values ---------------------------------------------------------------

def test_label_up():
    assert op_label(LabelV(SEC), E, PUB) == Labeled(SEC, E)
    assert op_label(LabelV(PUB), E, PUB) == Labeled(PUB, E)


def test_label_down_is_stuck():
    with pytest.raises(Stuck):
        op_label(LabelV(PUB), E, SEC)


def test_unlabel_joins():
    assert op_unlabel(Labeled(SEC, E), PUB) == (E, SEC)
    assert op_unlabel(Labeled(PUB, E), PUB) == (E, PUB)
    assert op_unlabel(Labeled(PS.of("A"), E), PS.of("B")) == (E, PS.of("A", "B"))


def test_unlabel_of_non_labeled_is_stuck():
    with pytest.raises(Stuck):
        op_unlabel(IBool(True), PUB)


def test_label_of():
    assert op_labelOf(Labeled(SEC, E)) == ("I-labelOf", LabelV(SEC))
    assert op_labelOf(LAddr(((1,), 0), SEC)) == ("I-labelOf2", LabelV(SEC))
    with pytest.raises(Stuck):
        op_labelOf(Unit())


def test_label_of_ignores_the_payload():
    v = Labeled(SEC, Send(TaskIdV((1,)), LabelV(SEC), Unit()))
    assert op_labelOf(v) == op_labelOf(erase_term(v, PUB))


def test_label_of_keeps_current_label():
    c = make_config([Task(EMPTY, LabelOf(Labeled(SEC, E)), (1,), PUB, SEC)])
    s = step_config(c, Semantics(RR))
    assert s.rule == "I-labelOf" and s.config.tasks[0].label == PUB


def test_label_then_unlabel_round_trip():
    prog = Unlabel(LabelE(LabelV(SEC), IBool(True)))
    c = make_config([Task(EMPTY, prog, (1,), PUB, SEC)])
    tr = run(c, Semantics(SEQ), 10)
    assert tr.rules == ["I-label", "I-unlabel"]
    assert tr.final.tasks[0].expr == IBool(True) and tr.final.tasks[0].label == SEC


# -- labeled references -------------------------------------------------------------

def test_new_read_write():
    key = ((1,), 0)
    addr, store = op_new(LabelV(SEC), IBool(True), PUB, FMap(), key)
    assert addr == LAddr(key, SEC)
    assert store[key] == LCell(SEC, PUB, IBool(True))
    assert op_read(addr, PUB, store) == (IBool(True), SEC)
    store2 = op_write(addr, IBool(False), PUB, store)
    assert store2[key].value == IBool(False)


def test_new_below_current_is_stuck():
    with pytest.raises(Stuck):
        op_new(LabelV(PUB), Unit(), SEC, FMap(), ((1,), 0))


def test_read_unknown_is_stuck():
    with pytest.raises(Stuck):
        op_read(LAddr(((1,), 5), PUB), PUB, FMap())


def test_no_write_down():
    key = ((1,), 0)
    _, store = op_new(LabelV(PUB), Unit(), PUB, FMap(), key)
    with pytest.raises(Stuck):
        op_write(LAddr(key, PUB), Unit(), SEC, store)


def test_new_via_the_rule_uses_per_task_keys():
    eff = step_ifc_redex(FMap({(2,): ()}), (2,), PUB, New(LabelV(SEC), Unit()),
                         lstore=FMap(), fresh=3)
    assert eff.rule == "I-new" and eff.expr == LAddr(((2,), 3), SEC) and eff.fresh == 4


def test_read_raises_label_through_the_runtime():
    prog = Read(New(LabelV(SEC), IBool(True)))
    tr = run(make_config([Task(EMPTY, prog, (1,), PUB, SEC)]), Semantics(SEQ), 10)
    assert tr.rules == ["I-new", "I-read"] and tr.final.tasks[0].label == SEC


def test_write_rule():
    prog = Write(New(LabelV(SEC), IBool(True)), IBool(False))
    tr = run(make_config([Task(EMPTY, prog, (1,), PUB, SEC)]), Semantics(SEQ), 10)
    assert tr.rules == ["I-new", "I-write"]
    assert list(tr.final.lstore.values())[0].value == IBool(False)


# -- clearance ---------------------------------------------------------------------

CLR = Semantics(RR, restrictions=clearance_predicates())


def _one(expr, label=PUB, clearance=SEC, sem=CLR):
    return step_config(make_config([Task(EMPTY, expr, (1,), label, clearance)]), sem)


def test_get_clearance():
    s = _one(GetClearance(), clearance=PUB)
    assert s.rule == "I-getClearance" and s.config.tasks[0].expr == LabelV(PUB)


def test_set_label_beyond_clearance_removed():
    assert _one(SetLabel(LabelV(SEC)), clearance=PUB).rule == "I-noStep"
    assert _one(SetLabel(LabelV(SEC)), clearance=SEC).rule == "I-setLabel"
    assert _one(SetLabel(LabelV(PUB)), clearance=PUB).rule == "I-setLabel"


def test_set_clearance_only_lowers():
    assert _one(SetClearance(LabelV(SEC)), clearance=PUB).rule == "I-noStep"
    s = _one(SetClearance(LabelV(PUB)), clearance=SEC)
    assert s.rule == "I-setClearance" and s.config.tasks[0].clearance == PUB
    # the unrestricted rule sets any clearance
    assert _one(SetClearance(LabelV(SEC)), clearance=PUB, sem=Semantics(RR)).rule == \
        "I-setClearance"


@pytest.mark.parametrize("expr", [
    Send(TaskIdV((1,)), LabelV(SEC), Unit()),
    New(LabelV(SEC), Unit()),
    Unlabel(Labeled(SEC, Unit())),
    Read(LAddr(((9,), 0), SEC)),
])
def test_clearance_bounds_other_rules(expr):
    lstore = FMap({((9,), 0): LCell(SEC, PUB, Unit())})
    c = make_config([Task(EMPTY, expr, (1,), PUB, PUB)], lstore=lstore)
    assert step_config(c, CLR).rule == "I-noStep"
    assert step_config(c, Semantics(RR)).rule != "I-noStep"


def test_sandbox_needs_label_within_clearance():
    assert _one(Sandbox(Unit()), label=SEC, clearance=PUB).rule == "I-noStep"
    assert _one(Sandbox(Unit()), label=PUB, clearance=PUB).rule == "I-sandbox"


# -- addresses and norefs ----------------------------------------------------------

def test_address_vars():
    assert address_vars(TBool(True)) == frozenset()
    e = App(Addr(0), ToT(Send(TaskIdV((1,)), LabelV(PUB), ToI(Addr(1)))))
    assert address_vars(e) == {Addr(0), Addr(1)}
    assert address_vars(Write(LAddr(((1,), 0), PUB), Unit())) == {LAddr(((1,), 0), PUB)}


NOREFS = Semantics(RR, restrictions=p_norefs())


def test_norefs_refuses_address_payloads():
    c = make_config([Task(FMap({0: TBool(True)}),
                          Send(TaskIdV((1,)), LabelV(PUB), ToI(Addr(0))), (1,), PUB, SEC)])
    assert step_config(c, NOREFS).rule == "I-noStep"
    assert step_config(c, Semantics(RR)).rule == "I-send"


def test_norefs_refuses_address_in_sandbox_body():
    assert _one(Sandbox(ToI(Addr(0))), sem=NOREFS).rule == "I-noStep"
    assert _one(Sandbox(ToI(TBool(True))), sem=NOREFS).rule == "I-sandbox"


def test_norefs_keeps_addresses_out_of_the_labeled_store():
    assert _one(New(LabelV(PUB), ToI(Addr(0))), sem=NOREFS).rule == "I-noStep"
    assert _one(New(LabelV(PUB), ToI(TBool(True))), sem=NOREFS).rule == "I-new"


def test_reference_free_rejects_erased_parts():
    assert reference_free(IBool(True))
    assert not reference_free(erase_term(Labeled(SEC, Unit()), PUB))


def test_families_cannot_restrict_no_step():
    from coarseifc.extensions import Restrictions
    with pytest.raises(AssertionError):
        combine(Restrictions("bad", {"I-noStep": (lambda v: True,)}))


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 10**9))
def test_always_true_family_changes_nothing(seed):
    c = random_config(seed, GenParams(clearance=True))
    plain = run(c, Semantics(RR), 30)
    restricted = run(c, Semantics(RR, restrictions=always_true()), 30)
    assert plain == restricted


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([RR, SEQ]))
def test_norefs_decides_the_same_on_erased_and_raw_heads(seed, sched):
    sem = Semantics(sched)
    c = random_config(seed)
    for s in run(c, sem, 40).steps:
        c2 = s.config
        if sem.is_terminal(c2):
            break
        head = c2.tasks[0]
        d = decompose(head.expr)
        focus = d.focus
        for field_name in ("payload", "body"):
            if type(focus).__name__ in ("Send", "Sandbox") and hasattr(focus, field_name):
                raw = getattr(focus, field_name)
                seen = getattr(erase_term(focus, head.label), field_name)
                assert address_vars(raw) == address_vars(seen)
