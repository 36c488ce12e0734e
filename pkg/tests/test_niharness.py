import random

import pytest
from hypothesis import given, settings, strategies as st

from coarseifc.config import ErasedConfiguration, Task, make_config
from coarseifc.erasure import (erase_config, erase_lstore, erase_queue, erase_task, erase_term,
                               l_equiv)
from coarseifc.extensions import LCell
from coarseifc.fmap import EMPTY, FMap
from coarseifc.generate import GenParams, gen_equiv_pair, random_config
from coarseifc.ifc import Message, filter_queue
from coarseifc.labels import PUB, SEC
from coarseifc.niharness import (INCONCLUSIVE, PASS, VIOLATION, PreconditionError, low_rules_agree,
                                 check_tini, check_tsni, low_rules, run_suite)
from coarseifc.runtime import RR, SEQ, Semantics
from coarseifc.syntax import (App, Bullet, Diverge, GetLabel, IBool, If, LabelV, Labeled, Lam,
                              New, SetLabel, Send, TBool, TVar, TaskIdV, ToI, ToT, Unit, Unlabel,
                              Write)

B = Bullet()


def c32(diverge):
    t1 = Task(EMPTY, ToI(If(TBool(diverge), Diverge(), TBool(True))), (1,), SEC, SEC)
    t2 = Task(EMPTY, Send(TaskIdV((2,)), LabelV(PUB), ToI(TBool(True))), (2,), PUB, SEC)
    return make_config([t1, t2])


# -- erasure ------------------------------------------------------------------------

def test_secret_task_is_erased():
    t = Task(EMPTY, Unit(), (1,), SEC, SEC)
    assert erase_task(t, PUB) is None
    e = erase_config(make_config([t, Task(EMPTY, Unit(), (2,), PUB, SEC)]), PUB)
    assert [x.id for x in e.tasks] == [(2,)]
    assert set(e.queues) == {(2,)}


def test_labeled_values():
    assert erase_term(Labeled(SEC, GetLabel()), PUB) == Labeled(SEC, B)
    assert erase_term(Labeled(PUB, GetLabel()), PUB) == Labeled(PUB, GetLabel())
    nested = Labeled(PUB, Send(TaskIdV((1,)), LabelV(PUB), Labeled(SEC, Unit())))
    assert erase_term(nested, PUB) == Labeled(PUB, Send(TaskIdV((1,)), LabelV(PUB),
                                                         Labeled(SEC, B)))


def test_labeled_store():
    k1, k2, k3 = ((1,), 0), ((1,), 1), ((2,), 0)
    ls = FMap({k1: LCell(SEC, PUB, IBool(True)), k2: LCell(PUB, PUB, IBool(False)),
               k3: LCell(SEC, SEC, Unit())})
    out = erase_lstore(ls, PUB)
    assert out == {k1: LCell(SEC, PUB, B), k2: LCell(PUB, PUB, IBool(False))}
    assert erase_lstore(ls, SEC) == ls


def test_queue_erasure_is_filtering():
    q = (Message(SEC, (1,), Unit()), Message(PUB, (2,), IBool(True)))
    assert erase_queue(q, PUB) == filter_queue(q, PUB)


msgs = st.builds(Message, st.sampled_from([PUB, SEC]), st.just((1,)),
                 st.sampled_from([Unit(), IBool(True)]))


@given(st.lists(msgs, max_size=5).map(tuple), st.sampled_from([PUB, SEC]))
def test_queue_erasure_matches_filter(q, l):
    assert erase_queue(q, l) == filter_queue(q, l)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([PUB, SEC]))
def test_erasure_idempotent(seed, l):
    c = random_config(seed)
    c = Semantics(RR).step(c).config if c.tasks else c
    once = erase_config(c, l)
    assert isinstance(once, ErasedConfiguration)
    assert erase_config(once, l) == once


def test_l_equiv_examples():
    c1, c2 = c32(False), c32(True)
    assert l_equiv(c1, c1, PUB)
    assert l_equiv(c1, c2, PUB)
    assert not l_equiv(c1, c2, SEC)


# -- TSNI / TINI -----------------------------------------------------------------------

def test_identical_configurations_pass():
    c = c32(False)
    assert check_tsni(c, c, PUB, Semantics(RR), 50).outcome == PASS


def test_early_stop_pair():
    c1, c2 = c32(False), c32(True)
    v = check_tsni(c1, c2, PUB, Semantics(SEQ), 50)
    assert v.outcome == VIOLATION and v.index is not None
    assert check_tsni(c1, c2, PUB, Semantics(RR), 50).outcome == PASS
    assert check_tini(c1, c2, PUB, Semantics(SEQ), 50).outcome == INCONCLUSIVE


def test_precondition():
    with pytest.raises(PreconditionError):
        check_tsni(c32(False), c32(True), SEC, Semantics(RR), 10)


def test_secret_free_program_passes_tini():
    c = make_config([Task(EMPTY, ToI(App(Lam("x", TVar("x")), TBool(True))), (1,), PUB, SEC)])
    assert check_tini(c, c, PUB, Semantics(SEQ), 20).outcome == PASS


def _branch_on_secret(b):
    secret = Labeled(SEC, ToI(TBool(b)))
    write = lambda v: ToT(Write(ToI(TVar("r")), IBool(v)))
    body = If(ToT(Unlabel(secret)), write(True), write(False))
    prog = ToI(App(Lam("r", body), ToT(New(LabelV(SEC), IBool(False)))))
    return make_config([Task(EMPTY, prog, (1,), PUB, SEC)])


def test_secret_branch_into_secret_reference_passes_tini():
    c1, c2 = _branch_on_secret(True), _branch_on_secret(False)
    v = check_tini(c1, c2, PUB, Semantics(SEQ), 50)
    assert v.outcome == PASS
    assert v.traces[0][-1].config.lstore != v.traces[1][-1].config.lstore


def test_broken_receive_is_caught():
    from coarseifc.ifc import no_filter
    from coarseifc.syntax import IVar, Recv
    prog = Recv("m", "s", Send(TaskIdV((2,)), LabelV(PUB), IVar("m")), Unit())
    def mk(b):
        q = {(1,): (Message(SEC, (3,), IBool(b)),), (2,): ()}
        return make_config([Task(EMPTY, prog, (1,), PUB, SEC)], q, labels={(2,): PUB})
    sem = Semantics(RR, recv_filter=no_filter)
    assert check_tsni(mk(True), mk(False), PUB, sem, 20).outcome == VIOLATION
    assert check_tsni(mk(True), mk(False), PUB, Semantics(RR), 20).outcome == PASS


def test_verdict_record():
    rec = check_tsni(c32(False), c32(True), PUB, Semantics(SEQ), 50).to_record()
    assert rec["mode"] == "tsni" and rec["outcome"] == VIOLATION and "index" in rec


# -- generator -----------------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_generated_pairs_are_equivalent(seed):
    c1, c2 = gen_equiv_pair(seed)
    assert l_equiv(c1, c2, PUB)
    assert len(c1.tasks) <= 4


def test_pairs_without_secrets_are_identical():
    seen = 0
    for seed in range(300):
        c1, c2 = gen_equiv_pair(seed)
        if all(t.label == PUB for t in c1.tasks + c2.tasks) and \
                all(l == PUB for l in c1.registry.values()):
            assert c1 == c2
            seen += 1
    assert seen > 20


def test_thousand_pairs_construct_equivalent():
    assert all(l_equiv(*gen_equiv_pair(s), PUB) for s in range(1000))


def test_generation_is_reproducible():
    assert gen_equiv_pair(42) == gen_equiv_pair(42)
    assert gen_equiv_pair(42) != gen_equiv_pair(43)


def test_small_suite_and_low_rule_agreement():
    res = run_suite("tsni", Semantics(RR), 40, seed=1000, budget=200, keep_traces=True)
    assert res.count(VIOLATION) == 0
    for _, v in res.verdicts:
        assert low_rules_agree(v, PUB)


def test_low_rules_selects_low_steps():
    v = check_tsni(c32(False), c32(True), PUB, Semantics(RR), 20)
    assert set(low_rules(v.traces[0], PUB)) <= {"I-send", "I-done"}
