import pytest
from hypothesis import given, settings

from coarseifc.extensions import p_norefs
from coarseifc.labels import PUB, SEC, Powerset
from coarseifc.runtime import RR, Semantics, blocking_recv_macro, run
from coarseifc.surface import ParseError, format_config, parse_program, parse_term, pretty
from coarseifc.syntax import (App, CAddr, GetLabel, IBool, IVar, LabelV, Labeled, Lam, Recv,
                              Send, TBool, TVar, TaskIdV, ToI, ToT, Unit)

from strategies import ifc_terms, target_terms


def test_toi_beta():
    assert parse_term("(toI (app (lam x x) true))") == ToI(App(Lam("x", TVar("x")), TBool(True)))


def test_let_desugars():
    assert parse_term("(let x true x)", lang="T") == parse_term("(app (lam x x) true)", lang="T")


def test_seq_desugars_to_application():
    e = parse_term("(seq (ref true) false)", lang="T")
    assert isinstance(e, App) and isinstance(e.fn, Lam) and e.fn.body == TBool(False)


def test_blocking_recv_sugar():
    assert parse_term("(blockingRecv m s m)") == blocking_recv_macro("m", "s", IVar("m"))


def test_ifc_forms():
    e = parse_term("(send #2 pub (recv m s m unit))")
    assert e == Send(TaskIdV((2,)), LabelV(PUB), Recv("m", "s", IVar("m"), Unit()))
    assert parse_term("(getLabel)") == GetLabel()


def test_powerset_labels_need_a_lattice():
    ps = Powerset(("A", "B"))
    assert parse_term("(setLabel {A,B})", ps).label == LabelV(ps.of("A", "B"))
    with pytest.raises(ParseError, match="lattice"):
        parse_term("(setLabel {A})")


@pytest.mark.parametrize("text", ["(Labeled sec unit)", "(toI @a0)", "(laddr #1 0 pub)"])
def test_internal_forms_are_not_surface_syntax(text):
    with pytest.raises(ParseError, match="internal"):
        parse_term(text)


def test_internal_forms_parse_when_allowed():
    assert parse_term("(Labeled sec unit)", internal=True) == Labeled(SEC, Unit())
    assert parse_term("(toI @1.0:a3)", internal=True) == ToI(CAddr((1, 0), 3))


@pytest.mark.parametrize("text,pos", [
    ("(send #1 pub)", "1:1"),
    ("\n  (app (lam x x))", "2:3"),
    ("(toI (getLabel))", "1:6"),
    ("(recv m s", "1:1"),
])
def test_errors_carry_positions(text, pos):
    with pytest.raises(ParseError) as info:
        parse_term(text)
    assert str(info.value).startswith(pos)


@settings(max_examples=1000, deadline=None)
@given(ifc_terms(internal=True))
def test_print_parse_round_trip_ifc(t):
    assert parse_term(pretty(t), internal=True) == t


@settings(max_examples=500, deadline=None)
@given(target_terms(ifc=ifc_terms(max_leaves=4), addrs=True))
def test_print_parse_round_trip_target(t):
    assert parse_term(pretty(t), internal=True, lang="T") == t


# -- program files ------------------------------------------------------------------

PROGRAM = """
; two tasks
(scheduler seq)
(max-steps 20)
(task #1 sec (toI (if false diverge true)))
(task #2 pub (clearance sec) (send #2 pub (toI true)))
(queue #2 (msg pub #1 unit))
"""


def test_program_header_and_tasks():
    p = parse_program(PROGRAM)
    assert p.settings.scheduler == "seq" and p.settings.max_steps == 20
    assert [t.id for t in p.config.tasks] == [(1,), (2,)]
    assert p.config.tasks[0].label == SEC and p.config.tasks[1].clearance == SEC
    assert p.config.queues[(2,)][0].payload == Unit()


def test_program_errors():
    with pytest.raises(ParseError, match="unknown top-level"):
        parse_program("(frobnicate)")
    with pytest.raises(ParseError, match="scheduler"):
        parse_program("(scheduler fifo)")
    with pytest.raises(ParseError, match="duplicate"):
        parse_program("(task #1 pub unit) (task #1 pub unit)")
    with pytest.raises(ParseError, match="values"):
        parse_program("(task #1 pub unit) (queue #1 (msg pub #1 (getLabel)))")


SHARE = """
(task #1 pub
  (toI (let i (toT (sandbox (blockingRecv x _ (toI (deref (toT x))))))
         (toT (send (toI i) pub (toI (ref true)))))))
"""


def test_sharing_a_reference_is_refused_under_norefs():
    c = parse_program(SHARE).config
    tr = run(c, Semantics(RR, restrictions=p_norefs()), 40)
    sender = [s.rule for s in tr.steps if s.task == (1,)]
    assert "I-sandbox" in sender and sender[-1] == "I-noStep"
    assert "I-send" not in sender
    tr = run(c, Semantics(RR), 40)
    assert "I-send" in [s.rule for s in tr.steps if s.task == (1,)]


def test_format_config_is_one_line():
    text = format_config(parse_program(PROGRAM).config)
    assert "\n" not in text and text.startswith("queues{")
