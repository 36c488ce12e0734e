"""S-expression surface syntax: terms, program files, and printing.

Whether a form is read as an IFC or a target term depends on its position:
a task body is IFC, ``(toI e)`` switches to target and ``(toT e)`` back.
``true``/``false`` and variables exist in both languages.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .config import Configuration, Task, make_config
from .fmap import EMPTY
from .ifc import Message
from .labels import TWO_POINT, Label, Lattice, LatticeError, Powerset
from .runtime import blocking_recv_macro
from .syntax import (Addr, App, Assign, Bullet, CAddr, Deref, Diverge, Fix, GetClearance,
                     GetLabel, GetTaskId, Hole, IBool, If, IVar, LAddr, Labeled, LabelE,
                     LabelOf, LabelOp, LabelV, Lam, New, Read, Recv, Ref, Sandbox, Send,
                     SetClearance, SetLabel, TBool, TVar, TaskIdV, Term, ToI, ToT, Unit,
                     Unlabel, Write, is_value)
from .target import let, seq


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


@dataclass
class Atom:
    text: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|\{[^}]*\}|[^\s();{}]+|.", re.S)


def read_sexprs(text: str) -> list:
    stack: list[SList] = [SList([], 1, 1)]
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok == "(":
            stack.append(SList([], line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].items.append(done)
        elif tok[0].isspace() or tok[0] == ";":
            pass
        elif tok == "}" or (tok == "{" and not tok.endswith("}")):
            raise ParseError(f"stray {tok!r}", line, col)
        else:
            stack[-1].items.append(Atom(tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = m.start() + tok.rindex("\n") + 1
    if len(stack) != 1:
        s = stack[-1]
        raise ParseError("unclosed '('", s.line, s.col)
    return stack[0].items


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")
_TASKID = re.compile(r"#?(\d+(?:\.\d+)*)$")
_ADDR = re.compile(r"@a(\d+)$")
_CADDR = re.compile(r"@(\d+(?:\.\d+)*):a(\d+)$")

IFC_KEYWORDS = {"getLabel", "setLabel", "taskId", "sandbox", "send", "recv", "leq", "join",
                "meet", "toI", "label", "unlabel", "labelOf", "new", "read", "write",
                "getClearance", "setClearance", "blockingRecv", "Labeled", "laddr"}
TARGET_KEYWORDS = {"lam", "app", "if", "ref", "deref", "assign", "fix", "toT", "let", "seq"}
RESERVED = IFC_KEYWORDS | TARGET_KEYWORDS | {"true", "false", "unit", "diverge", "pub", "sec"}


def parse_task_id(text: str, line=0, col=0) -> tuple:
    m = _TASKID.match(text)
    if not m:
        raise ParseError(f"bad task id {text!r}", line, col)
    return tuple(int(p) for p in m.group(1).split("."))


def format_task_id(tid: tuple) -> str:
    return ".".join(str(p) for p in tid)


class TermParser:
    def __init__(self, lattice: Lattice | None = None, internal: bool = False):
        self.lattice = lattice
        self.internal = internal

    # labels ------------------------------------------------------------------
    def is_label_atom(self, text: str) -> bool:
        return text in ("pub", "sec") or text.startswith("{")

    def label(self, a) -> Label:
        if not isinstance(a, Atom) or not self.is_label_atom(a.text):
            raise ParseError("expected a label literal", a.line, a.col)
        if self.lattice is None:
            if a.text.startswith("{"):
                body = a.text[1:-1]
                names = [p.strip() for p in body.split(",") if p.strip()]
                raise ParseError(f"powerset label {a.text} needs a (lattice powerset ...) "
                                 f"header naming {names}", a.line, a.col)
            self.lattice = TWO_POINT
        try:
            return self.lattice.parse(a.text)
        except LatticeError as e:
            raise ParseError(str(e), a.line, a.col) from None

    def ident(self, a) -> str:
        if not isinstance(a, Atom) or not _IDENT.match(a.text) or a.text in RESERVED:
            pos = (a.line, a.col)
            raise ParseError("expected a variable name", *pos)
        return a.text

    def _need_internal(self, what: str, a) -> None:
        if not self.internal:
            raise ParseError(f"{what} is internal and not part of the surface syntax",
                             a.line, a.col)

    # IFC position ------------------------------------------------------------------
    def ifc(self, sx) -> Term:
        if isinstance(sx, Atom):
            t = sx.text
            if t == "true" or t == "false":
                return IBool(t == "true")
            if t == "unit":
                return Unit()
            if self.is_label_atom(t):
                return LabelV(self.label(sx))
            if t.startswith("#"):
                return TaskIdV(parse_task_id(t, sx.line, sx.col))
            if t == "•":
                self._need_internal("•", sx)
                return Bullet()
            if t in TARGET_KEYWORDS or t == "diverge":
                raise ParseError(f"{t!r} is a target form; wrap it in (toI ...)", sx.line, sx.col)
            return IVar(self.ident(sx))
        head, args = self._split(sx)
        n = len(args)
        I, T = self.ifc, self.target

        def arity(k):
            if n != k:
                raise ParseError(f"{head} takes {k} argument(s), got {n}", sx.line, sx.col)

        if head in ("getLabel", "taskId", "getClearance"):
            arity(0)
            return {"getLabel": GetLabel, "taskId": GetTaskId,
                    "getClearance": GetClearance}[head]()
        if head in ("setLabel", "sandbox", "unlabel", "labelOf", "read", "setClearance"):
            arity(1)
            cls = {"setLabel": SetLabel, "sandbox": Sandbox, "unlabel": Unlabel,
                   "labelOf": LabelOf, "read": Read, "setClearance": SetClearance}[head]
            return cls(I(args[0]))
        if head == "toI":
            arity(1)
            return ToI(T(args[0]))
        if head == "send":
            arity(3)
            return Send(I(args[0]), I(args[1]), I(args[2]))
        if head == "recv":
            arity(4)
            return Recv(self.ident(args[0]), self.ident(args[1]), I(args[2]), I(args[3]))
        if head == "blockingRecv":
            arity(3)
            return blocking_recv_macro(self.ident(args[0]), self.ident(args[1]), I(args[2]))
        if head in ("leq", "join", "meet"):
            arity(2)
            return LabelOp(head, I(args[0]), I(args[1]))
        if head in ("label", "new", "write"):
            arity(2)
            cls = {"label": LabelE, "new": New, "write": Write}[head]
            return cls(I(args[0]), I(args[1]))
        if head == "Labeled":
            self._need_internal("Labeled", sx)
            arity(2)
            return Labeled(self.label(args[0]), I(args[1]))
        if head == "laddr":
            self._need_internal("laddr", sx)
            arity(3)
            if not isinstance(args[1], Atom) or not args[1].text.isdigit():
                raise ParseError("laddr counter must be a number", sx.line, sx.col)
            return LAddr((parse_task_id(args[0].text, args[0].line, args[0].col),
                          int(args[1].text)), self.label(args[2]))
        if head in TARGET_KEYWORDS:
            raise ParseError(f"{head!r} is a target form; wrap it in (toI ...)", sx.line, sx.col)
        raise ParseError(f"unknown IFC form {head!r}", sx.line, sx.col)

    # target position ------------------------------------------------------------------
    def target(self, sx) -> Term:
        if isinstance(sx, Atom):
            t = sx.text
            if t == "true" or t == "false":
                return TBool(t == "true")
            if t == "diverge":
                return Diverge()
            if t == "•":
                self._need_internal("•", sx)
                return Bullet()
            m = _ADDR.match(t)
            if m:
                self._need_internal("address", sx)
                return Addr(int(m.group(1)))
            m = _CADDR.match(t)
            if m:
                self._need_internal("address", sx)
                return CAddr(parse_task_id(m.group(1)), int(m.group(2)))
            if t in RESERVED or self.is_label_atom(t) or t.startswith("#"):
                raise ParseError(f"{t!r} is not a target expression; wrap IFC terms in (toT ...)",
                                 sx.line, sx.col)
            return TVar(self.ident(sx))
        head, args = self._split(sx)
        n = len(args)
        T = self.target

        def arity(k):
            if n != k:
                raise ParseError(f"{head} takes {k} argument(s), got {n}", sx.line, sx.col)

        if head == "lam":
            arity(2)
            return Lam(self.ident(args[0]), T(args[1]))
        if head == "app":
            arity(2)
            return App(T(args[0]), T(args[1]))
        if head == "if":
            arity(3)
            return If(T(args[0]), T(args[1]), T(args[2]))
        if head in ("ref", "deref", "fix"):
            arity(1)
            return {"ref": Ref, "deref": Deref, "fix": Fix}[head](T(args[0]))
        if head == "assign":
            arity(2)
            return Assign(T(args[0]), T(args[1]))
        if head == "toT":
            arity(1)
            return ToT(self.ifc(args[0]))
        if head == "let":
            arity(3)
            return let(self.ident(args[0]), T(args[1]), T(args[2]))
        if head == "seq":
            arity(2)
            return seq(T(args[0]), T(args[1]))
        if head in IFC_KEYWORDS:
            raise ParseError(f"{head!r} is an IFC form; wrap it in (toT ...)", sx.line, sx.col)
        raise ParseError(f"unknown target form {head!r}", sx.line, sx.col)

    def _split(self, sx: SList):
        if not sx.items or not isinstance(sx.items[0], Atom):
            raise ParseError("expected a form name", sx.line, sx.col)
        return sx.items[0].text, sx.items[1:]


def _single(text: str):
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise ParseError(f"expected one expression, found {len(forms)}")
    return forms[0]


def parse_term(text: str, lattice: Lattice | None = None, internal: bool = False,
               lang: str = "I") -> Term:
    p = TermParser(lattice, internal)
    sx = _single(text)
    return p.ifc(sx) if lang == "I" else p.target(sx)


# -- printing ----------------------------------------------------------------------

_ZERO = {GetLabel: "(getLabel)", GetTaskId: "(taskId)", GetClearance: "(getClearance)",
         Unit: "unit", Diverge: "diverge", Bullet: "•", Hole: "[]"}
_ONE = {Ref: "ref", Deref: "deref", Fix: "fix", ToT: "toT", ToI: "toI", SetLabel: "setLabel",
        Sandbox: "sandbox", Unlabel: "unlabel", LabelOf: "labelOf", Read: "read",
        SetClearance: "setClearance"}
_TWO = {App: "app", Assign: "assign", LabelE: "label", New: "new", Write: "write"}


def pretty(t: Term) -> str:
    out: list[str] = []
    _pp(t, out)
    return "".join(out)


def _pp(t: Term, out: list) -> None:
    cls = type(t)
    if cls in _ZERO:
        out.append(_ZERO[cls])
    elif cls is TVar or cls is IVar:
        out.append(t.name)
    elif cls is TBool or cls is IBool:
        out.append("true" if t.value else "false")
    elif cls is LabelV:
        out.append(str(t.label))
    elif cls is TaskIdV:
        out.append("#" + format_task_id(t.id))
    elif cls is Addr:
        out.append(f"@a{t.index}")
    elif cls is CAddr:
        out.append(f"@{format_task_id(t.task)}:a{t.index}")
    elif cls is LAddr:
        out.append(f"(laddr #{format_task_id(t.key[0])} {t.key[1]} {t.label})")
    elif cls in _ONE:
        out.append(f"({_ONE[cls]} ")
        _pp(getattr(t, cls.kids[0]), out)
        out.append(")")
    elif cls in _TWO:
        a, b = cls.kids
        out.append(f"({_TWO[cls]} ")
        _pp(getattr(t, a), out)
        out.append(" ")
        _pp(getattr(t, b), out)
        out.append(")")
    elif cls is Lam:
        out.append(f"(lam {t.param} ")
        _pp(t.body, out)
        out.append(")")
    elif cls is If:
        out.append("(if ")
        _pp(t.cond, out)
        out.append(" ")
        _pp(t.then, out)
        out.append(" ")
        _pp(t.orelse, out)
        out.append(")")
    elif cls is LabelOp:
        out.append(f"({t.op} ")
        _pp(t.left, out)
        out.append(" ")
        _pp(t.right, out)
        out.append(")")
    elif cls is Send:
        out.append("(send ")
        _pp(t.dest, out)
        out.append(" ")
        _pp(t.label, out)
        out.append(" ")
        _pp(t.payload, out)
        out.append(")")
    elif cls is Recv:
        out.append(f"(recv {t.msg} {t.sender} ")
        _pp(t.then, out)
        out.append(" ")
        _pp(t.orelse, out)
        out.append(")")
    elif cls is Labeled:
        out.append(f"(Labeled {t.label} ")
        _pp(t.body, out)
        out.append(")")
    else:
        raise TypeError(f"cannot print {cls.__name__}")


def format_message(m: Message) -> str:
    return f"(msg {m.label} #{format_task_id(m.sender)} {pretty(m.payload)})"


def format_store(store) -> str:
    return "{" + ", ".join(f"@a{a}={pretty(v)}" for a, v in sorted(store.items())) + "}"


def format_task(t) -> str:
    store = getattr(t, "store", None)   # single-heap tasks carry no store
    shown = "" if store is None else format_store(store) + " "
    return f"<#{format_task_id(t.id)} {t.label} clr={t.clearance} {shown}{pretty(t.expr)}>"


def format_config(c: Configuration) -> str:
    qs = "; ".join(f"#{format_task_id(i)}: [" + " ".join(format_message(m) for m in q) + "]"
                   for i, q in sorted(c.queues.items()))
    parts = [f"queues{{{qs}}}", "tasks[" + ", ".join(format_task(t) for t in c.tasks) + "]"]
    if c.lstore:
        cells = ", ".join(f"#{format_task_id(k[0])}.{k[1]}_{cell.label}={pretty(cell.value)}"
                          for k, cell in sorted(c.lstore.items()))
        parts.append("refs{" + cells + "}")
    heap = getattr(c, "heap", None)
    if heap:
        parts.append("heap{" + ", ".join(f"({format_task_id(i)}:a{a})={pretty(v)}"
                                         for (i, a), v in sorted(heap.items())) + "}")
    return " ".join(parts)


# -- program files ------------------------------------------------------------------

@dataclass
class RunSettings:
    lattice: Lattice = field(default_factory=lambda: TWO_POINT)
    scheduler: str = "rr"
    kappa: str = "identity"
    restrict: tuple = ()
    max_steps: int = 1000
    engine: str = "abstract"


@dataclass
class Program:
    config: Configuration
    settings: RunSettings


def _word(a, what: str) -> str:
    if not isinstance(a, Atom):
        raise ParseError(f"expected {what}", a.line, a.col)
    return a.text


def parse_program(text: str) -> Program:
    forms = read_sexprs(text)
    settings = RunSettings()
    internal = any(isinstance(f, SList) and f.items and isinstance(f.items[0], Atom)
                   and f.items[0].text == "allow-internal" for f in forms)
    lattice_seen = False
    tasks: list[Task] = []
    queue_forms = []
    for f in forms:
        if not isinstance(f, SList) or not f.items or not isinstance(f.items[0], Atom):
            raise ParseError("expected a top-level (keyword ...) form", f.line, f.col)
        key, args = f.items[0].text, f.items[1:]
        if key == "lattice":
            if lattice_seen or tasks:
                raise ParseError("lattice must be declared once, before tasks", f.line, f.col)
            lattice_seen = True
            kind = _word(args[0], "a lattice kind") if args else ""
            if kind == "two-point" and len(args) == 1:
                settings.lattice = TWO_POINT
            elif kind == "powerset":
                settings.lattice = Powerset(_word(a, "a principal") for a in args[1:])
            else:
                raise ParseError("lattice is two-point or (lattice powerset P ...)", f.line, f.col)
        elif key in ("scheduler", "kappa", "engine"):
            val = _word(args[0], key) if len(args) == 1 else ""
            allowed = {"scheduler": ("rr", "seq"), "kappa": ("identity", "empty"),
                       "engine": ("abstract", "concrete")}[key]
            if val not in allowed:
                raise ParseError(f"{key} must be one of {', '.join(allowed)}", f.line, f.col)
            setattr(settings, key, val)
        elif key == "restrict":
            names = tuple(_word(a, "a restriction family") for a in args)
            for n in names:
                if n not in ("norefs", "clearance"):
                    raise ParseError(f"unknown restriction family {n!r}", f.line, f.col)
            settings.restrict = names
        elif key == "max-steps":
            val = _word(args[0], "a number") if len(args) == 1 else ""
            if not val.isdigit():
                raise ParseError("max-steps takes a number", f.line, f.col)
            settings.max_steps = int(val)
        elif key == "allow-internal":
            pass
        elif key == "task":
            tasks.append(_parse_task(f, args, settings.lattice, internal))
        elif key == "queue":
            queue_forms.append(f)
        else:
            raise ParseError(f"unknown top-level form {key!r}", f.line, f.col)
    parser = TermParser(settings.lattice, internal)
    queues = {t.id: () for t in tasks}
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate task ids")
    for f in queue_forms:
        args = f.items[1:]
        if not args:
            raise ParseError("queue needs a task id", f.line, f.col)
        tid = parse_task_id(_word(args[0], "a task id"), args[0].line, args[0].col)
        if tid not in queues:
            raise ParseError(f"queue for undeclared task {format_task_id(tid)}", f.line, f.col)
        msgs = []
        for m in args[1:]:
            if (not isinstance(m, SList) or len(m.items) != 4
                    or _word(m.items[0], "msg") != "msg"):
                raise ParseError("expected (msg LABEL SENDER VALUE)", m.line, m.col)
            lab = parser.label(m.items[1])
            sender = parse_task_id(_word(m.items[2], "a sender id"), m.items[2].line,
                                   m.items[2].col)
            payload = parser.ifc(m.items[3])
            if not is_value(payload):
                raise ParseError("message payloads must be values", m.line, m.col)
            msgs.append(Message(lab, sender, payload))
        queues[tid] = tuple(msgs)
    return Program(make_config(tasks, queues), settings)


def _parse_task(f: SList, args: list, lattice: Lattice, internal: bool) -> Task:
    parser = TermParser(lattice, internal)
    if len(args) not in (3, 4):
        raise ParseError("expected (task ID LABEL [(clearance L)] EXPR)", f.line, f.col)
    tid = parse_task_id(_word(args[0], "a task id"), args[0].line, args[0].col)
    label = parser.label(args[1])
    clearance = lattice.top()
    if len(args) == 4:
        c = args[2]
        if (not isinstance(c, SList) or len(c.items) != 2
                or _word(c.items[0], "clearance") != "clearance"):
            raise ParseError("expected (clearance LABEL)", c.line, c.col)
        clearance = parser.label(c.items[1])
    expr = parser.ifc(args[-1])
    return Task(EMPTY, expr, tid, label, clearance)


__all__ = ["ParseError", "parse_term", "parse_program", "pretty", "format_config",
           "format_task", "format_task_id", "parse_task_id", "Program", "RunSettings",
           "TermParser", "read_sexprs"]
