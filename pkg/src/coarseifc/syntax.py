"""Abstract syntax for the mixed target/IFC term language.

Every node records which of its children are sub-terms (``kids``) and which
of those children are evaluation-context positions, in evaluation order
(``ctx``).  ``lang`` says whether a node belongs to the target calculus
("T") or the IFC language ("I").
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Iterator

from .labels import Label

TaskId = tuple  # tuple[int, ...]; root tasks are (1,), (2,), children extend the parent


class Term:
    __slots__ = ()
    kids: ClassVar[tuple[str, ...]] = ()
    ctx: ClassVar[tuple[str, ...]] = ()
    lang: ClassVar[str | None] = None
    fields: ClassVar[tuple[str, ...]] = ()


def node(lang: str, kids: tuple[str, ...] = (), ctx: tuple[str, ...] = ()):
    """Make a frozen dataclass term node with cached hash, labeled flag and address set."""
    def wrap(cls):
        ann = dict(cls.__dict__.get("__annotations__", {}))
        names = tuple(ann)
        ann["_hc"] = "int"
        ann["_lb"] = "int"
        ann["_av"] = "object"
        cls._av = field(default=None, init=False, repr=False, compare=False)
        cls._hc = field(default=0, init=False, repr=False, compare=False)
        cls._lb = field(default=-1, init=False, repr=False, compare=False)
        cls.__annotations__ = ann
        cls = dataclass(frozen=True, slots=True, eq=False)(cls)
        cls.lang = lang
        cls.kids = kids
        cls.ctx = ctx
        cls.fields = names
        cls.__hash__ = _cached_hash
        cls.__eq__ = _eq
        return cls
    return wrap


def _cached_hash(self) -> int:
    h = self._hc
    if not h:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.fields)) or 1
        object.__setattr__(self, "_hc", h)
    return h


def _eq(self, other) -> bool:
    if self is other:
        return True
    if type(other) is not type(self):
        return NotImplemented if not isinstance(other, Term) else False
    if hash(self) != hash(other):
        return False
    return all(getattr(self, f) == getattr(other, f) for f in self.fields)


def contains_labeled(t: "Term") -> bool:
    """Whether ``t`` has a ``Labeled`` node anywhere (cached per node)."""
    f = t._lb
    if f < 0:
        cls = type(t)
        if cls.__name__ == "Labeled":
            f = 1
        else:
            f = 0
            for k in cls.kids:
                if contains_labeled(getattr(t, k)):
                    f = 1
                    break
        object.__setattr__(t, "_lb", f)
    return f == 1


# -- target calculus ---------------------------------------------------------

@node("T")
class TVar(Term):
    name: str


@node("T", ("body",))
class Lam(Term):
    param: str
    body: Term


@node("T", ("fn", "arg"), ("fn", "arg"))
class App(Term):
    fn: Term
    arg: Term


@node("T")
class TBool(Term):
    value: bool


@node("T", ("cond", "then", "orelse"), ("cond",))
class If(Term):
    cond: Term
    then: Term
    orelse: Term


@node("T", ("init",), ("init",))
class Ref(Term):
    init: Term


@node("T", ("ref",), ("ref",))
class Deref(Term):
    ref: Term


@node("T", ("ref", "value"), ("ref", "value"))
class Assign(Term):
    ref: Term
    value: Term


@node("T", ("fn",), ("fn",))
class Fix(Term):
    fn: Term


@node("T")
class Addr(Term):
    """Address into the acting task's own store."""
    index: int


@node("T")
class CAddr(Term):
    """Address into the single shared heap, tagged with its owner task."""
    task: TaskId
    index: int


@node("T")
class Diverge(Term):
    pass


@node("T", ("inner",), ("inner",))
class ToT(Term):
    """Embed an IFC term in target syntax."""
    inner: Term


# -- IFC language -------------------------------------------------------------

@node("I")
class IVar(Term):
    name: str


@node("I")
class IBool(Term):
    value: bool


@node("I")
class Unit(Term):
    pass


@node("I")
class TaskIdV(Term):
    id: TaskId


@node("I")
class LabelV(Term):
    label: Label


@node("I", ("left", "right"), ("left", "right"))
class LabelOp(Term):
    op: str  # "leq" | "join" | "meet"
    left: Term
    right: Term


@node("I")
class GetLabel(Term):
    pass


@node("I", ("label",), ("label",))
class SetLabel(Term):
    label: Term


@node("I")
class GetTaskId(Term):
    pass


@node("I", ("body",))
class Sandbox(Term):
    body: Term


@node("I", ("dest", "label", "payload"), ("dest", "label", "payload"))
class Send(Term):
    dest: Term
    label: Term
    payload: Term


@node("I", ("then", "orelse"))
class Recv(Term):
    msg: str
    sender: str
    then: Term
    orelse: Term


@node("I", ("inner",), ("inner",))
class ToI(Term):
    """Embed a target term in IFC syntax."""
    inner: Term


@node("I", ("label", "body"), ("label",))
class LabelE(Term):
    """``label l e`` creates a labeled value; ``e`` stays unevaluated."""
    label: Term
    body: Term


@node("I", ("value",), ("value",))
class Unlabel(Term):
    value: Term


@node("I", ("value",), ("value",))
class LabelOf(Term):
    value: Term


@node("I", ("body",))
class Labeled(Term):
    label: Label
    body: Term


@node("I", ("label", "value"), ("label", "value"))
class New(Term):
    label: Term
    value: Term


@node("I", ("ref",), ("ref",))
class Read(Term):
    ref: Term


@node("I", ("ref", "value"), ("ref", "value"))
class Write(Term):
    ref: Term
    value: Term


@node("I")
class LAddr(Term):
    """Labeled reference; ``key`` is (creator task id, per-creator counter)."""
    key: tuple
    label: Label


@node("I")
class GetClearance(Term):
    pass


@node("I", ("label",), ("label",))
class SetClearance(Term):
    label: Term


# -- neutral -------------------------------------------------------------------

@node("")
class Bullet(Term):
    """The erased hole."""


@node("")
class Hole(Term):
    """An evaluation-context hole."""


_ATOMIC_VALUES = frozenset({Lam, TBool, Addr, CAddr, IBool, Unit, TaskIdV, LabelV,
                            Labeled, LAddr})
ADDRESS_NODES = (Addr, CAddr, LAddr)


def is_value(t: Term) -> bool:
    """Values of both grammars.  Double boundaries are never values."""
    cls = type(t)
    if cls in _ATOMIC_VALUES:
        return True
    if cls is ToT:
        inner = t.inner
        return type(inner) is not ToI and is_value(inner)
    if cls is ToI:
        inner = t.inner
        return type(inner) is not ToT and is_value(inner)
    return False


def with_kid(t: Term, name: str, value: Term) -> Term:
    cls = type(t)
    return cls(*[value if f == name else getattr(t, f) for f in cls.fields])


def map_kids(t: Term, fn) -> Term:
    kids = type(t).kids
    if not kids:
        return t
    changed = False
    vals = {}
    for k in kids:
        old = getattr(t, k)
        new = fn(old)
        if new is not old:
            changed = True
        vals[k] = new
    if not changed:
        return t
    cls = type(t)
    return cls(*[vals[f] if f in vals else getattr(t, f) for f in cls.fields])


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over every node."""
    stack = [t]
    while stack:
        cur = stack.pop()
        yield cur
        for k in reversed(type(cur).kids):
            stack.append(getattr(cur, k))


def size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


# -- variables and substitution --------------------------------------------------

def free_vars(t: Term) -> frozenset[tuple[str, str]]:
    """Free variables as (lang, name) pairs."""
    cls = type(t)
    if cls is TVar:
        return frozenset({("T", t.name)})
    if cls is IVar:
        return frozenset({("I", t.name)})
    if cls is Lam:
        return free_vars(t.body) - {("T", t.param)}
    if cls is Recv:
        return (free_vars(t.then) - {("I", t.msg), ("I", t.sender)}) | free_vars(t.orelse)
    out: frozenset = frozenset()
    for k in cls.kids:
        out = out | free_vars(getattr(t, k))
    return out


def is_closed(t: Term) -> bool:
    return not free_vars(t)


def fresh_name(base: str, avoid) -> str:
    n = 0
    while True:
        cand = f"{base}{n}"
        if cand not in avoid:
            return cand
        n += 1


def subst(e: Term, name: str, value: Term, lang: str = "T") -> Term:
    """Capture-avoiding ``{value/name} e`` for a variable of the given language."""
    fv = free_vars(value)
    var_cls = TVar if lang == "T" else IVar
    key = (lang, name)

    def go(t: Term) -> Term:
        cls = type(t)
        if cls is var_cls:
            return value if t.name == name else t
        if not cls.kids:
            return t
        if cls is Lam and lang == "T":
            if t.param == name:
                return t
            if ("T", t.param) in fv and key in free_vars(t.body):
                avoid = {n for _, n in fv} | {n for _, n in free_vars(t.body)} | {name}
                p = fresh_name(t.param, avoid)
                return Lam(p, go(subst(t.body, t.param, TVar(p), "T")))
            return map_kids(t, go)
        if cls is Recv and lang == "I":
            orelse = go(t.orelse)
            if name in (t.msg, t.sender):
                return t if orelse is t.orelse else Recv(t.msg, t.sender, t.then, orelse)
            msg, sender, then = t.msg, t.sender, t.then
            if key in free_vars(then):
                avoid = {n for _, n in fv} | {n for _, n in free_vars(then)} | {name, msg, sender}
                if ("I", msg) in fv:
                    new = fresh_name(msg, avoid)
                    avoid.add(new)
                    then, msg = subst(then, msg, IVar(new), "I"), new
                if ("I", sender) in fv:
                    new = fresh_name(sender, avoid)
                    then, sender = subst(then, sender, IVar(new), "I"), new
            return Recv(msg, sender, go(then), orelse)
        return map_kids(t, go)

    return go(e)


# -- addresses -------------------------------------------------------------------

_NO_ADDRS: frozenset = frozenset()


def address_vars(t: Term) -> frozenset[Term]:
    """Every address node occurring anywhere in ``t`` (the AV set), cached per node."""
    av = t._av
    if av is None:
        cls = type(t)
        if cls in ADDRESS_NODES:
            av = frozenset({t})
        else:
            av = _NO_ADDRS
            for k in cls.kids:
                sub = address_vars(getattr(t, k))
                if sub:
                    av = sub if not av else av | sub
        object.__setattr__(t, "_av", av)
    return av


def has_bullet(t: Term) -> bool:
    return any(type(s) is Bullet for s in subterms(t))


# -- decomposition -----------------------------------------------------------------

VALUE = "value"
TARGET = "target"
IFC = "ifc"
BORDER_IT = "border-IT"   # ⌈⌊e⌋⌉
BORDER_TI = "border-TI"   # ⌊⌈e⌉⌋
BOUNDARY = "boundary"     # ⌊E_I⌋ left for the embedding
STUCK = "stuck"           # focus is a hole or bullet


@dataclass(frozen=True, slots=True)
class Context:
    """Evaluation context as a path of (node, child-field) frames, outermost first."""

    frames: tuple = ()

    def plug(self, t: Term) -> Term:
        for parent, field_name in reversed(self.frames):
            t = with_kid(parent, field_name, t)
        return t

    def as_term(self) -> Term:
        return self.plug(Hole())

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True, slots=True)
class Decomposition:
    context: Context
    focus: Term
    kind: str


def _focus_kind(t: Term) -> str:
    cls = type(t)
    if cls is ToI and type(t.inner) is ToT:
        return BORDER_IT
    if cls is ToT and type(t.inner) is ToI:
        return BORDER_TI
    if cls.lang == "T":
        return TARGET
    if cls.lang == "I":
        return IFC
    return STUCK


def decompose(e: Term, cross: bool = True) -> Decomposition:
    """Split ``e`` into a context and its leftmost-innermost focus.

    With ``cross=False`` the walk stops at the first nested ⌊·⌋ whose payload
    still has work to do and reports it as a BOUNDARY focus.  Double
    boundaries are reported only once their payload is a value.
    """
    if is_value(e):
        return Decomposition(Context(), e, VALUE)
    frames = []
    t = e
    while True:
        cls = type(t)
        if cls is ToT and not cross and frames and not is_value(t.inner):
            return Decomposition(Context(tuple(frames)), t, BOUNDARY)
        for k in cls.ctx:
            sub = getattr(t, k)
            if not is_value(sub):
                frames.append((t, k))
                t = sub
                break
        else:
            return Decomposition(Context(tuple(frames)), t, _focus_kind(t))
