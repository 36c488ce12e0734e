"""Bounded checks of termination-sensitive and -insensitive non-interference.

An *engine* is anything with ``step(c)``, ``is_terminal(c)`` and
``erase(c, l)``; both the abstract ``Semantics`` and the single-heap engine
qualify.  TSNI is judged on stutter-collapsed sequences of erased snapshots.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .erasure import l_equiv
from .labels import Label, leq
from .runtime import TERMINAL, run

PASS = "pass"
VIOLATION = "violation"
INCONCLUSIVE = "inconclusive"


class PreconditionError(ValueError):
    """The two configurations are not l-equivalent."""


@dataclass(frozen=True)
class NIVerdict:
    outcome: str
    mode: str
    reason: str = ""
    index: int | None = None                   # collapsed index of the first mismatch
    snapshots: tuple = ()                      # the two differing erased snapshots
    traces: tuple = field(default=(), repr=False)  # steps of both runs
    raw_steps: tuple = ()

    @property
    def passed(self) -> bool:
        return self.outcome == PASS

    def to_record(self) -> dict:
        rec = {"mode": self.mode, "outcome": self.outcome, "reason": self.reason,
               "raw_steps": list(self.raw_steps)}
        if self.index is not None:
            rec["index"] = self.index
        return rec


class _Stream:
    """Lazily stepped run with its collapsed erased snapshots."""

    def __init__(self, engine, c, l: Label):
        self.engine, self.l = engine, l
        self.cur = c
        self.raw = 0
        self.snaps = [engine.erase(c, l)]
        self.snap_at = [0]          # collapsed index after each raw step
        self.seen = {c: 0}
        self.steps = []
        self.frozen = False         # no new snapshot can ever appear
        self.why = ""

    def advance(self) -> bool:
        """One raw step; returns False once the future is fully known."""
        if self.frozen:
            return False
        if self.engine.is_terminal(self.cur):
            self.frozen, self.why = True, "terminal"
            return False
        s = self.engine.step(self.cur)
        self.steps.append(s)
        self.raw += 1
        self.cur = s.config
        snap = self.engine.erase(s.config, self.l)
        if snap != self.snaps[-1]:
            self.snaps.append(snap)
        self.snap_at.append(len(self.snaps) - 1)
        prev = self.seen.get(s.config)
        if prev is not None:
            if self.snap_at[prev] == self.snap_at[-1]:
                self.frozen, self.why = True, "constant cycle"
                return False
        else:
            self.seen[s.config] = self.raw
        return True

    def run_for(self, n: int) -> None:
        for _ in range(n):
            if not self.advance():
                return


def _mismatch(a: list, b: list) -> int | None:
    for i in range(min(len(a), len(b))):
        if a[i] != b[i]:
            return i
    return None


def check_tsni(c1, c2, l: Label, engine, budget: int = 500,
               require_equiv: bool = True) -> NIVerdict:
    if require_equiv and engine.erase(c1, l) != engine.erase(c2, l):
        raise PreconditionError("configurations are not l-equivalent")
    s1, s2 = _Stream(engine, c1, l), _Stream(engine, c2, l)
    s1.run_for(budget)
    s2.run_for(budget)

    def verdict(outcome, reason, idx=None):
        snaps = ()
        if idx is not None:
            snaps = (s1.snaps[idx] if idx < len(s1.snaps) else None,
                     s2.snaps[idx] if idx < len(s2.snaps) else None)
        return NIVerdict(outcome, "tsni", reason, idx, snaps,
                         (tuple(s1.steps), tuple(s2.steps)), (s1.raw, s2.raw))

    idx = _mismatch(s1.snaps, s2.snaps)
    if idx is not None:
        return verdict(VIOLATION, "erased snapshots differ", idx)
    if len(s1.snaps) == len(s2.snaps):
        return verdict(PASS, "collapsed traces agree")
    short, long_ = (s1, s2) if len(s1.snaps) < len(s2.snaps) else (s2, s1)
    for _ in range(budget + 1):
        n = len(short.snaps)
        if short.snaps[n - 1] != long_.snaps[n - 1]:
            return verdict(VIOLATION, "erased snapshots differ", n - 1)
        if n == len(long_.snaps):
            return verdict(PASS, "shorter run caught up")
        if short.frozen:
            return verdict(VIOLATION, f"one run stops observably early ({short.why})", n)
        short.advance()
    return verdict(INCONCLUSIVE, "budget ended before the shorter run caught up")


def check_tini(c1, c2, l: Label, engine, budget: int = 500,
               require_equiv: bool = True) -> NIVerdict:
    if require_equiv and engine.erase(c1, l) != engine.erase(c2, l):
        raise PreconditionError("configurations are not l-equivalent")
    t1 = run(c1, max_steps=budget, engine=engine)
    t2 = run(c2, max_steps=budget, engine=engine)
    traces = (t1.steps, t2.steps)
    raw = (len(t1.steps), len(t2.steps))
    if t1.outcome != TERMINAL or t2.outcome != TERMINAL:
        return NIVerdict(INCONCLUSIVE, "tini", "a run did not terminate", traces=traces,
                         raw_steps=raw)
    f1, f2 = engine.erase(t1.final, l), engine.erase(t2.final, l)
    if f1 == f2:
        return NIVerdict(PASS, "tini", "final configurations agree", traces=traces,
                         raw_steps=raw)
    return NIVerdict(VIOLATION, "tini", "final configurations differ", 0, (f1, f2),
                     traces, raw)


def low_rules(steps, l: Label) -> list[str]:
    """Rule names fired by tasks whose label flows to l."""
    return [s.rule for s in steps if leq(s.label, l)]


def low_rules_agree(verdict: NIVerdict, l: Label) -> bool:
    """Low-acting steps of the two runs fire the same rules, in the same order."""
    a, b = (low_rules(t, l) for t in verdict.traces)
    n = min(len(a), len(b))
    return a[:n] == b[:n]


@dataclass
class SuiteResult:
    mode: str
    verdicts: list = field(default_factory=list)    # (seed, NIVerdict)

    def count(self, outcome: str) -> int:
        return sum(1 for _, v in self.verdicts if v.outcome == outcome)

    @property
    def violations(self) -> list:
        return [(s, v) for s, v in self.verdicts if v.outcome == VIOLATION]

    def summary(self) -> str:
        return (f"{self.mode}: {len(self.verdicts)} pairs, {self.count(PASS)} pass, "
                f"{self.count(VIOLATION)} violation, {self.count(INCONCLUSIVE)} inconclusive")


def run_suite(mode: str, engine, pairs: int, seed: int = 0, budget: int = 500,
              params=None, l: Label | None = None, lift=None,
              keep_traces: bool = False) -> SuiteResult:
    """Check ``pairs`` generated pub-equivalent pairs; pair k uses seed ``seed + k``.

    ``lift`` converts each generated configuration before checking, e.g. into
    the single-heap representation.  Traces are kept only for violations
    unless ``keep_traces`` is set.
    """
    from .generate import gen_equiv_pair
    from .labels import PUB
    l = PUB if l is None else l
    check = {"tsni": check_tsni, "tini": check_tini}[mode]
    out = SuiteResult(mode)
    for k in range(pairs):
        c1, c2 = gen_equiv_pair(seed + k, l, params)
        if lift is not None:
            c1, c2 = lift(c1), lift(c2)
        v = check(c1, c2, l, engine, budget)
        if not keep_traces and v.outcome != VIOLATION:
            v = replace(v, traces=())
        out.verdicts.append((seed + k, v))
    return out


__all__ = ["SuiteResult", "run_suite", "NIVerdict", "PASS", "VIOLATION", "INCONCLUSIVE", "PreconditionError",
           "check_tsni", "check_tini", "low_rules_agree", "low_rules", "l_equiv"]
