"""Task and configuration records shared by the runtime and the checker."""
from __future__ import annotations

from dataclasses import dataclass, field

from .fmap import FMap
from .labels import Label
from .syntax import Term


@dataclass(frozen=True, slots=True)
class Task:
    """⟨store, expr⟩ with id and current label; ``fresh`` names children and cells."""
    store: FMap
    expr: Term
    id: tuple
    label: Label
    clearance: Label
    fresh: int = 0


@dataclass(frozen=True, slots=True)
class Configuration:
    queues: FMap                       # task id -> tuple[Message], newest first
    tasks: tuple                       # tuple[Task, ...]; the head steps
    registry: FMap                     # task id -> latest label of that task
    lstore: FMap = field(default_factory=FMap)  # (creator id, k) -> LCell

    @property
    def head(self) -> Task:
        return self.tasks[0]

    def task(self, tid: tuple) -> Task | None:
        for t in self.tasks:
            if t.id == tid:
                return t
        return None


@dataclass(frozen=True, slots=True)
class ErasedConfiguration(Configuration):
    """A configuration seen through erasure; only observable parts remain."""


def make_config(tasks, queues=None, lstore=None, labels=None) -> Configuration:
    """Build a configuration, creating empty queues for tasks that lack one.

    ``labels`` gives registry entries for queues whose task is already gone.
    """
    tasks = tuple(tasks)
    q = dict(queues or {})
    reg = dict(labels or {})
    for t in tasks:
        q.setdefault(t.id, ())
        reg[t.id] = t.label
    for tid in q:
        if tid not in reg:
            raise ValueError(f"queue {tid} has no owning task; pass its label in labels")
    return Configuration(FMap({k: tuple(v) for k, v in q.items()}), tasks, FMap(reg),
                         FMap(lstore or {}))
