"""A small immutable, hashable mapping used for stores, queues and registries."""
from __future__ import annotations


class FMap(dict):
    __slots__ = ("_h",)

    def set(self, key, value) -> "FMap":
        out = FMap(self)
        dict.__setitem__(out, key, value)
        return out

    def remove(self, key) -> "FMap":
        out = FMap(self)
        dict.pop(out, key, None)
        return out

    def __hash__(self) -> int:
        try:
            return self._h
        except AttributeError:
            self._h = hash(frozenset(self.items()))
            return self._h

    def _immutable(self, *a, **k):
        raise TypeError("FMap is immutable")

    __setitem__ = __delitem__ = _immutable
    update = pop = popitem = clear = setdefault = _immutable

    def __repr__(self) -> str:
        return f"FMap({dict.__repr__(self)})"


EMPTY = FMap()
