"""Exact minimum hitting sets (equivalently, set covers) by branch and bound.

Elements are arbitrary hashables; callers pass an explicit element order
that defines the lexicographic tie-break used by :func:`first_hitting_set`.
Internally sets are bitmasks over positions in that order.
"""
from __future__ import annotations

import time
from typing import Hashable, Iterable, Sequence


class SearchTimeout(Exception):
    pass


class _Budget:
    __slots__ = ("deadline", "nodes")

    def __init__(self, deadline: float | None):
        self.deadline = deadline
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes & 0xFF == 0 and time.monotonic() > self.deadline:
            raise SearchTimeout()


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _low_bits(x: int) -> Iterable[int]:
    while x:
        low = x & -x
        yield low
        x ^= low


def _reduce(sets: list[int]) -> list[int]:
    """Drop duplicates and supersets (a superset is hit whenever its subset is)."""
    out: list[int] = []
    for s in sorted(set(sets), key=_popcount):
        if not any(t & s == t for t in out):
            out.append(s)
    return out


def _lower_bound(sets: list[int]) -> int:
    used = 0
    lb = 0
    for s in sorted(sets, key=_popcount):
        if not s & used:
            lb += 1
            used |= s
    return lb


def _greedy(sets: list[int], allowed: int) -> int | None:
    chosen = 0
    rest = [s & allowed for s in sets]
    if any(s == 0 for s in rest):
        return None
    while rest:
        counts: dict[int, int] = {}
        for s in rest:
            for b in _low_bits(s):
                counts[b] = counts.get(b, 0) + 1
        # most frequent, then lowest position
        b = max(counts, key=lambda b: (counts[b], -b.bit_length()))
        chosen |= b
        rest = [s for s in rest if not s & b]
    return chosen


def _coverable(sets: list[int], allowed: int, budget: int, clock: _Budget) -> int | None:
    """A hitting set of ``sets`` using only ``allowed`` bits with at most ``budget`` elements."""
    clock.tick()
    if not sets:
        return 0
    if budget <= 0:
        return None
    restricted = [s & allowed for s in sets]
    if any(s == 0 for s in restricted):
        return None
    restricted = _reduce(restricted)
    if _lower_bound(restricted) > budget:
        return None
    pivot = min(restricted, key=lambda s: (_popcount(s), s))
    excluded = 0
    # try the elements hitting the most sets first
    bits = sorted(_low_bits(pivot), key=lambda b: (-sum(1 for s in restricted if s & b), b))
    for b in bits:
        rest = [s for s in restricted if not s & b]
        sub = _coverable(rest, allowed & ~excluded & ~b, budget - 1, clock)
        if sub is not None:
            return sub | b
        excluded |= b
    return None


class HittingSetProblem:
    """A family of sets over an ordered element universe."""

    def __init__(self, order: Sequence[Hashable], sets: Iterable[Iterable[Hashable]] = ()):
        self.order = list(order)
        self.pos = {e: i for i, e in enumerate(self.order)}
        self.sets: list[int] = []
        for s in sets:
            self.add(s)

    def mask(self, elements: Iterable[Hashable]) -> int:
        m = 0
        for e in elements:
            i = self.pos.get(e)
            if i is not None:
                m |= 1 << i
        return m

    def elements(self, mask: int) -> list[Hashable]:
        return [self.order[b.bit_length() - 1] for b in _low_bits(mask)]

    def add(self, elements: Iterable[Hashable]) -> None:
        self.sets.append(self.mask(elements))

    def hits(self, elements: Iterable[Hashable]) -> bool:
        m = self.mask(elements)
        return all(s & m for s in self.sets)

    def greedy(self, allowed: Iterable[Hashable] | None = None) -> list[Hashable] | None:
        am = (1 << len(self.order)) - 1 if allowed is None else self.mask(allowed)
        m = _greedy(self.sets, am)
        return None if m is None else self.elements(m)

    def lower_bound(self) -> int:
        return _lower_bound(_reduce(self.sets))

    def minimum_size(self, cap: int | None = None, deadline: float | None = None,
                     allowed: Iterable[Hashable] | None = None) -> int | None:
        """Size of a minimum hitting set, or None if it exceeds ``cap`` or none exists."""
        am = (1 << len(self.order)) - 1 if allowed is None else self.mask(allowed)
        clock = _Budget(deadline)
        greedy = _greedy(self.sets, am)
        if greedy is None:
            return None
        hi = _popcount(greedy)
        lo = _lower_bound(_reduce([s & am for s in self.sets]))
        if cap is not None:
            if lo > cap:
                return None
            hi_cap = min(hi, cap)
        else:
            hi_cap = hi
        for k in range(lo, hi_cap + 1):
            if k == hi:
                return k
            if _coverable(self.sets, am, k, clock) is not None:
                return k
        return None

    def first(self, size: int, allowed: Iterable[Hashable] | None = None,
              deadline: float | None = None) -> list[Hashable] | None:
        """Lexicographically least hitting set with at most ``size`` elements.

        Elements are compared by their position in ``order``.  Meant to be
        called with ``size`` equal to the minimum hitting-set size, where
        "at most" and "exactly" coincide.
        """
        am = (1 << len(self.order)) - 1 if allowed is None else self.mask(allowed)
        clock = _Budget(deadline)
        if _coverable(self.sets, am, size, clock) is None:
            return None
        chosen = 0
        remaining = list(self.sets)
        slots = size
        start = 0
        while remaining:
            for i in range(start, len(self.order)):
                b = 1 << i
                if not am & b:
                    continue
                rest = [s for s in remaining if not s & b]
                later = am & ~((b << 1) - 1)
                if _coverable(rest, later, slots - 1, clock) is not None:
                    chosen |= b
                    remaining = rest
                    slots -= 1
                    start = i + 1
                    break
            else:  # pragma: no cover - guarded by the feasibility check above
                return None
        return self.elements(chosen)
