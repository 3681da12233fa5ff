"""CDCL SAT solving under assumptions, and a brute-force model enumerator.

The solver follows the MiniSat recipe: two watched literals, first-UIP
learning, VSIDS-style activities with phase saving, Luby restarts, and
assumptions decided first so that unsatisfiable runs report a core over
the assumption literals.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .formula import CnfFormula

MAX_ENUM_VARS = 24


@dataclass(frozen=True)
class SatResult:
    status: str
    model: Mapping[int, bool] | None = None
    core: frozenset[int] | None = None

    @property
    def sat(self) -> bool:
        return self.status == "sat"

    @property
    def unsat(self) -> bool:
        return self.status == "unsat"


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


def _code(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


def _lit(code: int) -> int:
    return -(code >> 1) if code & 1 else code >> 1


class Solver:
    """Single-owner CDCL solver over a fixed clause set.

    Learnt clauses persist across :meth:`solve` calls (they are implied by
    the input), so repeated calls with different assumptions get cheaper.
    """

    restart_base = 64
    var_decay = 0.95

    def __init__(self, cnf: CnfFormula, seed: int = 0, random_phase: bool = False):
        self.num_vars = nv = cnf.num_vars
        self.rng = random.Random(seed)
        self.lval = [0] * (2 * nv + 2)
        self.level = [0] * (nv + 1)
        self.reason: list[int | None] = [None] * (nv + 1)
        self.activity = [0.0] * (nv + 1)
        self.var_inc = 1.0
        if random_phase:
            self.polarity = [self.rng.random() < 0.5 for _ in range(nv + 1)]
            for v in range(1, nv + 1):
                self.activity[v] = self.rng.random() * 1e-3
        else:
            self.polarity = [False] * (nv + 1)
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * nv + 2)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = [(-self.activity[v], v) for v in range(1, nv + 1)]
        heapq.heapify(self.heap)
        self.ok = True
        self.conflicts = 0
        self._units: list[int] = []
        for clause in cnf.clauses:
            self._add_input_clause(clause)

    # -- setup -----------------------------------------------------------

    def _add_input_clause(self, clause: Iterable[int]) -> None:
        lits = set(clause)
        if any(-l in lits for l in lits):
            return
        codes = [_code(l) for l in sorted(lits, key=lambda l: (abs(l), l < 0))]
        if not codes:
            self.ok = False
        elif len(codes) == 1:
            self._units.append(codes[0])
        else:
            ci = len(self.clauses)
            self.clauses.append(codes)
            self.watches[codes[0]].append(ci)
            self.watches[codes[1]].append(ci)

    def set_phases(self, literals: Iterable[int]) -> None:
        """Prefer the given polarity when branching on these variables."""
        for l in literals:
            if 0 < abs(l) <= self.num_vars:
                self.polarity[abs(l)] = l > 0

    # -- core machinery --------------------------------------------------

    def _decision_level(self) -> int:
        return len(self.trail_lim)

    def _enqueue(self, code: int, reason: int | None) -> None:
        self.lval[code] = 1
        self.lval[code ^ 1] = -1
        v = code >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(code)

    def _propagate(self) -> int | None:
        lval, clauses, watches, trail = self.lval, self.clauses, self.watches, self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            kept: list[int] = []
            n = len(ws)
            k = 0
            while k < n:
                ci = ws[k]
                k += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if lval[first] == 1:
                    kept.append(ci)
                    continue
                for m in range(2, len(c)):
                    if lval[c[m]] != -1:
                        c[1], c[m] = c[m], false_lit
                        watches[c[1]].append(ci)
                        break
                else:
                    kept.append(ci)
                    if lval[first] == -1:
                        kept.extend(ws[k:])
                        watches[false_lit] = kept
                        self.qhead = len(trail)
                        return ci
                    self._enqueue(first, ci)
            watches[false_lit] = kept
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.num_vars + 1)]
            heapq.heapify(self.heap)
        elif self.lval[2 * v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = [False] * (self.num_vars + 1)
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = self._decision_level()
        level = self.level
        while True:
            c = self.clauses[confl]
            for q in (c if p is None else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen[p >> 1] = False
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[p >> 1]
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause (local minimisation)
        marked = {q >> 1 for q in learnt}
        out = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[q >> 1]
            if r is None or any((x >> 1) not in marked and level[x >> 1] > 0 for x in self.clauses[r][1:]):
                out.append(q)
        learnt = out
        if len(learnt) == 1:
            back = 0
        else:
            best = max(range(1, len(learnt)), key=lambda i: level[learnt[i] >> 1])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            back = level[learnt[1] >> 1]
        self.var_inc /= self.var_decay
        return learnt, back

    def _analyze_final(self, p: int) -> set[int]:
        """Assumption codes responsible for ``p`` being false."""
        out = {p ^ 1}
        if not self.trail_lim:
            return out
        seen = [False] * (self.num_vars + 1)
        seen[p >> 1] = True
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            code = self.trail[i]
            v = code >> 1
            if not seen[v]:
                continue
            r = self.reason[v]
            if r is None:
                if self.level[v] > 0:
                    out.add(code)
            else:
                for q in self.clauses[r][1:]:
                    if self.level[q >> 1] > 0:
                        seen[q >> 1] = True
            seen[v] = False
        return out

    def _cancel_until(self, lvl: int) -> None:
        if self._decision_level() <= lvl:
            return
        lim = self.trail_lim[lvl]
        for code in self.trail[lim:]:
            v = code >> 1
            self.lval[code] = 0
            self.lval[code ^ 1] = 0
            self.reason[v] = None
            self.polarity[v] = not (code & 1)
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[lim:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick_branch(self) -> int | None:
        heap, lval = self.heap, self.lval
        while heap:
            act, v = heapq.heappop(heap)
            if lval[2 * v] == 0 and -act == self.activity[v]:
                return 2 * v if self.polarity[v] else 2 * v + 1
        # stale heap entries: fall back to a scan, lowest index first
        for v in range(1, self.num_vars + 1):
            if lval[2 * v] == 0:
                return 2 * v if self.polarity[v] else 2 * v + 1
        return None

    def _root_setup(self) -> bool:
        if not self.ok:
            return False
        for code in self._units:
            if self.lval[code] == -1:
                self.ok = False
                return False
            if self.lval[code] == 0:
                self._enqueue(code, None)
        self._units = []
        if self._propagate() is not None:
            self.ok = False
        return self.ok

    def _learn(self, learnt: list[int]) -> None:
        if len(learnt) == 1:
            self._enqueue(learnt[0], None)
        else:
            ci = len(self.clauses)
            self.clauses.append(learnt)
            self.watches[learnt[0]].append(ci)
            self.watches[learnt[1]].append(ci)
            self._enqueue(learnt[0], ci)

    # -- public ----------------------------------------------------------

    def solve(self, assumptions: Iterable[int] = ()) -> SatResult:
        assumptions = list(dict.fromkeys(assumptions))
        aset = set(assumptions)
        for a in assumptions:
            if a == 0 or abs(a) > self.num_vars:
                raise ValueError(f"assumption {a} out of range 1..{self.num_vars}")
            if -a in aset:
                return SatResult("unsat", core=frozenset({a, -a}))
        self._cancel_until(0)
        if not self._root_setup():
            return SatResult("unsat", core=frozenset())
        codes = [_code(a) for a in assumptions]
        restart = 0
        budget = luby(restart) * self.restart_base
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                budget -= 1
                if self._decision_level() == 0:
                    self.ok = False
                    return SatResult("unsat", core=frozenset())
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                self._learn(learnt)
                continue
            if budget <= 0:
                restart += 1
                budget = luby(restart) * self.restart_base
                self._cancel_until(0)
                continue
            nxt = None
            while self._decision_level() < len(codes):
                a = codes[self._decision_level()]
                if self.lval[a] == 1:
                    self.trail_lim.append(len(self.trail))
                elif self.lval[a] == -1:
                    core = frozenset(_lit(c) for c in self._analyze_final(a ^ 1))
                    self._cancel_until(0)
                    return SatResult("unsat", core=core)
                else:
                    nxt = a
                    break
            if nxt is None:
                nxt = self._pick_branch()
                if nxt is None:
                    model = {v: self.lval[2 * v] == 1 for v in range(1, self.num_vars + 1)}
                    self._cancel_until(0)
                    return SatResult("sat", model=model)
            self.trail_lim.append(len(self.trail))
            self._enqueue(nxt, None)


def solve(cnf: CnfFormula, assumptions: Iterable[int] = (), seed: int = 0) -> SatResult:
    """Decide ``cnf`` under assumption literals with a fresh solver."""
    return Solver(cnf, seed=seed).solve(assumptions)


def enumerate_models(cnf: CnfFormula, variables: Iterable[int] | None = None) -> list[dict[int, bool]]:
    """All satisfying assignments over ``variables``, in lexicographic order.

    ``variables`` must cover every variable occurring in ``cnf``; the first
    (smallest) variable is the most significant position, False < True.
    """
    vs = sorted(set(range(1, cnf.num_vars + 1) if variables is None else variables))
    if len(vs) > MAX_ENUM_VARS:
        raise ValueError(f"refusing to enumerate 2^{len(vs)} assignments (limit {MAX_ENUM_VARS} variables)")
    missing = cnf.variables() - set(vs)
    if missing:
        raise ValueError(f"clauses mention variables outside the enumeration set: {sorted(missing)}")
    k = len(vs)
    bit = {v: k - 1 - i for i, v in enumerate(vs)}
    total = 1 << k
    out = []
    chunk = 1 << 20
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        ok = np.ones(idx.shape, dtype=bool)
        for clause in cnf.clauses:
            sat = np.zeros(idx.shape, dtype=bool)
            for l in clause:
                b = (idx >> bit[abs(l)]) & 1
                sat |= (b == 1) if l > 0 else (b == 0)
            ok &= sat
        for m in idx[ok].tolist():
            out.append({v: bool((m >> bit[v]) & 1) for v in vs})
    return out
