"""Minimum-size explanations of a formula's truth value under an assignment.

An explanation is a subset ``chi`` of the assignment's literals such that

* target true:  every assignment extending ``chi`` satisfies ``psi``;
* target false: no assignment extending ``chi`` satisfies ``psi``.

It is reported in De Morgan form, whose size is ``2|chi| - 1`` when no
negation is needed and ``2|chi|`` otherwise.  The search minimises ``|chi|``,
then prefers the negation-free form, then the lexicographically least
literal set.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .formula import (
    CnfFormula,
    Formula,
    Neg,
    PartialAssignment,
    Rendered,
    atoms,
    cnf_valid_after,
    dm_render,
    eval_ast,
    is_tautology,
    lit_key,
    tseitin,
)
from .hitting import HittingSetProblem, SearchTimeout
from .sat import Solver, solve

DEFAULT_TIMEOUT = 300.0
MAX_BRUTE_LITERALS = 20
MAX_BRUTE_VARS = 22


class PreconditionError(Exception):
    """The formula does not take the target value under the assignment."""


class ExplainTimeout(Exception):
    def __init__(self, best: "Explanation | None", lower_bound: int):
        super().__init__(f"time budget exhausted (lower bound {lower_bound}, "
                         f"best {'none' if best is None else best.cardinality})")
        self.best = best
        self.lower_bound = lower_bound


def parse_target(target) -> bool:
    if isinstance(target, (bool, np.bool_)):
        return bool(target)
    if isinstance(target, (int, np.integer)) and target in (0, 1):
        return bool(target)
    t = str(target).lower()
    if t in ("top", "true", "t", "1", "positive", "⊤"):
        return True
    if t in ("bot", "bottom", "false", "f", "0", "negative", "⊥"):
        return False
    raise ValueError(f"target must be top or bot, got {target!r}")


@dataclass(frozen=True)
class ProblemInstance:
    assignment: PartialAssignment
    psi: Union[CnfFormula, Formula]
    target: bool
    bound: int | None = None

    def __post_init__(self):
        if not isinstance(self.assignment, PartialAssignment):
            object.__setattr__(self, "assignment", PartialAssignment(self.assignment))
        object.__setattr__(self, "target", parse_target(self.target))
        if self.bound is not None and self.bound < 0:
            raise ValueError("bound must be non-negative")

    @property
    def mode(self) -> str:
        return "positive" if self.target else "negative"

    @property
    def is_cnf(self) -> bool:
        return isinstance(self.psi, CnfFormula)

    def psi_variables(self) -> frozenset[int]:
        if self.is_cnf:
            return self.psi.variables()
        return atoms(self.psi)


@dataclass(frozen=True)
class Explanation:
    chi: tuple[int, ...]
    mode: str
    rendered: Formula = field(compare=False)
    size: int

    @classmethod
    def from_literals(cls, chi: Iterable[int], mode: str) -> "Explanation":
        lits = tuple(sorted(set(chi), key=lit_key))
        r: Rendered = dm_render(lits, mode)
        return cls(lits, mode, r.rendered, r.size)

    @property
    def cardinality(self) -> int:
        return len(self.chi)


def _order_key(lits: Iterable[int], mode: str) -> tuple:
    lits = sorted(lits, key=lit_key)
    return (_has_negation(lits, mode), [lit_key(l) for l in lits])


def _has_negation(lits: Iterable[int], mode: str) -> bool:
    if mode == "positive":
        return any(l < 0 for l in lits)
    return any(l > 0 for l in lits)


def _preferred(lits: Iterable[int], mode: str) -> list[int]:
    """Literals that keep the De Morgan form negation-free."""
    return [l for l in lits if (l > 0) == (mode == "positive")]


# ---------------------------------------------------------------------------
# preconditions


def _sat_encoding(inst: ProblemInstance) -> CnfFormula:
    """Clause set whose unsatisfiability under ``chi`` means ``chi`` explains ``psi``.

    Target false on a CNF: the CNF itself.  Otherwise a Tseitin encoding of
    ``~psi`` (target true) or ``psi`` (target false) with the root asserted;
    auxiliary variables sit above every assignment variable.
    """
    top_var = max((abs(l) for l in inst.assignment.literals), default=0)
    if inst.is_cnf:
        if inst.target:
            raise ValueError("positive CNF instances are solved as set cover")
        cnf = inst.psi
        return cnf if cnf.num_vars >= top_var else CnfFormula(top_var, cnf.clauses)
    goal = Neg(inst.psi) if inst.target else inst.psi
    enc = tseitin(goal, num_vars=top_var)
    return enc.cnf.with_clauses([(enc.root,)])


def check_precondition(inst: ProblemInstance) -> bool:
    lits = inst.assignment.literals
    if inst.is_cnf:
        if inst.target:
            return cnf_valid_after(inst.psi, lits)
    elif inst.assignment.is_total_over(atoms(inst.psi)):
        return eval_ast(inst.psi, inst.assignment) == inst.target
    return solve(_sat_encoding(inst), lits).unsat


# ---------------------------------------------------------------------------
# search


class _Search:
    def __init__(self, inst: ProblemInstance, timeout: float | None, seed: int):
        self.inst = inst
        self.mode = inst.mode
        self.seed = seed
        self.deadline = None if timeout is None else time.monotonic() + timeout
        lits = inst.assignment.literals
        if inst.is_cnf:
            relevant = inst.psi.variables()
        else:
            relevant = atoms(inst.psi)
        # literals on variables psi never mentions cannot matter
        self.lits = sorted((l for l in lits if abs(l) in relevant), key=lit_key)
        self.lower_bound = 0
        self.incumbent: Explanation | None = None

    def _expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline

    def _timeout(self):
        return ExplainTimeout(self.incumbent, self.lower_bound)

    def run(self, max_card: int | None = None) -> Explanation | None:
        if not check_precondition(self.inst):
            raise PreconditionError(f"formula does not evaluate to "
                                    f"{'top' if self.inst.target else 'bot'} under the assignment")
        try:
            if self.inst.is_cnf and self.inst.target:
                return self._set_cover(max_card)
            return self._implicit_hitting_set(max_card)
        except SearchTimeout:
            raise self._timeout() from None

    # positive CNF: every non-tautological clause needs a literal of chi
    def _set_cover(self, max_card):
        lset = set(self.lits)
        problem = HittingSetProblem(self.lits)
        for clause in self.inst.psi.clauses:
            if not is_tautology(clause):
                problem.add(lset.intersection(clause))
        greedy = problem.greedy()
        self.incumbent = Explanation.from_literals(greedy, self.mode)
        self.lower_bound = problem.lower_bound()
        k = problem.minimum_size(cap=max_card, deadline=self.deadline)
        if k is None:
            return None
        self.lower_bound = k
        chi = problem.first(k, allowed=_preferred(self.lits, self.mode), deadline=self.deadline)
        if chi is None:
            chi = problem.first(k, deadline=self.deadline)
        return Explanation.from_literals(chi, self.mode)

    # everything else: chi must make the encoding unsatisfiable.  Each
    # satisfying model m yields the set of L-literals m falsifies; every
    # explanation has to contain one of them.
    def _implicit_hitting_set(self, max_card):
        cnf = _sat_encoding(self.inst)
        solver = Solver(cnf, seed=self.seed)
        solver.set_phases(self.lits)
        first = solver.solve(self.lits)
        if first.sat:  # pragma: no cover - excluded by the precondition
            raise PreconditionError("assignment does not force the target value")
        self.incumbent = Explanation.from_literals(first.core & set(self.lits), self.mode)
        problem = HittingSetProblem(self.lits)
        preferred = _preferred(self.lits, self.mode)
        k = 0
        while max_card is None or k <= max_card:
            self.lower_bound = k
            for allowed in (preferred, None):
                while True:
                    if self._expired():
                        raise self._timeout()
                    chi = problem.first(k, allowed=allowed, deadline=self.deadline)
                    if chi is None:
                        break
                    res = solver.solve(chi)
                    if res.unsat:
                        return Explanation.from_literals(chi, self.mode)
                    falsified = [l for l in self.lits if res.model[abs(l)] != (l > 0)]
                    problem.add(falsified)
            k += 1
        return None


def explain_min(inst: ProblemInstance, timeout: float | None = DEFAULT_TIMEOUT, seed: int = 0) -> Explanation:
    """Minimum explanation; raises PreconditionError or ExplainTimeout."""
    return _Search(inst, timeout, seed).run()


def decide_bounded(inst: ProblemInstance, k: int | None = None, timeout: float | None = DEFAULT_TIMEOUT,
                   seed: int = 0) -> bool:
    """True iff some explanation has De Morgan size at most ``k``."""
    if k is None:
        k = inst.bound
    if k is None:
        raise ValueError("no size bound given")
    if k < 0:
        if not check_precondition(inst):
            raise PreconditionError("precondition fails")
        return False
    # size 2c-1 or 2c for c literals, 0 for the empty explanation
    found = _Search(inst, timeout, seed).run(max_card=(k + 1) // 2)
    return found is not None and found.size <= k


# ---------------------------------------------------------------------------
# brute force oracle


def _truth_table(inst: ProblemInstance, variables: list[int]) -> np.ndarray:
    """Value of psi on every assignment; bit ``len-1-i`` of the index is ``variables[i]``."""
    n = len(variables)
    idx = np.arange(1 << n, dtype=np.int64)
    col = {v: ((idx >> (n - 1 - i)) & 1).astype(bool) for i, v in enumerate(variables)}
    if inst.is_cnf:
        out = np.ones(idx.shape, dtype=bool)
        for clause in inst.psi.clauses:
            sat = np.zeros(idx.shape, dtype=bool)
            for l in clause:
                sat |= col[l] if l > 0 else ~col[abs(l)]
            out &= sat
        return out

    from .formula import And, Atom, Bottom, Or, Top

    def ev(node):
        if isinstance(node, Atom):
            return col[node.var]
        if isinstance(node, Neg):
            return ~ev(node.child)
        if isinstance(node, And):
            return ev(node.left) & ev(node.right)
        if isinstance(node, Or):
            return ev(node.left) | ev(node.right)
        if isinstance(node, Top):
            return np.ones(idx.shape, dtype=bool)
        if isinstance(node, Bottom):
            return np.zeros(idx.shape, dtype=bool)
        raise TypeError(node)

    return ev(inst.psi)


def brute_force_explain(inst: ProblemInstance, max_literals: int = MAX_BRUTE_LITERALS) -> Explanation:
    """Exhaustive search over subsets of the assignment's literals."""
    lits = inst.assignment.sorted_literals()
    if len(lits) > max_literals:
        raise ValueError(f"refusing brute force over {len(lits)} literals (limit {max_literals})")
    variables = sorted(inst.psi_variables())
    if len(variables) > MAX_BRUTE_VARS:
        raise ValueError(f"refusing truth table over {len(variables)} variables")
    n = len(variables)
    bit = {v: n - 1 - i for i, v in enumerate(variables)}
    table = _truth_table(inst, variables)
    idx = np.arange(1 << n, dtype=np.int64)
    # assignments that would refute chi as an explanation
    bad = idx[~table] if inst.target else idx[table]

    def explains(chi) -> bool:
        care = val = 0
        for l in chi:
            b = bit.get(abs(l))
            if b is None:
                continue
            care |= 1 << b
            if l > 0:
                val |= 1 << b
        return not np.any((bad & care) == val)

    if not explains(lits):
        raise PreconditionError("formula does not take the target value under the assignment")
    mode = inst.mode
    for c in range(len(lits) + 1):
        combos = list(itertools.combinations(lits, c))
        for chi in sorted(combos, key=lambda ch: _order_key(ch, mode)):
            if explains(chi):
                return Explanation.from_literals(chi, mode)
    raise AssertionError("unreachable: the full literal set explains")  # pragma: no cover
