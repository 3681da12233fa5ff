"""Hardness reductions into the explainability problem, with checkers.

* 2QBF (exists-forall) truth  ->  bounded explanation of a general formula;
* dominating set             ->  bounded positive explanation of a monotone CNF;
* CNF unsatisfiability       ->  size-1 negative explanation.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable

from .explain import PreconditionError, ProblemInstance, decide_bounded, explain_min
from .formula import (
    And,
    Atom,
    CnfFormula,
    Formula,
    Neg,
    Or,
    PartialAssignment,
    ParseError,
    atoms,
    conjoin,
    disjoin,
    eval_ast,
    formula_size,
    parse_formula,
)
from .sat import enumerate_models

MAX_QBF_VARS = 20


@dataclass(frozen=True)
class Qbf2Instance:
    """``exists exist_vars . forall univ_vars . matrix``."""

    exist_vars: tuple[int, ...]
    univ_vars: tuple[int, ...]
    matrix: Formula

    def __post_init__(self):
        object.__setattr__(self, "exist_vars", tuple(self.exist_vars))
        object.__setattr__(self, "univ_vars", tuple(self.univ_vars))
        prefix = self.exist_vars + self.univ_vars
        if len(set(prefix)) != len(prefix):
            raise ValueError("quantified variables must be distinct")
        stray = atoms(self.matrix) - set(prefix)
        if stray:
            raise ValueError(f"matrix mentions unquantified atoms {sorted(stray)}")


@dataclass(frozen=True)
class Graph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        vs = tuple(sorted(set(self.vertices)))
        es = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge ({u}, {v}) leaves the vertex set")
            es.add((min(u, v), max(u, v)))
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", frozenset(es))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], vertices: Iterable[int] = ()) -> "Graph":
        edges = list(edges)
        vs = set(vertices)
        for u, v in edges:
            vs.update((u, v))
        return cls(tuple(vs), frozenset(edges))

    def neighbors(self, v: int) -> list[int]:
        out = [b for a, b in self.edges if a == v] + [a for a, b in self.edges if b == v]
        return sorted(out)

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def is_dominating(self, subset: Iterable[int]) -> bool:
        d = set(subset)
        adj = self.adjacency()
        return all(v in d or adj[v] & d for v in self.vertices)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = self.adjacency()
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)


def parse_edge_list(text: str) -> Graph:
    """``u v`` per line; a lone ``v`` declares an isolated vertex; ``#``/``c`` comments."""
    edges, vertices = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise ParseError(f"bad edge line {line!r}", line=lineno) from None
        if len(nums) == 1:
            vertices.append(nums[0])
        elif len(nums) == 2:
            edges.append((nums[0], nums[1]))
        else:
            raise ParseError(f"bad edge line {line!r}", line=lineno)
    try:
        return Graph.from_edges(edges, vertices)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def render_edge_list(g: Graph) -> str:
    lines = [f"{u} {v}" for u, v in sorted(g.edges)]
    covered = {x for e in g.edges for x in e}
    lines += [str(v) for v in g.vertices if v not in covered]
    return "\n".join(lines) + "\n"


def parse_qbf(text: str) -> Qbf2Instance:
    """Prefix lines ``e 1 2 0`` / ``a 3 0`` followed by the matrix in formula text."""
    exist, univ, body = [], [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        head = stripped.split(maxsplit=1)[0] if stripped else ""
        if head in ("e", "a") and not body:
            toks = stripped.split()[1:]
            try:
                nums = [int(t) for t in toks]
            except ValueError:
                raise ParseError(f"bad prefix line {stripped!r}", line=lineno) from None
            if not nums or nums[-1] != 0:
                raise ParseError("prefix line must end with 0", line=lineno)
            (exist if head == "e" else univ).extend(nums[:-1])
        elif stripped.startswith("c ") and not body:
            continue
        else:
            body.append(line)
    matrix = parse_formula("\n".join(body))
    try:
        return Qbf2Instance(tuple(exist), tuple(univ), matrix)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


# ---------------------------------------------------------------------------
# 2QBF


def qbf2_eval(q: Qbf2Instance) -> bool:
    n, m = len(q.exist_vars), len(q.univ_vars)
    if n + m > MAX_QBF_VARS:
        raise ValueError(f"refusing brute force over {n + m} quantified variables")
    for xs in itertools.product((False, True), repeat=n):
        env = dict(zip(q.exist_vars, xs))
        if all(eval_ast(q.matrix, {**env, **dict(zip(q.univ_vars, ys))})
               for ys in itertools.product((False, True), repeat=m)):
            return True
    return False


@dataclass(frozen=True)
class Sigma2Reduction:
    instance: ProblemInstance
    k: int
    complements: tuple[int, ...]


def sigma2_to_explainability(q: Qbf2Instance) -> Sigma2Reduction:
    """Build psi = AND_i (p_i | pbar_i) & (theta | OR_i (p_i & pbar_i)).

    The all-true assignment satisfies psi, and an explanation of size at most
    ``2n - 1`` exists iff the quantified formula is true.
    """
    n, m = len(q.exist_vars), len(q.univ_vars)
    if n == 0:
        raise ValueError("the reduction needs at least one existential variable")
    base = max((n + m,) + q.exist_vars + q.univ_vars)
    bars = tuple(base + i for i in range(1, n + 1))
    ps = [Atom(p) for p in q.exist_vars]
    pbs = [Atom(b) for b in bars]
    choice = conjoin(Or(p, pb) for p, pb in zip(ps, pbs))
    escape = disjoin([q.matrix] + [And(p, pb) for p, pb in zip(ps, pbs)])
    psi = And(choice, escape)
    everything = set(q.exist_vars) | set(q.univ_vars) | set(bars)
    inst = ProblemInstance(PartialAssignment.all_true(everything), psi, True, 2 * n - 1)
    return Sigma2Reduction(inst, 2 * n - 1, bars)


# ---------------------------------------------------------------------------
# dominating set


def domset_cnf(g: Graph) -> tuple[CnfFormula, dict[int, int]]:
    """One clause per vertex: the vertex or one of its neighbours is chosen."""
    if not g.vertices:
        raise ValueError("graph has no vertices")
    var = {v: i for i, v in enumerate(g.vertices, start=1)}
    adj = g.adjacency()
    clauses = [(var[v],) + tuple(var[u] for u in sorted(adj[v])) for v in g.vertices]
    return CnfFormula(len(var), tuple(clauses)), var


@dataclass(frozen=True)
class DomsetReduction:
    instance: ProblemInstance
    k: int
    atom_map: dict = field(compare=False)


def domset_to_explainability(g: Graph, k: int) -> DomsetReduction:
    cnf, var = domset_cnf(g)
    inst = ProblemInstance(PartialAssignment.all_true(var.values()), cnf, True, 2 * k - 1)
    return DomsetReduction(inst, 2 * k - 1, var)


def domination_number(g: Graph) -> int:
    """Exhaustive subset search, smallest size first."""
    for size in range(len(g.vertices) + 1):
        for subset in itertools.combinations(g.vertices, size):
            if g.is_dominating(subset):
                return size
    raise AssertionError("unreachable")  # pragma: no cover


# ---------------------------------------------------------------------------
# coNP gadget


@dataclass(frozen=True)
class ConpGadget:
    instance: ProblemInstance
    q: int


def conp_gadget(psi: CnfFormula) -> ConpGadget:
    """Negative instance with a size-1 explanation iff ``psi`` is unsatisfiable.

    Explains ``psi & ~q`` being false under the assignment making every
    original atom true and the fresh atom ``q`` false.
    """
    phi = range(1, psi.num_vars + 1)
    if psi.satisfied_by({v: True for v in phi}):
        raise PreconditionError("the all-true assignment must falsify the formula")
    q = psi.num_vars + 1
    formula = CnfFormula(q, psi.clauses + ((-q,),))
    assignment = PartialAssignment(list(phi) + [-q])
    return ConpGadget(ProblemInstance(assignment, formula, False, 1), q)


# ---------------------------------------------------------------------------
# verification harness


@dataclass
class ReductionReport:
    kind: str
    checked: int = 0
    agreed: int = 0
    disagreements: list = field(default_factory=list)
    complete: bool = True

    @property
    def all_agree(self) -> bool:
        return self.agreed == self.checked

    def summary(self) -> str:
        state = "complete" if self.complete else "partial (budget exhausted)"
        return f"{self.kind}: {self.agreed}/{self.checked} agree, {state}"


def _check_one(kind: str, item) -> tuple[object, object]:
    if kind == "sigma2":
        red = sigma2_to_explainability(item)
        return qbf2_eval(item), decide_bounded(red.instance, red.k, timeout=None)
    if kind == "domset":
        g, k = item if isinstance(item, tuple) else (item, None)
        gamma = domination_number(g)
        if k is None:
            red = domset_to_explainability(g, gamma)
            return 2 * gamma - 1, explain_min(red.instance, timeout=None).size
        red = domset_to_explainability(g, k)
        return gamma <= k, decide_bounded(red.instance, red.k, timeout=None)
    if kind == "conp":
        gadget = conp_gadget(item)
        return not enumerate_models(item), decide_bounded(gadget.instance, 1, timeout=None)
    raise ValueError(f"unknown reduction {kind!r}")


def verify_reduction(kind: str, inputs: Iterable, budget: float | None = None) -> ReductionReport:
    """Run oracle and explanation pipeline side by side on every input.

    ``sigma2``: QBF truth vs. bounded explainability at ``2n - 1``.
    ``domset``: a graph compares ``2*gamma - 1`` with the minimum explanation
    size; a ``(graph, k)`` pair compares ``gamma <= k`` with the bounded
    decision at ``2k - 1``.
    ``conp``: unsatisfiability vs. existence of a size-1 explanation.
    """
    report = ReductionReport(kind)
    deadline = None if budget is None else time.monotonic() + budget
    for item in inputs:
        if deadline is not None and time.monotonic() > deadline:
            report.complete = False
            break
        expected, got = _check_one(kind, item)
        report.checked += 1
        if expected == got:
            report.agreed += 1
        else:
            report.disagreements.append((item, expected, got))
    return report


def random_qbf2(rng, n: int, m: int, max_size: int = 8) -> Qbf2Instance:
    """Random matrix over ``n + m`` atoms with formula size at most ``max_size``."""
    variables = list(range(1, n + m + 1))

    def build(budget: int) -> Formula:
        if budget <= 2 or rng.random() < 0.3:
            node = Atom(rng.choice(variables))
            if budget >= 2 and rng.random() < 0.4:
                node = Neg(node)
            return node
        left = rng.randint(1, budget - 2)
        ctor = And if rng.random() < 0.5 else Or
        return ctor(build(left), build(budget - 1 - left))

    matrix = build(max_size)
    assert formula_size(matrix) <= max_size
    return Qbf2Instance(tuple(variables[:n]), tuple(variables[n:]), matrix)
