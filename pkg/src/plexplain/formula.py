"""Propositional formulas, CNF clause sets and three-valued assignments.

Literals are signed integers in the DIMACS convention: ``v`` is the atom
with index ``v`` and ``-v`` its negation.  Clauses are tuples of literals.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple, Union


class FormulaError(ValueError):
    """Base class for malformed formula or assignment input."""


class ParseError(FormulaError):
    def __init__(self, message: str, line: int | None = None, pos: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if pos is not None:
            where.append(f"position {pos}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.line = line
        self.pos = pos


class InconsistentAssignmentError(FormulaError):
    pass


class IncompleteAssignmentError(FormulaError):
    pass


# ---------------------------------------------------------------------------
# literals and clauses


def var_of(lit: int) -> int:
    return lit if lit > 0 else -lit


def lit_key(lit: int) -> tuple[int, int]:
    """Sort key ordering literals by variable, positive before negative."""
    return (abs(lit), 0 if lit > 0 else 1)


def is_tautology(clause: Iterable[int]) -> bool:
    lits = set(clause)
    return any(-l in lits for l in lits)


def _dedupe(lits: Iterable[int]) -> tuple[int, ...]:
    seen = set()
    out = []
    for l in lits:
        if l not in seen:
            seen.add(l)
            out.append(l)
    return tuple(out)


@dataclass(frozen=True)
class CnfFormula:
    """A clause set over variables ``1..num_vars``.

    Clause IDs are 1-based positions in ``clauses``.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.num_vars < 0:
            raise FormulaError("num_vars must be non-negative")
        clauses = tuple(_dedupe(int(l) for l in c) for c in self.clauses)
        for c in clauses:
            for l in c:
                if l == 0 or abs(l) > self.num_vars:
                    raise FormulaError(f"literal {l} out of range 1..{self.num_vars}")
        object.__setattr__(self, "clauses", clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.clauses)

    def variables(self) -> frozenset[int]:
        return frozenset(abs(l) for c in self.clauses for l in c)

    def satisfied_by(self, model: Mapping[int, bool]) -> bool:
        """Evaluate under a total assignment ``var -> bool``."""
        return all(any(model[abs(l)] == (l > 0) for l in c) for c in self.clauses)

    def with_clauses(self, extra: Iterable[Iterable[int]], num_vars: int | None = None) -> "CnfFormula":
        nv = self.num_vars if num_vars is None else num_vars
        return CnfFormula(nv, self.clauses + tuple(tuple(c) for c in extra))


# ---------------------------------------------------------------------------
# DIMACS


def parse_dimacs(text: str | bytes) -> CnfFormula:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    header = header_line = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    current_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError("duplicate header", line=lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", line=lineno)
            try:
                nv, nc = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", line=lineno) from None
            if nv < 0 or nc < 0:
                raise ParseError("negative counts in header", line=lineno)
            header = (nv, nc)
            header_line = lineno
            continue
        if header is None:
            raise ParseError("clause before 'p cnf' header", line=lineno)
        for tok in line.split():
            if tok == "%":
                # some benchmark archives end with '%\n0'
                break
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad token {tok!r}", line=lineno) from None
            if lit == 0:
                clauses.append(_dedupe(current))
                current = []
                current_line = None
                continue
            if abs(lit) > header[0]:
                raise ParseError(f"literal {lit} exceeds declared {header[0]} variables", line=lineno)
            if current_line is None:
                current_line = lineno
            current.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' header")
    if current:
        raise ParseError("unterminated clause", line=current_line)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}", line=header_line)
    return CnfFormula(header[0], tuple(clauses))


def render_dimacs(cnf: CnfFormula, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    for c in cnf.clauses:
        lines.append(" ".join(str(l) for l in c) + (" 0" if c else "0"))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# assignments


class PartialAssignment:
    """Three-valued assignment, stored as its consistent literal set."""

    __slots__ = ("_lits",)

    def __init__(self, literals: Iterable[int] = ()):
        lits = frozenset(int(l) for l in literals)
        if 0 in lits:
            raise FormulaError("0 is not a literal")
        for l in lits:
            if -l in lits:
                raise InconsistentAssignmentError(f"variable {abs(l)} assigned both values")
        self._lits = lits

    @classmethod
    def from_values(cls, values: Mapping[int, bool | None]) -> "PartialAssignment":
        return cls(v if b else -v for v, b in values.items() if b is not None)

    @classmethod
    def all_true(cls, variables: Iterable[int]) -> "PartialAssignment":
        return cls(variables)

    @property
    def literals(self) -> frozenset[int]:
        return self._lits

    def value(self, var: int) -> bool | None:
        if var in self._lits:
            return True
        if -var in self._lits:
            return False
        return None

    def assigned(self) -> frozenset[int]:
        return frozenset(abs(l) for l in self._lits)

    def is_total_over(self, variables: Iterable[int]) -> bool:
        return all(self.value(v) is not None for v in variables)

    def as_dict(self) -> dict[int, bool]:
        return {abs(l): l > 0 for l in self._lits}

    def extend(self, literals: Iterable[int]) -> "PartialAssignment":
        return PartialAssignment(self._lits | frozenset(literals))

    def sorted_literals(self) -> list[int]:
        return sorted(self._lits, key=lit_key)

    def __len__(self) -> int:
        return len(self._lits)

    def __contains__(self, lit: int) -> bool:
        return lit in self._lits

    def __iter__(self) -> Iterator[int]:
        return iter(self.sorted_literals())

    def __eq__(self, other) -> bool:
        return isinstance(other, PartialAssignment) and self._lits == other._lits

    def __hash__(self) -> int:
        return hash(self._lits)

    def __repr__(self) -> str:
        return f"PartialAssignment({self.sorted_literals()})"


def parse_assignment(text: str | bytes) -> PartialAssignment:
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lits = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        if line.lstrip().startswith("c "):
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad token {tok!r}", line=lineno) from None
            if lit == 0:
                raise ParseError("0 is not a literal", line=lineno)
            lits.append(lit)
    return PartialAssignment(lits)


def render_assignment(assignment: PartialAssignment) -> str:
    return " ".join(str(l) for l in assignment.sorted_literals()) + "\n"


# ---------------------------------------------------------------------------
# partial evaluation


class PartialEval(NamedTuple):
    simplified: CnfFormula
    kept: tuple[int, ...]
    removed: frozenset[int]
    falsified: frozenset[int]


def partial_eval(cnf: CnfFormula, assignment: PartialAssignment | Iterable[int]) -> PartialEval:
    """Simplify ``cnf`` under a literal set.

    Satisfied and tautological clauses are removed, falsified literals are
    dropped from the rest, and clauses left with no literals are reported as
    falsified (they do not appear in ``simplified``).
    """
    lits = assignment.literals if isinstance(assignment, PartialAssignment) else frozenset(assignment)
    kept, removed, falsified, out = [], set(), set(), []
    for cid, clause in enumerate(cnf.clauses, start=1):
        if is_tautology(clause) or any(l in lits for l in clause):
            removed.add(cid)
            continue
        rest = tuple(l for l in clause if -l not in lits)
        if not rest:
            falsified.add(cid)
        else:
            kept.append(cid)
            out.append(rest)
    return PartialEval(CnfFormula(cnf.num_vars, tuple(out)), tuple(kept), frozenset(removed), frozenset(falsified))


def cnf_valid_after(cnf: CnfFormula, assignment: PartialAssignment | Iterable[int]) -> bool:
    """True iff ``cnf`` simplified by the literal set is valid."""
    res = partial_eval(cnf, assignment)
    return not res.kept and not res.falsified


# ---------------------------------------------------------------------------
# formula syntax trees


@dataclass(frozen=True)
class Atom:
    var: int

    def __post_init__(self):
        if self.var < 1:
            raise FormulaError("atom index must be >= 1")


@dataclass(frozen=True)
class Neg:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Top:
    """Verum; only produced for empty explanations, size 0."""


@dataclass(frozen=True)
class Bottom:
    """Falsum; only produced for empty explanations, size 0."""


Formula = Union[Atom, Neg, And, Or, Top, Bottom]
FormulaAst = Formula


def formula_size(f: Formula) -> int:
    """Occurrences of atoms, binary connectives and negations."""
    size = 0
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            size += 1
        elif isinstance(node, Neg):
            size += 1
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            size += 1
            stack.append(node.left)
            stack.append(node.right)
    return size


def atoms(f: Formula) -> frozenset[int]:
    out = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.add(node.var)
        elif isinstance(node, Neg):
            stack.append(node.child)
        elif isinstance(node, (And, Or)):
            stack.append(node.left)
            stack.append(node.right)
    return frozenset(out)


def atom_occurrences(f: Formula) -> int:
    if isinstance(f, Atom):
        return 1
    if isinstance(f, Neg):
        return atom_occurrences(f.child)
    if isinstance(f, (And, Or)):
        return atom_occurrences(f.left) + atom_occurrences(f.right)
    return 0


def conjoin(parts: Iterable[Formula]) -> Formula:
    """Left-associated conjunction; ``Top`` when empty."""
    out = None
    for p in parts:
        out = p if out is None else And(out, p)
    return Top() if out is None else out


def disjoin(parts: Iterable[Formula]) -> Formula:
    out = None
    for p in parts:
        out = p if out is None else Or(out, p)
    return Bottom() if out is None else out


def literal_formula(lit: int) -> Formula:
    return Atom(lit) if lit > 0 else Neg(Atom(-lit))


def eval_ast(f: Formula, s: PartialAssignment | Mapping[int, bool]) -> bool:
    if isinstance(s, PartialAssignment):
        lookup = s.value
    else:
        lookup = s.get

    def ev(node):
        if isinstance(node, Atom):
            v = lookup(node.var)
            if v is None:
                raise IncompleteAssignmentError(f"atom p{node.var} is unassigned")
            return v
        if isinstance(node, Neg):
            return not ev(node.child)
        if isinstance(node, And):
            return ev(node.left) and ev(node.right)
        if isinstance(node, Or):
            return ev(node.left) or ev(node.right)
        if isinstance(node, Top):
            return True
        if isinstance(node, Bottom):
            return False
        raise TypeError(f"not a formula: {node!r}")

    return ev(f)


def nnf(f: Formula) -> Formula:
    """Negation normal form."""
    if isinstance(f, Neg):
        return dualize(f.child)
    if isinstance(f, And):
        return And(nnf(f.left), nnf(f.right))
    if isinstance(f, Or):
        return Or(nnf(f.left), nnf(f.right))
    return f


def dualize(f: Formula) -> Formula:
    """Negation normal form of ``~f``: swap connectives, flip literals."""
    if isinstance(f, Atom):
        return Neg(f)
    if isinstance(f, Neg):
        return nnf(f.child)
    if isinstance(f, And):
        return Or(dualize(f.left), dualize(f.right))
    if isinstance(f, Or):
        return And(dualize(f.left), dualize(f.right))
    if isinstance(f, Top):
        return Bottom()
    if isinstance(f, Bottom):
        return Top()
    raise TypeError(f"not a formula: {f!r}")


def _flatten(f: Formula, kind: type) -> list[Formula]:
    out, stack = [], [f]
    while stack:
        node = stack.pop()
        if isinstance(node, kind):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def _as_literal(f: Formula) -> int | None:
    if isinstance(f, Atom):
        return f.var
    if isinstance(f, Neg) and isinstance(f.child, Atom):
        return -f.child.var
    return None


def ast_to_cnf(f: Formula, num_vars: int | None = None) -> CnfFormula:
    """Read a syntactically CNF formula into a clause set (no new variables).

    Raises FormulaError if ``f`` is not a conjunction of disjunctions of
    literals.
    """
    nv = max(atoms(f), default=0) if num_vars is None else num_vars
    clauses = []
    for conj in _flatten(f, And):
        if isinstance(conj, Top):
            continue
        clause = []
        for d in _flatten(conj, Or):
            if isinstance(d, Bottom):
                continue
            lit = _as_literal(d)
            if lit is None:
                raise FormulaError("formula is not in CNF")
            clause.append(lit)
        clauses.append(tuple(clause))
    return CnfFormula(nv, tuple(clauses))


def cnf_to_ast(cnf: CnfFormula) -> Formula:
    return conjoin(disjoin(literal_formula(l) for l in c) for c in cnf.clauses)


def to_equivalent_cnf(f: Formula, num_vars: int | None = None, max_clauses: int = 100_000) -> CnfFormula:
    """Logically equivalent CNF by distribution over the NNF (no new variables).

    Exponential in the worst case; ``max_clauses`` guards against blow-up.
    """

    def go(node) -> list[frozenset[int]]:
        if isinstance(node, Top):
            return []
        if isinstance(node, Bottom):
            return [frozenset()]
        lit = _as_literal(node)
        if lit is not None:
            return [frozenset([lit])]
        if isinstance(node, And):
            return _simplify_clauses(go(node.left) + go(node.right))
        if isinstance(node, Or):
            left, right = go(node.left), go(node.right)
            if len(left) * len(right) > max_clauses:
                raise FormulaError("CNF expansion exceeds clause budget")
            return _simplify_clauses([a | b for a in left for b in right])
        raise TypeError(f"not a formula: {node!r}")

    nv = max(atoms(f), default=0) if num_vars is None else num_vars
    clauses = go(nnf(f))
    return CnfFormula(nv, tuple(tuple(sorted(c, key=lit_key)) for c in clauses))


def _simplify_clauses(clauses: list[frozenset[int]]) -> list[frozenset[int]]:
    out = []
    seen = set()
    for c in clauses:
        if is_tautology(c) or c in seen:
            continue
        seen.add(c)
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# formula text grammar:  ~ binds tighter than &, & tighter than |

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[~&|()!])|(?P<bad>\S))")
_INDEXED = re.compile(r"p([1-9][0-9]*)")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group("ident"):
            toks.append(("ident", m.group("ident"), m.start("ident")))
        elif m.group("op"):
            op = "~" if m.group("op") == "!" else m.group("op")
            toks.append(("op", op, m.start("op")))
        elif m.group("bad"):
            raise ParseError(f"unexpected character {m.group('bad')!r}", pos=m.start("bad"))
        pos = m.end()
    return toks


def parse_formula(text: str, names: dict[str, int] | None = None) -> Formula:
    """Parse ``p1 & ~(q | r)``-style text.

    ``p<digits>`` denotes the atom with that index; other identifiers are
    interned into ``names`` (filled in place when given) and receive the
    smallest indices not used explicitly, in order of first occurrence.
    ``true``/``false`` are the constants.
    """
    toks = _tokenize(text)
    table = {} if names is None else names
    used = set(table.values())
    for kind, val, _ in toks:
        if kind == "ident":
            m = _INDEXED.fullmatch(val)
            if m:
                used.add(int(m.group(1)))
    next_free = [1]

    def intern(name: str) -> int:
        m = _INDEXED.fullmatch(name)
        if m:
            return int(m.group(1))
        if name not in table:
            while next_free[0] in used:
                next_free[0] += 1
            table[name] = next_free[0]
            used.add(next_free[0])
        return table[name]

    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def expect(op):
        nonlocal i
        t = peek()
        if t is None or t[1] != op or t[0] != "op":
            where = t[2] if t else len(text)
            raise ParseError(f"expected {op!r}", pos=where)
        i += 1

    def parse_or():
        nonlocal i
        node = parse_and()
        while (t := peek()) is not None and t == ("op", "|", t[2]):
            i += 1
            node = Or(node, parse_and())
        return node

    def parse_and():
        nonlocal i
        node = parse_unary()
        while (t := peek()) is not None and t == ("op", "&", t[2]):
            i += 1
            node = And(node, parse_unary())
        return node

    def parse_unary():
        nonlocal i
        t = peek()
        if t is None:
            raise ParseError("unexpected end of input", pos=len(text))
        kind, val, pos = t
        if kind == "op" and val == "~":
            i += 1
            return Neg(parse_unary())
        if kind == "op" and val == "(":
            i += 1
            node = parse_or()
            expect(")")
            return node
        if kind == "ident":
            i += 1
            if val == "true":
                return Top()
            if val == "false":
                return Bottom()
            return Atom(intern(val))
        raise ParseError(f"unexpected {val!r}", pos=pos)

    node = parse_or()
    if i != len(toks):
        raise ParseError(f"unexpected {toks[i][1]!r}", pos=toks[i][2])
    return node


def format_formula(f: Formula, names: Mapping[str, int] | None = None) -> str:
    """Render in the text grammar with every binary node parenthesised."""
    rev = {v: k for k, v in names.items()} if names else {}

    def go(node):
        if isinstance(node, Atom):
            return rev.get(node.var, f"p{node.var}")
        if isinstance(node, Neg):
            return "~" + go(node.child)
        if isinstance(node, And):
            return f"({go(node.left)} & {go(node.right)})"
        if isinstance(node, Or):
            return f"({go(node.left)} | {go(node.right)})"
        if isinstance(node, Top):
            return "true"
        if isinstance(node, Bottom):
            return "false"
        raise TypeError(f"not a formula: {node!r}")

    return go(f)


# ---------------------------------------------------------------------------
# Tseitin encoding


class TseitinResult(NamedTuple):
    cnf: CnfFormula
    root: int
    aux_range: range


def tseitin(f: Formula, num_vars: int | None = None) -> TseitinResult:
    """Definitional CNF with one fresh variable per internal node (post-order).

    Definitions are full equivalences, so both ``root`` and ``-root`` may be
    asserted.  Fresh variables start above ``max(num_vars, max atom)``.
    """
    base = max(max(atoms(f), default=0), num_vars or 0)
    clauses: list[tuple[int, ...]] = []
    counter = [base]

    def fresh():
        counter[0] += 1
        return counter[0]

    def go(node) -> int:
        if isinstance(node, Atom):
            return node.var
        if isinstance(node, Neg):
            c = go(node.child)
            a = fresh()
            clauses.extend([(-a, -c), (a, c)])
            return a
        if isinstance(node, And):
            l, r = go(node.left), go(node.right)
            a = fresh()
            clauses.extend([(-a, l), (-a, r), (a, -l, -r)])
            return a
        if isinstance(node, Or):
            l, r = go(node.left), go(node.right)
            a = fresh()
            clauses.extend([(-a, l, r), (a, -l), (a, -r)])
            return a
        if isinstance(node, (Top, Bottom)):
            a = fresh()
            clauses.append((a,) if isinstance(node, Top) else (-a,))
            return a
        raise TypeError(f"not a formula: {node!r}")

    root = go(f)
    return TseitinResult(CnfFormula(counter[0], tuple(clauses)), root, range(base + 1, counter[0] + 1))


# ---------------------------------------------------------------------------
# De Morgan rendering of subconjunctions


class Rendered(NamedTuple):
    rendered: Formula
    size: int


def dm_render(chi: Iterable[int], mode: str) -> Rendered:
    """De Morgan form of the conjunction ``chi`` (positive) or its negation.

    positive: ``(p1 & p2) & ~(q1 | q2)``;  negative: ``~(p1 & p2) | (q1 | q2)``.
    Empty parts are omitted; the empty conjunction renders as a size-0
    constant (``true`` in positive mode, ``false`` in negative mode).
    """
    lits = sorted(set(chi), key=lit_key)
    for l in lits:
        if -l in lits:
            raise InconsistentAssignmentError(f"complementary literals on variable {abs(l)}")
    pos = [Atom(l) for l in lits if l > 0]
    neg = [Atom(-l) for l in lits if l < 0]
    if mode in ("positive", "top", True):
        parts = []
        if pos:
            parts.append(conjoin(pos))
        if neg:
            parts.append(Neg(disjoin(neg)))
        node = conjoin(parts)
    elif mode in ("negative", "bot", False):
        parts = []
        if pos:
            parts.append(Neg(conjoin(pos)))
        if neg:
            parts.append(disjoin(neg))
        node = disjoin(parts)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return Rendered(node, formula_size(node))
