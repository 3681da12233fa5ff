"""Benchmark families (n-queens, dominating set), instance perturbation and
the experiment runner that writes one CSV row per solved instance."""
from __future__ import annotations

import csv
import io
import json
import logging
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .explain import ExplainTimeout, PreconditionError, ProblemInstance, check_precondition, explain_min
from .formula import CnfFormula, PartialAssignment
from .hitting import HittingSetProblem
from .reductions import Graph, domset_cnf
from .sat import Solver

log = logging.getLogger(__name__)

CSV_COLUMNS = ["family", "size", "instance_id", "seed", "mode", "precondition_ok",
               "explanation_cardinality", "dm_size", "wall_time_ms", "status"]

FAMILIES = ("queens", "domset")
MODES = ("positive", "negative")


# ---------------------------------------------------------------------------
# generators


def queen_var(n: int, x: int, y: int) -> int:
    return (x - 1) * n + y


def gen_queens_cnf(n: int) -> tuple[CnfFormula, dict[tuple[int, int], int]]:
    """n-queens with ``queen(x, y)`` = queen in column x, row y.

    Clause families in order: a queen per column, at most one per column,
    at most one per row, then the two diagonal directions.
    """
    if n < 1:
        raise ValueError("n must be positive")
    q = lambda x, y: queen_var(n, x, y)
    atom_map = {(x, y): q(x, y) for x in range(1, n + 1) for y in range(1, n + 1)}
    pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    triples = [(x1, x2, y1) for x1, x2 in pairs for y1 in range(1, n - (x2 - x1) + 1)]
    clauses = [tuple(q(x, y) for y in range(1, n + 1)) for x in range(1, n + 1)]
    clauses += [(-q(x, y1), -q(x, y2)) for x in range(1, n + 1) for y1, y2 in pairs]
    clauses += [(-q(x1, y), -q(x2, y)) for x1, x2 in pairs for y in range(1, n + 1)]
    clauses += [(-q(x1, y1), -q(x2, y1 + x2 - x1)) for x1, x2, y1 in triples]
    clauses += [(-q(x1, y1 + x2 - x1), -q(x2, y1)) for x1, x2, y1 in triples]
    return CnfFormula(n * n, tuple(clauses)), atom_map


def gen_domset_cnf(g: Graph) -> tuple[CnfFormula, dict[int, int]]:
    return domset_cnf(g)


def _segments_cross(p1, p2, p3, p4) -> bool:
    """Closed segments p1p2 and p3p4 share a point other than a common endpoint."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_segment(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    shared = {p1, p2} & {p3, p4}
    if shared:
        if len(shared) == 2:
            return True
        # a common endpoint is fine unless the segments overlap collinearly
        s = shared.pop()
        a = p2 if p1 == s else p1
        b = p4 if p3 == s else p3
        return orient(s, a, b) == 0 and (on_segment(s, a, b) or on_segment(s, b, a))
    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    if d1 != d2 and d3 != d4 and 0 not in (d1, d2, d3, d4):
        return True
    return ((d1 == 0 and on_segment(p3, p4, p1)) or (d2 == 0 and on_segment(p3, p4, p2))
            or (d3 == 0 and on_segment(p1, p2, p3)) or (d4 == 0 and on_segment(p1, p2, p4)))


def gen_random_planar_graph(v: int, seed: int = 0, keep: float = 0.5) -> Graph:
    """Connected planar graph from a straight-line embedding.

    Distinct random grid points are joined shortest-first whenever the new
    segment crosses no earlier one and passes through no other point
    (a greedy triangulation).  A random spanning tree is kept and each
    remaining edge survives with probability ``keep``.
    """
    if v < 1:
        raise ValueError("need at least one vertex")
    rng = random.Random(seed)
    side = max(4, 4 * v)
    cells = rng.sample(range(side * side), v)
    pts = [(c // side, c % side) for c in cells]
    cand = [(i, j) for i in range(v) for j in range(i + 1, v)]
    rng.shuffle(cand)
    cand.sort(key=lambda e: (pts[e[0]][0] - pts[e[1]][0]) ** 2 + (pts[e[0]][1] - pts[e[1]][1]) ** 2)
    edges: list[tuple[int, int]] = []
    for i, j in cand:
        a, b = pts[i], pts[j]
        if any(_segments_cross(a, b, pts[k], pts[l]) for k, l in edges):
            continue
        if any(k not in (i, j) and _segments_cross(a, b, pts[k], pts[k]) for k in range(v)):
            continue
        edges.append((i, j))
    # random spanning tree (shuffled Kruskal) keeps the graph connected
    parent = list(range(v))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = edges[:]
    rng.shuffle(order)
    tree, rest = [], []
    for i, j in order:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append((i, j))
        else:
            rest.append((i, j))
    kept = tree + [e for e in rest if rng.random() < keep]
    return Graph.from_edges(((i + 1, j + 1) for i, j in kept), vertices=range(1, v + 1))


def min_dominating_set(g: Graph, deadline: float | None = None) -> list[int]:
    """A minimum dominating set (lexicographically least among them)."""
    adj = g.adjacency()
    problem = HittingSetProblem(list(g.vertices), ([v, *adj[v]] for v in g.vertices))
    k = problem.minimum_size(deadline=deadline)
    return problem.first(k, deadline=deadline)


def sample_solution(cnf: CnfFormula, seed: int = 0) -> PartialAssignment:
    """A satisfying total assignment; the seed randomises phases and branching."""
    res = Solver(cnf, seed=seed, random_phase=True).solve()
    if not res.sat:
        raise ValueError("formula is unsatisfiable")
    return PartialAssignment.from_values(res.model)


# ---------------------------------------------------------------------------
# perturbation


def _queens_n(solution: PartialAssignment) -> int:
    n = round(len(solution.assigned()) ** 0.5)
    if n * n != len(solution.assigned()):
        raise ValueError("queens solution must assign all n*n atoms")
    return n


def perturb(family: str, solution: PartialAssignment, seed: int = 0, graph: Graph | None = None) -> PartialAssignment:
    """Turn a valid solution into an explanation literal set.

    ``queens-negative``: one column's queen moves to a different row.
    ``domset-negative``: one member of the (minimum) dominating set leaves it.
    ``domset-positive`` / ``queens-positive``: all in-atoms true / the solution.
    The family may be given as ``"queens"`` or ``"domset"`` (negative).
    """
    rng = random.Random(seed)
    if family in ("queens", "queens-negative"):
        n = _queens_n(solution)
        x = rng.randint(1, n)
        rows = [y for y in range(1, n + 1) if solution.value(queen_var(n, x, y))]
        if len(rows) != 1:
            raise ValueError(f"column {x} does not hold exactly one queen")
        y_old = rows[0]
        y_new = rng.choice([y for y in range(1, n + 1) if y != y_old])
        lits = set(solution.literals)
        lits -= {queen_var(n, x, y_old), -queen_var(n, x, y_new)}
        lits |= {-queen_var(n, x, y_old), queen_var(n, x, y_new)}
        return PartialAssignment(lits)
    if family == "queens-positive":
        return solution
    if family in ("domset", "domset-negative"):
        members = sorted(l for l in solution.literals if l > 0)
        if not members:
            raise ValueError("empty dominating set")
        drop = rng.choice(members)
        return PartialAssignment((solution.literals - {drop}) | {-drop})
    if family == "domset-positive":
        if graph is not None:
            return PartialAssignment.all_true(range(1, len(graph.vertices) + 1))
        return PartialAssignment.all_true(solution.assigned())
    raise ValueError(f"unknown perturbation family {family!r}")


# ---------------------------------------------------------------------------
# instance construction


def build_instance(family: str, mode: str, size: int, seed: int, max_retries: int = 20) -> ProblemInstance:
    """Deterministic benchmark instance for ``(family, mode, size, seed)``.

    Negative perturbations that do not falsify the formula are resampled.
    """
    target = mode == "positive"
    for attempt in range(max_retries):
        s = seed * 7919 + attempt
        if family == "queens":
            cnf, _ = gen_queens_cnf(size)
            sol = sample_solution(cnf, seed=s)
            lits = sol if target else perturb("queens-negative", sol, seed=s)
        elif family == "domset":
            g = gen_random_planar_graph(size, seed=s)
            cnf, var = gen_domset_cnf(g)
            if target:
                lits = perturb("domset-positive", PartialAssignment(), graph=g)
            else:
                ds = {var[u] for u in min_dominating_set(g)}
                sol = PartialAssignment(v if v in ds else -v for v in range(1, cnf.num_vars + 1))
                lits = perturb("domset-negative", sol, seed=s)
        else:
            raise ValueError(f"unknown family {family!r}")
        inst = ProblemInstance(lits, cnf, target)
        if target or check_precondition(inst):
            return inst
        log.info("resampling degenerate %s instance (size %d, attempt %d)", family, size, attempt)
    raise RuntimeError(f"no valid {family} instance after {max_retries} attempts")


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    family: str
    sizes: list[int]
    instances_per_size: int = 10
    mode: str = "negative"
    seed: int = 0
    timeout: float = 300.0
    output_path: str | None = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        if self.instances_per_size < 1:
            raise ValueError("instances_per_size must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))


def instance_seed(base: int, size: int, instance_id: int) -> int:
    return random.Random(f"{base}:{size}:{instance_id}").getrandbits(31)


def _run_one(cfg: ExperimentConfig, size: int, instance_id: int) -> dict:
    s = instance_seed(cfg.seed, size, instance_id)
    inst = build_instance(cfg.family, cfg.mode, size, s)
    row = dict(family=cfg.family, size=size, instance_id=instance_id, seed=s, mode=cfg.mode,
               precondition_ok=check_precondition(inst), explanation_cardinality="", dm_size="",
               wall_time_ms="", status="")
    if not row["precondition_ok"]:
        row["status"] = "precondition_error"
        return row
    t0 = time.perf_counter()
    try:
        e = explain_min(inst, timeout=cfg.timeout, seed=s)
        row.update(explanation_cardinality=e.cardinality, dm_size=e.size, status="ok")
    except ExplainTimeout:
        row["status"] = "timeout"
    except PreconditionError:
        row["status"] = "precondition_error"
    row["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return row


def _mean_row(cfg: ExperimentConfig, size: int, rows: list[dict]) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]

    def mean(key):
        vals = [float(r[key]) for r in ok]
        return round(statistics.fmean(vals), 3) if vals else ""

    return dict(family=cfg.family, size=size, instance_id="mean", seed=cfg.seed, mode=cfg.mode,
                precondition_ok=sum(bool(r["precondition_ok"]) for r in rows),
                explanation_cardinality=mean("explanation_cardinality"), dm_size=mean("dm_size"),
                wall_time_ms=mean("wall_time_ms"), status=f"{len(ok)}/{len(rows)} ok")


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Solve every instance of the grid; per-size mean rows follow each size."""
    jobs = [(size, i) for size in cfg.sizes for i in range(cfg.instances_per_size)]
    if cfg.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
            results = list(pool.map(_run_one, [cfg] * len(jobs), *zip(*jobs)))
    else:
        results = [_run_one(cfg, size, i) for size, i in jobs]
    rows: list[dict] = []
    for size in cfg.sizes:
        block = sorted((r for r in results if r["size"] == size), key=lambda r: r["instance_id"])
        rows.extend(block)
        rows.append(_mean_row(cfg, size, block))
        log.info("size %d: %s", size, rows[-1]["status"])
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            write_csv(rows, fh)
    return rows


def write_csv(rows: Iterable[dict], fh: io.TextIOBase) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: r[k] for k in CSV_COLUMNS})

