"""Command line interface.

Exit codes: 0 success / yes, 1 no or failed precondition, 2 usage or parse
error, 3 timeout.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .explain import (
    DEFAULT_TIMEOUT,
    ExplainTimeout,
    PreconditionError,
    ProblemInstance,
    check_precondition,
    decide_bounded,
    explain_min,
)
from .formula import (
    FormulaError,
    ParseError,
    PartialAssignment,
    format_formula,
    parse_assignment,
    parse_dimacs,
    parse_formula,
    render_assignment,
    render_dimacs,
    to_equivalent_cnf,
)
from .reductions import (
    conp_gadget,
    domset_to_explainability,
    parse_edge_list,
    parse_qbf,
    render_edge_list,
    sigma2_to_explainability,
)

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_TIMEOUT = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}") from None


def _parse_file(path: str, parser):
    try:
        return parser(_read(path))
    except (ParseError, FormulaError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _load_instance(args) -> tuple[ProblemInstance, dict | None]:
    names = None
    if args.format == "formula":
        names = {}
        psi = _parse_file(args.formula_file, lambda t: parse_formula(t, names))
    else:
        psi = _parse_file(args.formula_file, parse_dimacs)
    assignment = _parse_file(args.assignment_file, parse_assignment)
    return ProblemInstance(assignment, psi, args.target), names


def _common(p: argparse.ArgumentParser, top_level: bool = False) -> None:
    default = None if top_level else argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=0 if top_level else default, help="random seed (default 0)")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT if top_level else default,
                   help=f"wall-clock budget in seconds (default {DEFAULT_TIMEOUT:g})")


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-f", "--formula", dest="formula_file", required=True, help="formula file")
    p.add_argument("-a", "--assignment", dest="assignment_file", required=True,
                   help="assignment file (signed integers)")
    p.add_argument("-b", "--target", choices=("top", "bot"), required=True, help="truth value to explain")
    p.add_argument("--format", choices=("dimacs", "formula"), default="dimacs", help="formula file syntax")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plexplain", description=__doc__.splitlines()[0])
    _common(parser, top_level=True)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check that the formula takes the target value")
    _instance_args(p)
    _common(p)

    p = sub.add_parser("explain", help="print a minimum explanation")
    _instance_args(p)
    p.add_argument("--k", type=int, help="only decide whether size <= K explanations exist")
    _common(p)

    p = sub.add_parser("decide", help="decide whether an explanation of size <= K exists")
    _instance_args(p)
    p.add_argument("--k", type=int, required=True)
    _common(p)

    p = sub.add_parser("reduce", help="build an explainability instance from a reduction")
    p.add_argument("kind", choices=("sigma2", "domset", "conp"))
    p.add_argument("input", help="QBF file (sigma2), edge list (domset) or DIMACS (conp)")
    p.add_argument("--k", type=int, help="dominating set size bound (domset)")
    p.add_argument("-o", "--output-prefix", help="write PREFIX.cnf and PREFIX.assign instead of stdout")
    _common(p)

    p = sub.add_parser("gen", help="generate benchmark formulas and graphs")
    p.add_argument("family", choices=("queens", "domset", "planar"))
    p.add_argument("arg", help="n (queens), edge-list file (domset) or vertex count (planar)")
    _common(p)

    p = sub.add_parser("bench", help="run an experiment grid and write CSV")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--output", help="CSV path (overrides the config; default stdout)")
    p.add_argument("--jobs", type=int, help="worker processes")
    _common(p)
    return parser


def _print_explanation(expl, names) -> None:
    print("chi: " + " ".join(str(l) for l in expl.chi))
    print("formula: " + format_formula(expl.rendered, names))
    print(f"cardinality={expl.cardinality}; size={expl.size}")


def cmd_check(args) -> int:
    inst, _ = _load_instance(args)
    if check_precondition(inst):
        print("ok: precondition holds")
        return EXIT_OK
    print("error: precondition fails")
    return EXIT_NO


def cmd_explain(args) -> int:
    if args.k is not None:
        return cmd_decide(args)
    inst, names = _load_instance(args)
    expl = explain_min(inst, timeout=args.timeout, seed=args.seed)
    _print_explanation(expl, names)
    return EXIT_OK


def cmd_decide(args) -> int:
    inst, _ = _load_instance(args)
    yes = decide_bounded(inst, args.k, timeout=args.timeout, seed=args.seed)
    print("yes" if yes else "no")
    return EXIT_OK if yes else EXIT_NO


def _emit(args, cnf, assignment: PartialAssignment, comments: list[str]) -> None:
    if args.output_prefix:
        Path(args.output_prefix + ".cnf").write_text(render_dimacs(cnf, comments))
        Path(args.output_prefix + ".assign").write_text(render_assignment(assignment))
        print("; ".join(comments))
    else:
        comments = comments + ["assignment " + render_assignment(assignment).strip()]
        sys.stdout.write(render_dimacs(cnf, comments))


def cmd_reduce(args) -> int:
    if args.kind == "sigma2":
        q = _parse_file(args.input, parse_qbf)
        try:
            red = sigma2_to_explainability(q)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        num_vars = max(abs(l) for l in red.instance.assignment.literals)
        cnf = to_equivalent_cnf(red.instance.psi, num_vars=num_vars)
        _emit(args, cnf, red.instance.assignment, ["target top", f"k {red.k}"])
    elif args.kind == "domset":
        if args.k is None:
            raise CliError("reduce domset needs --k")
        g = _parse_file(args.input, parse_edge_list)
        red = domset_to_explainability(g, args.k)
        atom_map = " ".join(f"{v}:{x}" for v, x in red.atom_map.items())
        _emit(args, red.instance.psi, red.instance.assignment, ["target top", f"k {red.k}", f"vertex:var {atom_map}"])
    else:
        psi = _parse_file(args.input, parse_dimacs)
        gadget = conp_gadget(psi)
        _emit(args, gadget.instance.psi, gadget.instance.assignment, ["target bot", "k 1", f"q {gadget.q}"])
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.family == "queens":
        try:
            n = int(args.arg)
        except ValueError:
            raise CliError(f"queens needs an integer size, got {args.arg!r}") from None
        cnf, _ = bench.gen_queens_cnf(n)
        sys.stdout.write(render_dimacs(cnf, [f"{n}-queens, queen(x,y) = (x-1)*{n}+y"]))
    elif args.family == "domset":
        g = _parse_file(args.arg, parse_edge_list)
        cnf, var = bench.gen_domset_cnf(g)
        sys.stdout.write(render_dimacs(cnf, ["dominating set, vertex:var " + " ".join(f"{v}:{x}" for v, x in var.items())]))
    else:
        try:
            v = int(args.arg)
        except ValueError:
            raise CliError(f"planar needs a vertex count, got {args.arg!r}") from None
        sys.stdout.write(render_edge_list(bench.gen_random_planar_graph(v, seed=args.seed)))
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        raw = json.loads(_read(args.config))
        raw.setdefault("seed", args.seed)
        raw.setdefault("timeout", args.timeout)
        if args.output:
            raw["output_path"] = args.output
        if args.jobs:
            raw["n_jobs"] = args.jobs
        cfg = bench.ExperimentConfig(**raw)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise CliError(f"{args.config}: {exc}") from None
    rows = bench.run_experiment(cfg)
    if not cfg.output_path:
        bench.write_csv(rows, sys.stdout)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "explain": cmd_explain, "decide": cmd_decide,
            "reduce": cmd_reduce, "gen": cmd_gen, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PreconditionError:
        print("error: precondition fails")
        return EXIT_NO
    except ExplainTimeout as exc:
        best = "none" if exc.best is None else f"cardinality={exc.best.cardinality}; size={exc.best.size}"
        print(f"timeout: lower bound cardinality={exc.lower_bound}; best {best}")
        return EXIT_TIMEOUT


if __name__ == "__main__":
    sys.exit(main())
