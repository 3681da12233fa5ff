"""Minimum-size explanations for propositional formulas."""
from .estimator import FormulaExplainer, check_assignments, check_formula
from .explain import (
    ExplainTimeout,
    Explanation,
    PreconditionError,
    ProblemInstance,
    brute_force_explain,
    check_precondition,
    decide_bounded,
    explain_min,
)
from .formula import (
    And,
    Atom,
    Bottom,
    CnfFormula,
    Neg,
    Or,
    PartialAssignment,
    ParseError,
    Top,
    cnf_valid_after,
    dm_render,
    dualize,
    eval_ast,
    format_formula,
    formula_size,
    parse_assignment,
    parse_dimacs,
    parse_formula,
    partial_eval,
    render_dimacs,
    tseitin,
)
from .sat import SatResult, Solver, enumerate_models, solve

__version__ = "0.1.0"

__all__ = [
    "And", "Atom", "Bottom", "CnfFormula", "ExplainTimeout", "Explanation", "FormulaExplainer",
    "Neg", "Or", "ParseError", "PartialAssignment", "PreconditionError", "ProblemInstance",
    "SatResult", "Solver", "Top", "brute_force_explain", "check_assignments", "check_formula",
    "check_precondition", "cnf_valid_after", "decide_bounded", "dm_render", "dualize",
    "enumerate_models", "eval_ast", "explain_min", "format_formula", "formula_size",
    "parse_assignment", "parse_dimacs", "parse_formula", "partial_eval", "render_dimacs",
    "solve", "tseitin",
]
