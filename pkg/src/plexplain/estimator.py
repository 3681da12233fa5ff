"""scikit-learn style front end.

Rows of ``X`` are three-valued assignments over variables ``1..n_features``:
``1`` true, ``-1`` false, ``0`` unknown (booleans are read as true/false).
The formula being explained is a constructor parameter, so the estimator
clones, pickles and grid-searches like any other.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .explain import (
    DEFAULT_TIMEOUT,
    ExplainTimeout,
    PreconditionError,
    ProblemInstance,
    check_precondition,
    decide_bounded,
    explain_min,
    parse_target,
)
from .formula import And, Atom, Bottom, CnfFormula, Neg, Or, PartialAssignment, Top, atoms, parse_formula

_TARGETS = ("auto", "top", "bot")


def check_formula(psi):
    """Accept a CnfFormula, a formula AST or formula text."""
    if isinstance(psi, str):
        return parse_formula(psi)
    if isinstance(psi, (CnfFormula, Atom, Neg, And, Or, Top, Bottom)):
        return psi
    raise TypeError(f"cannot interpret {type(psi).__name__} as a formula")


def formula_num_vars(psi) -> int:
    if isinstance(psi, CnfFormula):
        return psi.num_vars
    return max(atoms(psi), default=0)


def check_assignments(X, n_features: int | None = None) -> np.ndarray:
    """Validate an assignment matrix and return it as int8 in {-1, 0, 1}."""
    X = np.asarray(X)
    if X.dtype == bool:
        X = np.where(X, 1, -1)
    X = check_array(X, dtype=None, ensure_min_features=0)
    if not np.all(np.isin(X, (-1, 0, 1))):
        raise ValueError("assignment entries must be -1 (false), 0 (unknown) or 1 (true)")
    X = X.astype(np.int8)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} features, expected {n_features}")
    return X


def row_to_assignment(row) -> PartialAssignment:
    return PartialAssignment(int(v) * (i + 1) for i, v in enumerate(row) if v != 0)


def assignment_to_row(lits, n_features: int) -> np.ndarray:
    out = np.zeros(n_features, dtype=np.int8)
    for l in lits:
        if abs(l) <= n_features:
            out[abs(l) - 1] = 1 if l > 0 else -1
    return out


class FormulaExplainer(TransformerMixin, BaseEstimator):
    """Minimum explanations of a fixed formula's value on each input row.

    Parameters
    ----------
    formula : CnfFormula, formula AST or str
    target : {"auto", "top", "bot"}
        Truth value to explain; ``"auto"`` explains whatever value the row
        forces (rows forcing neither are rejected).
    timeout : float or None
        Per-row wall-clock budget in seconds.
    seed : int
    on_error : {"raise", "ignore"}
        What to do with rows failing the precondition or timing out;
        ``"ignore"`` yields an all-zero row in :meth:`transform`.
    """

    def __init__(self, formula=None, target="auto", timeout=DEFAULT_TIMEOUT, seed=0, on_error="raise"):
        self.formula = formula
        self.target = target
        self.timeout = timeout
        self.seed = seed
        self.on_error = on_error

    def fit(self, X=None, y=None):
        if self.formula is None:
            raise ValueError("formula must be given")
        if self.target not in _TARGETS:
            raise ValueError(f"target must be one of {_TARGETS}")
        if self.on_error not in ("raise", "ignore"):
            raise ValueError("on_error must be 'raise' or 'ignore'")
        self.formula_ = check_formula(self.formula)
        self.n_features_in_ = formula_num_vars(self.formula_)
        if X is not None:
            check_assignments(X, self.n_features_in_)
        return self

    def _instance(self, row, target) -> ProblemInstance:
        return ProblemInstance(row_to_assignment(row), self.formula_, target)

    def _row_target(self, row) -> bool | None:
        if self.target != "auto":
            return parse_target(self.target)
        for b in (True, False):
            if check_precondition(self._instance(row, b)):
                return b
        return None

    def predict(self, X) -> np.ndarray:
        """Forced truth value per row: 1 true, 0 false, -1 undetermined."""
        check_is_fitted(self)
        X = check_assignments(X, self.n_features_in_)
        out = np.full(X.shape[0], -1, dtype=np.int8)
        for i, row in enumerate(X):
            for b in (True, False):
                if check_precondition(self._instance(row, b)):
                    out[i] = int(b)
                    break
        return out

    def explain(self, X) -> list:
        """One Explanation per row (``None`` for failed rows when ignoring errors)."""
        check_is_fitted(self)
        X = check_assignments(X, self.n_features_in_)
        out = []
        for row in X:
            target = self._row_target(row)
            try:
                if target is None:
                    raise PreconditionError("row forces neither truth value")
                out.append(explain_min(self._instance(row, target), timeout=self.timeout, seed=self.seed))
            except (PreconditionError, ExplainTimeout):
                if self.on_error == "raise":
                    raise
                out.append(None)
        return out

    def transform(self, X) -> np.ndarray:
        """Rows restricted to their explanation literals (others set to 0)."""
        expls = self.explain(X)
        return np.stack([np.zeros(self.n_features_in_, dtype=np.int8) if e is None
                         else assignment_to_row(e.chi, self.n_features_in_) for e in expls]) \
            if expls else np.zeros((0, self.n_features_in_), dtype=np.int8)

    def decide(self, X, k: int) -> np.ndarray:
        """Whether each row has an explanation of size at most ``k``."""
        check_is_fitted(self)
        X = check_assignments(X, self.n_features_in_)
        out = np.zeros(X.shape[0], dtype=bool)
        for i, row in enumerate(X):
            target = self._row_target(row)
            if target is None:
                if self.on_error == "raise":
                    raise PreconditionError("row forces neither truth value")
                continue
            out[i] = decide_bounded(self._instance(row, target), k, timeout=self.timeout, seed=self.seed)
        return out

    def explanation_sizes(self, X) -> np.ndarray:
        return np.array([-1 if e is None else e.size for e in self.explain(X)])
