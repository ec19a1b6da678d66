"""Budgeted matrix-vector product access to a hidden symmetric matrix.

Solvers only ever see a :class:`QueryOracle`.  The hidden matrix is available
through :func:`white_box`, which is reserved for experiment harnesses and
lemma verification.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, DependentVector, DimensionError, InvalidBudget
from .spectral import SymmetricMatrix, as_symmetric


@dataclass
class QueryLedger:
    count: int = 0
    retain: bool = False
    history: list = field(default_factory=list)

    def record(self, vs, ws):
        self.count += vs.shape[1]
        if self.retain:
            self.history.extend((vs[:, j].copy(), ws[:, j].copy()) for j in range(vs.shape[1]))

    @property
    def queries(self):
        return [v for v, _ in self.history]


class QueryOracle:
    """Answers ``M @ v`` and counts every answered product.

    ``v`` may be a single vector or a ``(d, k)`` block, which costs ``k``
    queries.  A query that would exceed the budget raises
    :class:`BudgetExceeded` and is not counted.
    """

    def __init__(self, matrix, budget=None, retain_history=False):
        if budget is not None and budget <= 0:
            raise InvalidBudget(f"budget must be positive, got {budget}")
        self._hidden = as_symmetric(matrix)
        self.budget = budget
        self.ledger = QueryLedger(retain=retain_history)

    @property
    def dim(self) -> int:
        return self._hidden.dim

    @property
    def count(self) -> int:
        return self.ledger.count

    @property
    def remaining(self):
        return None if self.budget is None else self.budget - self.ledger.count

    def _reserve(self, k):
        if self.budget is not None and self.ledger.count + k > self.budget:
            raise BudgetExceeded(
                f"query budget {self.budget} exhausted ({self.ledger.count} used, {k} requested)"
            )

    def _apply(self, vs):
        return self._hidden.entries @ vs

    def query(self, v):
        if type(v) is not np.ndarray or v.dtype != np.float64:
            v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            if v.shape[0] != self.dim:
                raise DimensionError(f"query of shape {v.shape} against dimension {self.dim}")
            return self.query(v[:, None])[:, 0]
        if v.ndim != 2 or v.shape[0] != self.dim:
            raise DimensionError(f"query of shape {v.shape} against dimension {self.dim}")
        k = v.shape[1]
        if self.budget is not None:
            self._reserve(k)
        ws = self._apply(v)
        ledger = self.ledger
        if ledger.retain:
            ledger.record(v, ws)
        else:
            ledger.count += k
        return ws

    __call__ = query


class ShiftedOracle(QueryOracle):
    """Oracle for ``sigma * I - M`` where each product costs one query to ``M``."""

    def __init__(self, parent: QueryOracle, sigma: float, budget=None, retain_history=False):
        if budget is not None and budget <= 0:
            raise InvalidBudget(f"budget must be positive, got {budget}")
        self._parent = parent
        self.sigma = float(sigma)
        self.budget = budget
        self.ledger = QueryLedger(retain=retain_history)

    @property
    def dim(self) -> int:
        return self._parent.dim

    def _apply(self, vs):
        return self.sigma * vs - self._parent.query(vs)


def make_oracle(m, budget=None, retain_history=False) -> QueryOracle:
    return QueryOracle(m, budget=budget, retain_history=retain_history)


def query(oracle: QueryOracle, v):
    return oracle.query(v)


def query_count(oracle: QueryOracle) -> int:
    return oracle.count


def white_box(oracle: QueryOracle) -> SymmetricMatrix:
    """Expose the hidden matrix.  Not for use inside solvers."""
    if isinstance(oracle, ShiftedOracle):
        parent = white_box(oracle._parent).entries
        return SymmetricMatrix(oracle.sigma * np.eye(parent.shape[0]) - parent)
    return oracle._hidden


@dataclass
class LinSysInstance:
    """Linear system ``A x = b`` where ``A`` is reachable only through ``oracle``."""

    oracle: QueryOracle
    b: np.ndarray
    x0: np.ndarray = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.x0 = np.zeros_like(self.b) if self.x0 is None else np.asarray(self.x0, dtype=float)
        if self.b.shape != (self.oracle.dim,) or self.x0.shape != self.b.shape:
            raise DimensionError("b and x0 must match the oracle dimension")


def gram_schmidt(vectors, tol=1e-10, drop_dependent=False):
    """Modified Gram-Schmidt with one reorthogonalization pass.

    A vector whose residual after projection is below ``tol`` times its own
    norm raises :class:`DependentVector`, or is skipped when
    ``drop_dependent`` is set.
    """
    basis = []
    for i, v in enumerate(vectors):
        w = np.array(v, dtype=float)
        scale = np.linalg.norm(w)
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if scale == 0.0 or norm < tol * scale:
            if drop_dependent:
                continue
            raise DependentVector(i, norm)
        basis.append(w / norm)
    return basis
