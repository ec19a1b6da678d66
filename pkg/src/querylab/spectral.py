"""Dense symmetric linear algebra used as ground truth by every other module.

Two eigensolver backends are available.  ``"householder_ql"`` is a self-contained
Householder tridiagonalization followed by implicit-shift QL with eigenvector
accumulation; ``"lapack"`` delegates to :func:`numpy.linalg.eigh`.  Both are
deterministic for a fixed input and are cross-checked in the test-suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMatrix, NotPositiveDefinite, UndefinedGap

SYMMETRY_TOL = 1e-8
DEFAULT_METHOD = "lapack"


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """Real symmetric ``d x d`` matrix stored as a read-only array.

    Inputs that are asymmetric by at most ``1e-8`` (relative to the largest
    entry) are replaced by ``(M + M.T) / 2``; larger asymmetry is rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidMatrix(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidMatrix("matrix has non-finite entries")
        asym = np.max(np.abs(a - a.T))
        if asym > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(a)))):
            raise InvalidMatrix(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        return self.entries @ other

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def as_symmetric(m) -> SymmetricMatrix:
    return m if isinstance(m, SymmetricMatrix) else SymmetricMatrix(m)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in non-increasing order; ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def top(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def bottom(self) -> float:
        return float(self.eigenvalues[-1])


@dataclass(frozen=True, eq=False)
class QuadraticProblem:
    """The objective ``f(x) = x'Ax/2 - b'x`` with a starting point ``x0``."""

    A: SymmetricMatrix
    b: np.ndarray
    x0: np.ndarray = field(default=None)

    def __post_init__(self):
        A = as_symmetric(self.A)
        object.__setattr__(self, "A", A)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        x0 = np.zeros_like(b) if self.x0 is None else np.asarray(self.x0, dtype=float).reshape(-1)
        if b.shape != (A.dim,) or x0.shape != (A.dim,):
            raise InvalidMatrix("b and x0 must have length A.dim")
        if np.linalg.eigvalsh(A.entries)[0] <= 0:
            raise NotPositiveDefinite("quadratic problem needs a positive definite A")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "x0", x0)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.A.entries @ x) - self.b @ x)

    def minimizer(self) -> np.ndarray:
        return np.linalg.solve(self.A.entries, self.b)


def householder_tridiagonalize(a):
    """Reduce symmetric ``a`` to tridiagonal form ``Q' a Q``.

    Returns ``(diag, offdiag, Q)`` with ``offdiag[i]`` coupling rows ``i`` and
    ``i + 1``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        big = np.max(np.abs(a[k + 1 :, k]))
        if big == 0.0:
            continue
        x = a[k + 1 :, k] / big  # avoid subnormal squares
        norm_x = np.linalg.norm(x)
        alpha = -math.copysign(norm_x, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        a[k + 1 :, k:] -= 2.0 * np.outer(v, v @ a[k + 1 :, k:])
        a[k:, k + 1 :] -= 2.0 * np.outer(a[k:, k + 1 :] @ v, v)
        q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v)
    return np.diag(a).copy(), np.diag(a, -1).copy(), q


def implicit_ql(diag, offdiag, z, max_sweeps=30):
    """Diagonalize a symmetric tridiagonal matrix by implicit-shift QL.

    ``z`` holds the accumulated transformation; its columns are rotated in place
    into eigenvectors.  Returns unsorted ``(eigenvalues, z)``.
    """
    d = np.array(diag, dtype=float)
    n = d.shape[0]
    e = np.zeros(n)
    e[: n - 1] = offdiag
    z = np.array(z, dtype=float)
    eps = np.finfo(float).eps
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise InvalidMatrix("implicit QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return d, z


def _canonical_signs(vectors):
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eig_sym(m, method: str = DEFAULT_METHOD) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix, sorted descending."""
    m = as_symmetric(m)
    if method == "householder_ql":
        # unit scale keeps the reflector norms clear of underflow
        scale = float(np.max(np.abs(m.entries))) or 1.0
        diag, off, q = householder_tridiagonalize(m.entries / scale)
        vals, vecs = implicit_ql(diag, off, q)
        vals = vals * scale
    elif method == "lapack":
        vals, vecs = np.linalg.eigh(m.entries)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = _canonical_signs(vecs[:, order])
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return Spectrum(vals, vecs)


def eigvals_sym(m) -> np.ndarray:
    """Eigenvalues only, sorted descending."""
    return np.linalg.eigvalsh(as_symmetric(m).entries)[::-1]


def _eigenvalues(m):
    if isinstance(m, Spectrum):
        return m.eigenvalues
    return eigvals_sym(m)


def gap(m) -> float:
    """Relative eigengap ``(l1 - l2) / l1``."""
    vals = _eigenvalues(m)
    if vals.shape[0] < 2:
        raise UndefinedGap("gap needs dimension >= 2")
    if vals[0] <= 0:
        raise UndefinedGap(f"top eigenvalue {vals[0]:.3e} is not positive")
    return float((vals[0] - vals[1]) / vals[0])


def cond(a) -> float:
    vals = _eigenvalues(a)
    if vals[-1] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {vals[-1]:.3e} is not positive")
    return float(vals[0] / vals[-1])


def suboptimality(problem: QuadraticProblem, x) -> float:
    """``f(x) - min f`` evaluated as half the squared A-norm distance to the minimizer."""
    err = np.asarray(x, dtype=float) - problem.minimizer()
    return float(0.5 * err @ (problem.A.entries @ err))
