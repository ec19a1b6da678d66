"""White-box checks of the lower-bound machinery.

Given orthonormal queries ``v_1..v_T`` and the Gaussian factor ``X`` of
``W = X X'``, :func:`build_rotations` constructs orthonormal ``V`` and ``R``
step by step so that the first ``T`` rows of ``V X R`` vanish outside the
first ``T`` columns.  The corner ``W~ = (V_perp X R_perp)(V_perp X R_perp)'``
is then the part of ``W`` that the queries and responses say nothing about.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateSpan, SingularBlock
from .spectral import SymmetricMatrix, as_symmetric, eig_sym

ORTHO_TOL = 1e-10
DEGENERATE_TOL = 1e-10
MAX_BLOCK_COND = 1e12


def _completion(u):
    """Orthogonal matrix whose first column is the unit vector ``u``.

    The remaining columns come from a Householder reflector, each flipped so
    that its largest-magnitude entry is positive.
    """
    n = u.shape[0]
    w = u.copy()
    if u[0] > 0:
        w[0] += 1.0  # reflector maps e1 to -u
        flip_first = True
    else:
        w = -w
        w[0] += 1.0  # reflector maps e1 to u
        flip_first = False
    q = np.eye(n) - (2.0 / (w @ w)) * np.outer(w, w)
    if flip_first:
        q[:, 0] = -q[:, 0]
    tail = q[:, 1:]
    idx = np.argmax(np.abs(tail), axis=0)
    signs = np.sign(tail[idx, np.arange(n - 1)])
    signs[signs == 0] = 1.0
    q[:, 1:] = tail * signs
    q[:, 0] = u
    return q


@dataclass(frozen=True, eq=False)
class RotationPair:
    V: np.ndarray
    R: np.ndarray
    T: int


def build_rotations(queries, X) -> RotationPair:
    """Accumulate ``V = V_T ... V_1`` and ``R = R_1 ... R_T`` one query at a time.

    ``queries`` must already be orthonormal.  Step ``t`` rotates the trailing
    rows of ``V`` so that row ``t`` equals ``v_t``, then rotates the trailing
    columns of ``R`` so that row ``t`` of ``V X R`` is supported on the first
    ``t + 1`` columns.
    """
    X = np.asarray(X, dtype=float)
    d = X.shape[0]
    T = len(queries)
    if T >= d:
        raise ValueError(f"need fewer queries than the dimension, got T={T}, d={d}")
    V = np.eye(d)
    R = np.eye(d)
    scale = max(1.0, float(np.linalg.norm(X, 2)))
    for t, v in enumerate(queries):
        v = np.asarray(v, dtype=float)
        y = V[t:] @ v
        if np.linalg.norm(V[:t] @ v) > 1e-8 or abs(np.linalg.norm(y) - 1.0) > 1e-8:
            raise ValueError("queries must be orthonormal; apply gram_schmidt first")
        V[t:] = _completion(y / np.linalg.norm(y)).T @ V[t:]
        V[t] = v
        row = (v @ X) @ R
        tail = row[t:]
        norm = np.linalg.norm(tail)
        if norm < DEGENERATE_TOL * scale:
            raise DegenerateSpan(f"leading rows lose rank at step {t + 1}")
        R[:, t:] = R[:, t:] @ _completion(tail / norm)
    return RotationPair(V, R, T)


@dataclass(frozen=True, eq=False)
class CornerExtract:
    Y1: np.ndarray
    Y2: np.ndarray
    W_tilde: SymmetricMatrix
    residual: float
    """max-abs deviation of ``V W V'`` from the assembled block matrix"""


def assemble_blocks(Y1, Y2, W_tilde) -> np.ndarray:
    Wt = np.asarray(W_tilde, dtype=float)
    return np.block([[Y1 @ Y1.T, Y1 @ Y2.T], [Y2 @ Y1.T, Y2 @ Y2.T + Wt]])


def extract_corner(rp: RotationPair, X) -> CornerExtract:
    X = np.asarray(X, dtype=float)
    T = rp.T
    rotated = rp.V @ X @ rp.R
    Y1 = rotated[:T, :T]
    Y2 = rotated[T:, :T]
    Z = rotated[T:, T:]
    W_tilde = SymmetricMatrix(Z @ Z.T)
    W = X @ X.T
    residual = float(np.max(np.abs(rp.V @ W @ rp.V.T - assemble_blocks(Y1, Y2, W_tilde))))
    return CornerExtract(Y1, Y2, W_tilde, residual)


class CornerWitness(NamedTuple):
    z: np.ndarray
    value: float
    """Rayleigh quotient ``z'Mz / |z|^2``"""
    quadratic: float
    """unnormalized ``z'Mz``, equal to ``lambda_min(W)``"""
    M: np.ndarray


def corner_witness(A, B, W) -> CornerWitness:
    """Test vector certifying ``lambda_min(M) <= lambda_min(W)`` for ``M = [[AA', AB'], [BA', BB' + W]]``.

    ``z = (-A^{-T} B' v, v)`` with ``v`` the bottom eigenvector of ``W``.  The
    bound itself needs ``W`` positive semidefinite.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    W = as_symmetric(W)
    if np.linalg.cond(A) > MAX_BLOCK_COND:
        raise SingularBlock("corner block A is numerically singular")
    v = eig_sym(W).eigenvectors[:, -1]
    top = -np.linalg.solve(A.T, B.T @ v)
    z = np.concatenate([top, v])
    M = np.block([[A @ A.T, A @ B.T], [B @ A.T, B @ B.T + W.entries]])
    quadratic = float(z @ M @ z)
    return CornerWitness(z, quadratic / float(z @ z), quadratic, M)


def ks_one_sample(xs, cdf) -> float:
    """Sup distance between the empirical CDF of ``xs`` and ``cdf``."""
    xs = np.sort(np.asarray(xs, dtype=float))
    n = xs.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    F = np.asarray(cdf(xs), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_two_sample(xs, ys) -> float:
    """Sup distance between the empirical CDFs of two samples."""
    xs = np.sort(np.asarray(xs, dtype=float))
    ys = np.sort(np.asarray(ys, dtype=float))
    if xs.size == 0 or ys.size == 0:
        raise ValueError("empty sample")
    grid = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, grid, side="right") / xs.size
    fy = np.searchsorted(ys, grid, side="right") / ys.size
    return float(np.max(np.abs(fx - fy)))


def ks_critical_value(n: int, m: int, coefficient: float = 1.628) -> float:
    """Asymptotic two-sample KS critical value; the default coefficient is the 1% level."""
    return coefficient * np.sqrt((n + m) / (n * m))
