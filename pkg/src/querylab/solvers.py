"""Query-model algorithms: each one touches the matrix only through an oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InnerSolveFailed, NumericalBreakdown
from .oracle import LinSysInstance, QueryOracle, ShiftedOracle
from .rng import as_rng, generator, unit_sphere

BREAKDOWN_TOL = 1e-13
DEFAULT_ROUNDS_CONSTANT = 8.0


@dataclass
class SolverOutcome:
    lambda_hat: float | None = None
    v_hat: np.ndarray | None = None
    x_hat: np.ndarray | None = None
    queries_used: int = 0
    trace: list = field(default_factory=list)
    lambda_hat_min: float | None = None
    v_hat_min: np.ndarray | None = None


@dataclass(frozen=True)
class ShiftParams:
    """Shift parameters for a matrix class with eigengap ``gap_param`` and top-eigenvalue slack ``alpha``."""

    gap_param: float
    alpha: float

    def __post_init__(self):
        if not 0 < self.gap_param < 1:
            raise ValueError(f"gap_param must lie in (0, 1), got {self.gap_param}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def sigma(self) -> float:
        return 1.0 + (1.0 + self.alpha) * self.gap_param

    @property
    def gap_alpha(self) -> float:
        return 1.0 / (3.0 + 4.0 * self.alpha)

    @property
    def cond_alpha(self) -> float:
        return 1.0 / self.gap_param + (1.0 + self.alpha)


def power_method(oracle: QueryOracle, T: int, seed=None) -> SolverOutcome:
    """``T`` power iterations followed by one Rayleigh-quotient product."""
    if T < 1:
        raise ValueError("power method needs T >= 1")
    start = oracle.count
    u = unit_sphere(as_rng(seed), oracle.dim)
    trace = []
    for _ in range(T):
        w = oracle.query(u)
        norm = np.linalg.norm(w)
        trace.append({"rayleigh": float(u @ w), "residual": float(np.linalg.norm(w - (u @ w) * u))})
        if norm == 0.0:
            break
        u = w / norm
    w = oracle.query(u)
    lam = float(u @ w)
    trace.append({"rayleigh": lam, "residual": float(np.linalg.norm(w - lam * u))})
    return SolverOutcome(lambda_hat=lam, v_hat=u, queries_used=oracle.count - start, trace=trace)


def lanczos(oracle: QueryOracle, T: int, seed=None) -> SolverOutcome:
    """``T``-step Lanczos with full reorthogonalization.

    Returns the extreme Ritz pairs: ``lambda_hat``/``v_hat`` for the largest
    and ``lambda_hat_min``/``v_hat_min`` for the smallest.  Stops early when the
    Krylov space becomes invariant.
    """
    d = oracle.dim
    if not 1 <= T <= d:
        raise ValueError(f"Lanczos needs 1 <= T <= d, got T={T}, d={d}")
    start = oracle.count
    q = unit_sphere(as_rng(seed), d)
    basis = np.empty((d, T))
    alphas, betas = [], []
    trace = []
    scale = 0.0
    for j in range(T):
        basis[:, j] = q
        w = oracle.query(q)
        a = float(q @ w)
        alphas.append(a)
        Q = basis[:, : j + 1]
        w = w - Q @ (Q.T @ w)
        w = w - Q @ (Q.T @ w)
        b = float(np.linalg.norm(w))
        scale = max(scale, abs(a), b)
        trace.append({"alpha": a, "beta": b})
        if j == T - 1:
            break
        if b < BREAKDOWN_TOL * max(1.0, scale):
            trace[-1]["breakdown"] = True
            break
        betas.append(b)
        q = w / b
    k = len(alphas)
    tri = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
    ritz, vecs = np.linalg.eigh(tri)
    Q = basis[:, :k]
    v_max = Q @ vecs[:, -1]
    v_min = Q @ vecs[:, 0]
    return SolverOutcome(
        lambda_hat=float(ritz[-1]),
        v_hat=v_max / np.linalg.norm(v_max),
        lambda_hat_min=float(ritz[0]),
        v_hat_min=v_min / np.linalg.norm(v_min),
        queries_used=oracle.count - start,
        trace=trace,
    )


def _cg_block(oracle, B, X0, max_queries, stop=None, trace=None):
    """Column-wise independent CG on ``A X = B`` using at most ``max_queries`` block products.

    ``stop(X, R)`` returns a boolean mask of columns that may stop early.
    """
    X = np.array(X0, dtype=float)
    used = 0
    if np.any(X):
        R = B - oracle.query(X)
        used += 1
    else:
        R = B.copy()
    P = R.copy()
    rr = np.vecdot(R, R, axis=0)
    done = rr == 0.0
    while used < max_queries:
        if stop is not None:
            done = done | stop(X, R)
            # frozen columns take zero steps from here on
            P[:, done] = 0.0
        if done.all():
            break
        AP = oracle.query(P)
        used += 1
        pap = np.vecdot(P, AP, axis=0)
        step = np.divide(rr, pap, out=np.zeros_like(rr), where=pap != 0.0)
        X += step * P
        R -= step * AP
        rr_new = np.vecdot(R, R, axis=0)
        beta = np.divide(rr_new, rr, out=np.zeros_like(rr), where=rr != 0.0)
        P *= beta
        P += R
        rr = rr_new
        done = done | (rr == 0.0)
        if trace is not None:
            trace.append({"residual": float(np.sqrt(rr[0])), "curvature": float(pap[0])})
    if not np.isfinite(X).all():
        raise NumericalBreakdown("CG produced a non-finite iterate")
    return X, R


def conjugate_gradient(inst: LinSysInstance, T: int | None = None, tol: float | None = None) -> SolverOutcome:
    """CG from ``inst.x0``, stopping after ``T`` products or once ``|Ax - b| <= tol |b|``.

    The initial residual costs one product unless ``x0`` is zero.  A
    non-positive curvature ``p'Ap`` is not treated as an error; it shows up in
    the trace.
    """
    if T is None and tol is None:
        raise ValueError("give an iteration budget T, a tolerance, or both")
    oracle = inst.oracle
    start = oracle.count
    max_queries = T if T is not None else 10 * oracle.dim
    stop = None
    if tol is not None:
        target = tol * np.linalg.norm(inst.b)
        stop = lambda X, R: np.linalg.norm(R, axis=0) <= target  # noqa: E731
    trace = []
    X, _ = _cg_block(oracle, inst.b[:, None], inst.x0[:, None], max_queries, stop, trace)
    return SolverOutcome(x_hat=X[:, 0], queries_used=oracle.count - start, trace=trace)


LinSysAlg = Callable[[QueryOracle, np.ndarray, np.ndarray, np.random.Generator], np.ndarray]


def cg_base(iterations: int) -> LinSysAlg:
    """Truncated CG as a bootstrappable base solver.

    The returned callable maps ``(oracle, b, X0, rng)`` with ``X0`` of shape
    ``(d, q)`` to ``q`` independent estimates, running the columns in lockstep.
    """

    def base(oracle, b, X0, rng=None):
        B = np.repeat(b[:, None], X0.shape[1], axis=1)
        X, _ = _cg_block(oracle, B, X0, iterations + (1 if np.any(X0) else 0))
        return X

    base.iterations = iterations
    return base


def cg_iterations_for_contract(condition: float) -> int:
    """CG steps that certify the moderate-precision contract at condition number ``condition``.

    Uses the Chebyshev bound ``|e_T|_A <= 2 rho**T |e_0|_A`` with
    ``rho = (sqrt(k) - 1) / (sqrt(k) + 1)`` and requires
    ``|e_T|_A**2 <= lambda_1 |e_0|**2 / (e * condition)``.
    """
    root = math.sqrt(condition)
    if root <= 1.0:
        return 1
    rho = (root - 1.0) / (root + 1.0)
    return max(1, math.ceil(math.log(2.0 * math.sqrt(math.e * condition)) / -math.log(rho)))


def bootstrap_counts(eps: float, delta: float) -> tuple[int, int]:
    """Restart count ``k`` and copies per restart ``q`` for target ``eps`` and failure ``delta``."""
    log_inv_eps = math.log(1.0 / eps)
    k = max(1, math.ceil(log_inv_eps - 1e-9))
    q = max(1, math.ceil(math.log(max(log_inv_eps, 1.0) / delta) - 1e-9))
    return k, q


def bootstrap_solve(base: LinSysAlg, inst: LinSysInstance, eps: float, delta: float, seed=None) -> SolverOutcome:
    """Amplify a moderate-precision solver by repeats and restarts.

    Each of ``k`` restarts runs ``q`` copies of ``base`` from the current point
    and keeps the copy with the smallest objective (lowest index on ties); the
    kept iterate seeds the next restart.
    """
    oracle = inst.oracle
    start = oracle.count
    rng = as_rng(seed)
    k, q = bootstrap_counts(eps, delta)
    x = inst.x0.copy()
    b = inst.b
    trace = []
    for restart in range(k):
        X = base(oracle, b, np.repeat(x[:, None], q, axis=1), rng)
        AX = oracle.query(X)
        f = 0.5 * np.einsum("ij,ij->j", X, AX) - b @ X
        best = int(np.argmin(f))
        x = X[:, best]
        trace.append({"restart": restart, "objective": float(f[best]), "kept": best, "copies": q})
    return SolverOutcome(x_hat=x, queries_used=oracle.count - start, trace=trace)


def shift_oracle(oracle: QueryOracle, sp: ShiftParams) -> ShiftedOracle:
    """Oracle for ``A = (1 + (1 + alpha) gap) I - M``; one ``A`` product costs one ``M`` product."""
    return ShiftedOracle(oracle, sp.sigma)


def certified_cg(sp: ShiftParams, max_iterations: int | None = None):
    """Inner solver that runs CG until the relative Euclidean error is certified.

    Uses ``lambda_min(A) >= gap_param``: ``|x - x*| <= |r| / gap_param``, and
    stops once ``(1 + eta) |r| / gap_param <= eta |x|``.
    """

    def solve(oracle, u, eta, round_index):
        cap = max_iterations if max_iterations is not None else 20 * oracle.dim

        def stop(X, R):
            return (1.0 + eta) * np.linalg.norm(R, axis=0) / sp.gap_param <= eta * np.linalg.norm(X, axis=0)

        X, R = _cg_block(oracle, u[:, None], np.zeros((u.shape[0], 1)), cap, stop)
        if not stop(X, R)[0]:
            raise InnerSolveFailed(round_index, "CG did not certify the inner tolerance")
        return X[:, 0]

    return solve


def truncated_cg(iterations: int):
    """Inner solver with a fixed CG step count and no accuracy certificate."""

    def solve(oracle, u, eta, round_index):
        X, _ = _cg_block(oracle, u[:, None], np.zeros((u.shape[0], 1)), iterations)
        return X[:, 0]

    solve.iterations = iterations
    return solve


def bootstrapped_cg(base_iterations: int, delta: float):
    """Inner solver: truncated CG amplified by :func:`bootstrap_solve` to relative error ``eta``."""
    base = cg_base(base_iterations)

    def solve(oracle, u, eta, round_index):
        inst = LinSysInstance(oracle, u)
        return bootstrap_solve(base, inst, eta**2, delta).x_hat

    solve.base_iterations = base_iterations
    solve.delta = delta
    return solve


def default_rounds(eps: float, sp: ShiftParams, constant: float = DEFAULT_ROUNDS_CONSTANT) -> int:
    return max(1, math.ceil(constant * math.log(1.0 / eps) / sp.gap_alpha))


def shift_invert_eig(
    oracle: QueryOracle,
    sp: ShiftParams,
    eps: float,
    delta: float = 0.1,
    R: int | None = None,
    seed=None,
    inner=None,
    subspace=None,
    rounds_constant: float = DEFAULT_ROUNDS_CONSTANT,
) -> SolverOutcome:
    """Noisy power method on ``A**-1`` with approximate inner solves.

    Round ``r`` solves ``A x = u_{r-1}`` to relative Euclidean error
    ``eps * gap_alpha / 5`` and normalizes.  ``delta`` is the per-solve failure
    probability handed to the default bootstrapped inner solver.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    start = oracle.count
    rounds = R if R is not None else default_rounds(eps, sp, rounds_constant)
    solve = inner if inner is not None else certified_cg(sp)
    eta = eps * sp.gap_alpha / 5.0
    shifted = shift_oracle(oracle, sp)
    u = unit_sphere(as_rng(seed), oracle.dim, subspace)
    trace = []
    for r in range(1, rounds + 1):
        before = oracle.count
        try:
            x = solve(shifted, u, eta, r)
        except NumericalBreakdown as exc:
            raise InnerSolveFailed(r, str(exc)) from exc
        norm = np.linalg.norm(x)
        if not np.isfinite(norm) or norm == 0.0:
            raise InnerSolveFailed(r, "inner solve returned a zero or non-finite vector")
        u = x / norm
        trace.append({"round": r, "queries": oracle.count - before, "inverse_norm": float(norm)})
    lam = float(u @ oracle.query(u))
    return SolverOutcome(lambda_hat=lam, v_hat=u, queries_used=oracle.count - start, trace=trace)


EigVecAlg = Callable[[QueryOracle, np.random.Generator], SolverOutcome]


def boost_restarts(eig_alg: EigVecAlg, oracle: QueryOracle, L: int, seed=None) -> SolverOutcome:
    """Run ``L`` independent copies and keep the vector with the largest Rayleigh quotient.

    Copy ``j`` uses the ``j``-th key drawn from ``seed``, so the first ``L``
    copies coincide for every larger ``L``.  Each Rayleigh quotient costs one
    extra query; ties go to the lowest index.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    start = oracle.count
    rng = as_rng(seed)
    keys = rng.integers(0, 2**63, size=L)
    best, best_val, best_idx = None, -math.inf, -1
    trace = []
    for j in range(L):
        out = eig_alg(oracle, generator(int(keys[j])))
        v = out.v_hat
        val = float(v @ oracle.query(v))
        trace.append({"copy": j, "rayleigh": val, "queries": out.queries_used + 1})
        if val > best_val:
            best, best_val, best_idx = v, val, j
    trace.append({"selected": best_idx})
    return SolverOutcome(lambda_hat=best_val, v_hat=best, queries_used=oracle.count - start, trace=trace)
