"""Wishart samplers, the hard-edge law and the embedded hard instance.

``W = X X'`` with ``X`` a ``d x d`` matrix of independent ``N(0, 1/d)``
entries.  After scaling by ``d**2`` the smallest eigenvalue of ``W`` has the
limiting density ``(x**-0.5 + 1) / 2 * exp(-(x/2 + sqrt(x)))`` on ``x >= 0``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import CalibrationError, DomainError, EmbedError
from .rng import as_rng, standard_normal, trial_rng
from .spectral import Spectrum, SymmetricMatrix, as_symmetric, eig_sym, eigvals_sym

NORM_CAP = 5.0
CALIBRATION_SEED = 20_200_219
PILOT_N = 2000
REJECTION_CAP_FACTOR = 100


@dataclass(frozen=True, eq=False)
class WishartSample:
    d: int
    X: np.ndarray
    W: SymmetricMatrix

    @cached_property
    def spectrum(self) -> Spectrum:
        return eig_sym(self.W)

    @property
    def lambda_min(self) -> float:
        return self.spectrum.bottom

    @property
    def norm(self) -> float:
        return self.spectrum.top


def sample_wishart(d: int, seed=None) -> WishartSample:
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    rng = as_rng(seed)
    X = standard_normal(rng, (d, d)) / math.sqrt(d)
    X.setflags(write=False)
    return WishartSample(d, X, SymmetricMatrix(X @ X.T))


def edge_pdf(x):
    """Limiting density of ``d**2 * lambda_min(W)``; infinite at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        pdf = 0.5 * (x ** -0.5 + 1.0) * np.exp(-(0.5 * x + np.sqrt(np.maximum(x, 0.0))))
    return np.where(x >= 0, pdf, 0.0)


def edge_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, -np.expm1(-(0.5 * np.maximum(x, 0.0) + np.sqrt(np.maximum(x, 0.0)))), 0.0)


def edge_quantile(u):
    """Inverse of :func:`edge_cdf`: solves ``x/2 + sqrt(x) = -log(1 - u)``."""
    u = np.asarray(u, dtype=float)
    y = -np.log1p(-u)
    return (np.sqrt(1.0 + 2.0 * y) - 1.0) ** 2


def limiting_edge_law(x: float):
    """``(pdf, cdf)`` of the hard-edge law at ``x``."""
    if x < 0:
        raise DomainError(f"hard-edge law is supported on x >= 0, got {x}")
    return float(edge_pdf(x)), float(edge_cdf(x))


def sample_limiting(seed=None) -> float:
    rng = as_rng(seed)
    return float(edge_quantile(rng.random()))


@dataclass(frozen=True)
class GoodEventParams:
    C1: float
    C2: float
    norm_cap: float = NORM_CAP

    def __post_init__(self):
        if not (self.C1 > 0 and self.C2 > 0):
            raise ValueError("C1 and C2 must be positive")


@dataclass(frozen=True)
class GoodEvent:
    edge_small: bool
    gap_large: bool
    norm_ok: bool

    @property
    def holds(self) -> bool:
        return self.edge_small and self.gap_large and self.norm_ok


def _event_from_eigenvalues(vals, d, params: GoodEventParams) -> GoodEvent:
    # vals sorted descending
    lam_min = vals[-1]
    spacing = vals[-2] - vals[-1] if d >= 2 else math.inf
    return GoodEvent(
        edge_small=bool(lam_min <= params.C1 / d**2),
        gap_large=bool(spacing >= params.C2 / d**2),
        norm_ok=bool(vals[0] < params.norm_cap),
    )


def check_good_event(w, params: GoodEventParams) -> GoodEvent:
    """Evaluate the three good-event flags for a Wishart sample or a symmetric matrix."""
    if isinstance(w, WishartSample):
        vals, d = w.spectrum.eigenvalues, w.d
    else:
        m = as_symmetric(w)
        vals, d = eigvals_sym(m), m.dim
    return _event_from_eigenvalues(vals, d, params)


@dataclass(frozen=True, eq=False)
class HardInstance:
    s: int
    d: int
    source: WishartSample
    M: SymmetricMatrix
    truth: Spectrum
    good_event: GoodEvent | None

    @property
    def nonzeros(self) -> int:
        return int(np.count_nonzero(self.M.entries))


def build_hard_instance(s: int, d: int, w: WishartSample, params: GoodEventParams | None = None) -> HardInstance:
    """Embed ``I - W/5`` in the top-left ``s x s`` block of a zero ``d x d`` matrix."""
    if s > d:
        raise EmbedError(f"sparsity dimension {s} exceeds ambient dimension {d}")
    if w.d != s:
        raise EmbedError(f"Wishart sample has dimension {w.d}, expected {s}")
    m = np.zeros((d, d))
    m[:s, :s] = np.eye(s) - w.W.entries / NORM_CAP
    M = SymmetricMatrix(m)
    event = check_good_event(w, params) if params is not None else None
    return HardInstance(s, d, w, M, eig_sym(M), event)


def lambda_min_estimator_from_eig(lambda_hat: float) -> float:
    """Turn an estimate of the top eigenvalue of ``I - W/5`` into one of ``lambda_min(W)``."""
    return 5.0 * (1.0 - lambda_hat)


def check_class_membership(m, gap_param: float, alpha: float, subspace=None, spectrum: Spectrum | None = None) -> bool:
    """Membership in the matrix class used by the shift-and-invert reduction.

    True iff ``gap(M) >= gap_param``, ``|l1 - 1| <= alpha * gap_param``,
    ``l1 in [1/2, 2]`` and, when ``subspace`` (orthonormal columns) is given,
    the top eigenvector lies in its span up to ``1e-8``.
    """
    spec_m = spectrum if spectrum is not None else eig_sym(m)
    vals = spec_m.eigenvalues
    l1 = vals[0]
    if not 0.5 <= l1 <= 2.0:
        return False
    if (l1 - vals[1]) / l1 < gap_param:
        return False
    if abs(l1 - 1.0) > alpha * gap_param:
        return False
    if subspace is not None:
        basis = np.asarray(subspace, dtype=float)
        v1 = spec_m.eigenvectors[:, 0]
        if np.linalg.norm(v1 - basis @ (basis.T @ v1)) > 1e-8:
            return False
    return True


QUANTILE_LEVELS = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass(frozen=True)
class Calibration:
    """Empirical constants for the good event at one dimension."""

    d: int
    seed: int
    delta: float
    C1: float
    C2: float
    pilot_N: int
    accept_rate: float
    quantiles: dict

    @property
    def params(self) -> GoodEventParams:
        return GoodEventParams(self.C1, self.C2)

    @property
    def gap_param(self) -> float:
        return self.C2 / (5.0 * self.d**2)

    @property
    def alpha(self) -> float:
        return self.C1 / self.C2

    @property
    def max_attempts(self) -> int:
        return int(math.ceil(REJECTION_CAP_FACTOR / self.accept_rate))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


@lru_cache(maxsize=32)
def calibrate(d: int, delta: float = 0.3, seed: int = CALIBRATION_SEED, pilot_n: int = PILOT_N) -> Calibration:
    """Fix ``C1`` from the limiting law and ``C2`` from a Wishart pilot run.

    ``C1`` is the ``1 - delta/3`` quantile of the hard-edge law and ``C2`` the
    empirical ``delta/3`` quantile of ``d**2 * (lambda_{d-1} - lambda_d)``.
    """
    if d < 2:
        raise CalibrationError("calibration needs d >= 2")
    if not 0 < delta < 1:
        raise CalibrationError(f"delta must lie in (0, 1), got {delta}")
    edges = np.empty(pilot_n)
    spacings = np.empty(pilot_n)
    norms = np.empty(pilot_n)
    for i in range(pilot_n):
        vals = eigvals_sym(sample_wishart(d, trial_rng(seed, "calibrate", i)).W)
        edges[i] = d**2 * vals[-1]
        spacings[i] = d**2 * (vals[-2] - vals[-1])
        norms[i] = vals[0]
    C1 = float(edge_quantile(1.0 - delta / 3.0))
    C2 = float(np.quantile(spacings, delta / 3.0))
    if not C2 > 0:
        raise CalibrationError(f"pilot run produced non-positive C2 = {C2}")
    accepted = (edges <= C1) & (spacings >= C2) & (norms < NORM_CAP)
    accept_rate = float(np.mean(accepted))
    if accept_rate == 0:
        raise CalibrationError("no pilot sample satisfied the good event")
    quantiles = {
        "edge": {str(q): float(np.quantile(edges, q)) for q in QUANTILE_LEVELS},
        "spacing": {str(q): float(np.quantile(spacings, q)) for q in QUANTILE_LEVELS},
    }
    return Calibration(d, seed, delta, C1, C2, pilot_n, accept_rate, quantiles)


def sample_conditioned_instance(s: int, d: int, calibration: Calibration, rng) -> tuple[HardInstance, int]:
    """Rejection-sample a hard instance on the good event.

    Returns the instance and the number of attempts used.
    """
    if calibration.d != s:
        raise CalibrationError(f"calibration is for d={calibration.d}, instance needs s={s}")
    rng = as_rng(rng)
    params = calibration.params
    for attempt in range(1, calibration.max_attempts + 1):
        w = sample_wishart(s, rng)
        if check_good_event(w, params).holds:
            return build_hard_instance(s, d, w, params), attempt
    raise CalibrationError(f"good event not hit within {calibration.max_attempts} attempts")
