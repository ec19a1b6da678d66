"""Seeded experiment drivers.

Trial ``i`` of experiment ``tag`` draws all of its randomness from
``trial_rng(seed, tag, i)``, so any row can be regenerated in isolation from
its ``(seed, trial)`` pair.  Trials may run in a process pool; results are
always assembled in trial order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial

import numpy as np

from .errors import ConfigError, DegenerateSpan, DependentVector
from .lemmas import build_rotations, extract_corner, ks_one_sample, ks_two_sample
from .oracle import QueryOracle, gram_schmidt
from .report import SCHEMA_VERSION, Report
from .rng import trial_rng
from .solvers import (
    ShiftParams,
    boost_restarts,
    bootstrapped_cg,
    default_rounds,
    lanczos,
    power_method,
    shift_invert_eig,
    truncated_cg,
)
from .spectral import eigvals_sym, gap
from .wishart import (
    CALIBRATION_SEED,
    NORM_CAP,
    calibrate,
    check_class_membership,
    edge_cdf,
    edge_pdf,
    lambda_min_estimator_from_eig,
    sample_conditioned_instance,
    sample_wishart,
)

EXPERIMENTS = ("tradeoff", "posterior", "reduction", "decoupling", "density", "calibrate")
SOLVERS = ("lanczos", "power", "shift_invert", "cg")
FORMATS = ("csv", "json")

DEFAULT_TRIALS = {
    "tradeoff": 100,
    "posterior": 500,
    "reduction": 100,
    "decoupling": 500,
    "density": 1000,
    "calibrate": 2000,
}

POSTERIOR_KS_THRESHOLD = 0.10
DENSITY_KS_THRESHOLD = 0.06
REDUCTION_SUCCESS_TARGET = 0.90
MAX_DISCARD_FRACTION = 0.01
RESIDUAL_TOL = 1e-9
CORNER_TOL = 1e-10
DENSITY_GRID = tuple(np.round(np.arange(0.0, 5.0 + 1e-9, 0.1), 10))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    d: int = 64
    s: int | None = None
    beta: float = 0.5
    trials: int | None = None
    seed: int = 0
    solver: str = "lanczos"
    grid: tuple | None = None
    out: str | None = None
    format: str = "csv"
    T: int | None = None
    delta: float = 0.3
    c: float = 1.0
    tau: float = 1.0
    rounds_constant: float = 1.0
    boost: int = 1
    budget_constant: float = 1.0
    slack: float = 0.1
    calibration_seed: int = CALIBRATION_SEED
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.solver not in SOLVERS:
            raise ConfigError("solver", f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"unknown format {self.format!r}; choose from {FORMATS}")
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise ConfigError("d", f"d must be a positive integer, got {self.d}")
        if self.s is not None and not 1 <= self.s <= self.d:
            raise ConfigError("s", f"s must lie in [1, d={self.d}], got {self.s}")
        if not 0 < self.beta < 1:
            raise ConfigError("beta", f"beta must lie in (0, 1), got {self.beta}")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials", f"trials must be at least 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not 0 < self.delta < 1:
            raise ConfigError("delta", f"delta must lie in (0, 1), got {self.delta}")
        for name in ("c", "tau", "rounds_constant", "budget_constant"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, f"{name} must be positive")
        if self.boost < 1:
            raise ConfigError("boost", "boost must be at least 1")
        if not 0 <= self.slack < 1:
            raise ConfigError("slack", f"slack must lie in [0, 1), got {self.slack}")
        if self.jobs < 1:
            raise ConfigError("jobs", "jobs must be at least 1")
        if self.T is not None and self.T < 0:
            raise ConfigError("T", f"T must be non-negative, got {self.T}")
        if self.grid is not None:
            if len(self.grid) == 0:
                raise ConfigError("grid", "grid must not be empty")
            if self.experiment == "density":
                if any(not (float(x) >= 0 and math.isfinite(float(x))) for x in self.grid):
                    raise ConfigError("grid", "density abscissae must be finite and non-negative")
            elif any(int(t) != t or not 1 <= int(t) <= self.d for t in self.grid):
                raise ConfigError("grid", f"grid entries must be integers in [1, d={self.d}]")

    @property
    def n_trials(self) -> int:
        return self.trials if self.trials is not None else DEFAULT_TRIALS[self.experiment]

    @property
    def sparsity(self) -> int:
        return self.s if self.s is not None else self.d

    def resolved(self) -> dict:
        out = asdict(self)
        out["s"] = self.sparsity
        out["trials"] = self.n_trials
        out["grid"] = list(default_grid(self)) if self.experiment == "tradeoff" else self.grid
        out["schema_version"] = SCHEMA_VERSION
        out.pop("jobs")  # parallelism is invisible in the output
        out.pop("out")
        return out


def default_grid(cfg: ExperimentConfig) -> tuple:
    if cfg.grid is not None:
        return tuple(sorted({int(t) for t in cfg.grid}))
    d = cfg.d
    raw = (d / 8, d / 4, d / 2, 3 * d / 4, (1 - cfg.beta) * d, d)
    return tuple(sorted({min(d, max(1, int(math.floor(t)))) for t in raw}))


def _map_trials(fn, n, jobs):
    if jobs <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(n), chunksize=max(1, n // (4 * jobs))))


def _calibration_dict(cal) -> dict:
    return {
        "C1": cal.C1,
        "C2": cal.C2,
        "delta": cal.delta,
        "pilot_N": cal.pilot_N,
        "calibration_seed": cal.seed,
        "accept_rate": cal.accept_rate,
        "gap_param": cal.gap_param,
        "alpha": cal.alpha,
    }


# ---------------------------------------------------------------- estimators


def truncated_shift_invert_schedule(T: int) -> tuple[int, int]:
    """Rounds ``R`` and CG steps ``m`` per round with ``R * m + 1 <= T``."""
    if T < 2:
        raise ConfigError("grid", "shift_invert needs a budget of at least 2 queries")
    rounds = max(1, int(round(math.sqrt(T - 1))))
    return rounds, (T - 1) // rounds


def estimate_lambda_min(solver: str, X, T: int, rng, shift: ShiftParams | None = None, retain_history=False):
    """Estimate ``lambda_min(X X')`` with at most ``T`` queries.

    Lanczos runs on ``W`` itself.  The power method and shift-and-invert run on
    ``I - W/5`` and go through ``5 (1 - lambda_hat)``; each product with
    ``I - W/5`` is one product with ``W``.  ``T = 0`` gives the constant 0.
    Returns ``(estimate, oracle)``.
    """
    W = X @ X.T
    if solver == "lanczos":
        oracle = QueryOracle(W, budget=max(T, 1), retain_history=retain_history)
        if T == 0:
            return 0.0, oracle
        out = lanczos(oracle, T, rng)
        return float(out.lambda_hat_min), oracle
    oracle = QueryOracle(np.eye(W.shape[0]) - W / NORM_CAP, budget=max(T, 1), retain_history=retain_history)
    if T == 0:
        return 0.0, oracle
    if solver == "power":
        out = lanczos(oracle, 1, rng) if T == 1 else power_method(oracle, T - 1, rng)
    elif solver == "shift_invert":
        rounds, steps = truncated_shift_invert_schedule(T)
        out = shift_invert_eig(oracle, shift, eps=0.5, R=rounds, seed=rng, inner=truncated_cg(steps))
    else:
        raise ConfigError("solver", f"{solver!r} is not an eigenvalue solver")
    return lambda_min_estimator_from_eig(out.lambda_hat), oracle


def _shift_for(cfg: ExperimentConfig, d: int):
    if cfg.solver != "shift_invert":
        return None, None
    cal = calibrate(d, cfg.delta, cfg.calibration_seed)
    return ShiftParams(cal.gap_param, cal.alpha), cal


# ------------------------------------------------------------------ tradeoff

TRADEOFF_COLUMNS = [
    "schema_version", "seed", "trial", "d", "T", "lambda_hat_min", "lambda_min_true",
    "abs_error", "success_quarter", "queries_used",
]


def _tradeoff_trial(cfg: ExperimentConfig, grid, shift, i):
    rng = trial_rng(cfg.seed, "tradeoff", i)
    d = cfg.d
    ws = sample_wishart(d, rng)
    solver_key = int(rng.integers(0, 2**63))
    truth = ws.lambda_min
    rows = []
    for T in grid:
        est, oracle = estimate_lambda_min(cfg.solver, ws.X, T, trial_rng(solver_key, "solver", T), shift)
        err = abs(est - truth)
        rows.append({
            "schema_version": SCHEMA_VERSION, "seed": cfg.seed, "trial": i, "d": d, "T": T,
            "lambda_hat_min": est, "lambda_min_true": truth, "abs_error": err,
            "success_quarter": bool(err < 1.0 / (4 * d * d)), "queries_used": oracle.count,
        })
    return rows


def run_tradeoff(cfg: ExperimentConfig) -> Report:
    """Query budget versus error of ``lambda_min`` estimates on Wishart matrices."""
    if cfg.solver == "cg":
        raise ConfigError("solver", "cg solves linear systems; tradeoff needs an eigenvalue solver")
    grid = default_grid(cfg)
    if cfg.solver == "shift_invert" and min(grid) < 2:
        raise ConfigError("grid", "shift_invert needs every budget to be at least 2")
    shift, cal = _shift_for(cfg, cfg.d)
    per_trial = _map_trials(partial(_tradeoff_trial, cfg, grid, shift), cfg.n_trials, cfg.jobs)
    rows = [r for trial_rows in per_trial for r in trial_rows]
    failure = {}
    for T in grid:
        sel = [r for r in rows if r["T"] == T]
        failure[str(T)] = sum(not r["success_quarter"] for r in sel) / len(sel)
    config = cfg.resolved()
    if cal is not None:
        config["calibration"] = _calibration_dict(cal)
    summary = {"failure_frequency": failure, "threshold": 1.0 / (4 * cfg.d**2)}
    return Report("tradeoff", config, TRADEOFF_COLUMNS, rows, summary, None)


# ----------------------------------------------------------------- posterior

POSTERIOR_COLUMNS = [
    "schema_version", "seed", "trial", "d", "T", "corner_stat", "reference_stat",
    "block_residual", "lambda_min_W", "lambda_min_corner", "corner_bound_ok", "discarded",
]


def adaptive_queries(X, T: int, rng) -> list:
    """Queries issued by a power method on ``W = X X'`` with a budget of ``T`` products."""
    if T == 0:
        return []
    oracle = QueryOracle(X @ X.T, budget=T, retain_history=True)
    if T == 1:
        lanczos(oracle, 1, rng)
    else:
        power_method(oracle, T - 1, rng)
    return oracle.ledger.queries


def _posterior_trial(cfg: ExperimentConfig, T, i):
    rng = trial_rng(cfg.seed, "posterior", i)
    d = cfg.d
    ws = sample_wishart(d, rng)
    reference = sample_wishart(d - T, rng)
    row = {
        "schema_version": SCHEMA_VERSION, "seed": cfg.seed, "trial": i, "d": d, "T": T,
        "reference_stat": (d - T) ** 2 * reference.lambda_min, "lambda_min_W": ws.lambda_min,
    }
    try:
        queries = gram_schmidt(adaptive_queries(ws.X, T, rng))
        ce = extract_corner(build_rotations(queries, ws.X), ws.X)
    except (DependentVector, DegenerateSpan):
        row.update(discarded=True)
        return row
    corner_min = eigvals_sym(ce.W_tilde)[-1]
    row.update(
        corner_stat=(d - T) ** 2 * (d / (d - T)) * corner_min,
        block_residual=ce.residual / ws.norm,
        lambda_min_corner=corner_min,
        corner_bound_ok=bool(ws.lambda_min <= corner_min + CORNER_TOL),
        discarded=False,
    )
    return row


def run_posterior(cfg: ExperimentConfig) -> Report:
    """Two-sample KS test of the rescaled corner against fresh ``Wishart(d - T)``."""
    T = cfg.T if cfg.T is not None else cfg.d // 4
    if T >= cfg.d:
        raise ConfigError("T", f"T must be smaller than d={cfg.d}, got {T}")
    rows = _map_trials(partial(_posterior_trial, cfg, T), cfg.n_trials, cfg.jobs)
    kept = [r for r in rows if not r["discarded"]]
    discards = len(rows) - len(kept)
    stat = ks_two_sample([r["corner_stat"] for r in kept], [r["reference_stat"] for r in rows]) if kept else 1.0
    max_residual = max((r["block_residual"] for r in kept), default=math.inf)
    corner_ok = all(r["corner_bound_ok"] for r in kept)
    passed = bool(
        stat <= POSTERIOR_KS_THRESHOLD
        and discards <= MAX_DISCARD_FRACTION * len(rows)
        and max_residual <= RESIDUAL_TOL
        and corner_ok
    )
    config = cfg.resolved()
    config["T"] = T
    summary = {
        "lemma": "conditional-wishart", "d": cfg.d, "T": T, "N": len(rows), "statistic": stat,
        "threshold": POSTERIOR_KS_THRESHOLD, "discards": discards, "max_block_residual": max_residual,
        "residual_tolerance": RESIDUAL_TOL, "corner_bound_all": corner_ok, "pass": passed,
    }
    return Report("posterior", config, POSTERIOR_COLUMNS, rows, summary, passed)


# ----------------------------------------------------------------- reduction

REDUCTION_COLUMNS = [
    "schema_version", "seed", "trial", "s", "d", "attempts", "class_member", "lambda1", "gap_true",
    "rayleigh", "target", "success", "queries_used", "budget", "budget_ratio",
]


@dataclass(frozen=True)
class ReductionPlan:
    """Resolved constants for one reduction run."""

    gap_param: float
    alpha: float
    eps: float
    rounds: int
    inner_delta: float
    base_iterations: int
    budget: float

    @property
    def shift(self) -> ShiftParams:
        return ShiftParams(self.gap_param, self.alpha)


def budget_curve(base_queries: int, gap_alpha: float, x: float, restarts: int = 1, constant: float = 1.0) -> float:
    """``K * Query(base) * L * (log(1/gap_alpha) / gap_alpha) * log^2(x) * loglog(x)``."""
    lx = math.log(x)
    if lx <= 1.0:
        raise ValueError(f"budget curve needs log(x) > 1, got x={x}")
    return constant * base_queries * restarts * (math.log(1.0 / gap_alpha) / gap_alpha) * lx**2 * math.log(lx)


def plan_reduction(cfg: ExperimentConfig) -> tuple[ReductionPlan, object]:
    s, d = cfg.sparsity, cfg.d
    cal = calibrate(s, cfg.delta, cfg.calibration_seed)
    sp = ShiftParams(cal.gap_param, cal.alpha)
    eps = min(math.sqrt(cfg.c * cal.gap_param), 1.0 / (cfg.tau * math.sqrt(d)), 0.5)
    rounds = default_rounds(eps, sp, cfg.rounds_constant)
    inner_delta = 1.0 / (2.0 * math.e * rounds)
    base_iterations = d
    x = d / min(cfg.c * cal.gap_param, 1.0)
    budget = budget_curve(base_iterations + 1, sp.gap_alpha, x, cfg.boost, cfg.budget_constant)
    return ReductionPlan(cal.gap_param, cal.alpha, eps, rounds, inner_delta, base_iterations, budget), cal


def _reduction_trial(cfg: ExperimentConfig, plan: ReductionPlan, cal, i):
    rng = trial_rng(cfg.seed, "reduction", i)
    inst, attempts = sample_conditioned_instance(cfg.sparsity, cfg.d, cal, rng)
    oracle = QueryOracle(inst.M)
    sp = plan.shift
    inner = bootstrapped_cg(plan.base_iterations, plan.inner_delta)

    def eig_alg(o, g):
        return shift_invert_eig(o, sp, plan.eps, R=plan.rounds, seed=g, inner=inner)

    if cfg.boost == 1:
        out = eig_alg(oracle, rng)
    else:
        out = boost_restarts(eig_alg, oracle, cfg.boost, rng)
    v = out.v_hat
    lam1 = inst.truth.top
    g = gap(inst.truth)
    rayleigh = float(v @ inst.M.entries @ v)
    target = (1.0 - cfg.c * g) * lam1
    return {
        "schema_version": SCHEMA_VERSION, "seed": cfg.seed, "trial": i, "s": cfg.sparsity, "d": cfg.d,
        "attempts": attempts,
        "class_member": check_class_membership(inst.M, plan.gap_param, plan.alpha, spectrum=inst.truth),
        "lambda1": lam1, "gap_true": g, "rayleigh": rayleigh, "target": target,
        "success": bool(rayleigh >= target), "queries_used": out.queries_used,
        "budget": plan.budget, "budget_ratio": out.queries_used / plan.budget,
    }


def run_reduction(cfg: ExperimentConfig) -> Report:
    """Shift-and-invert with a bootstrapped CG inner solver on conditioned hard instances."""
    plan, cal = plan_reduction(cfg)
    rows = _map_trials(partial(_reduction_trial, cfg, plan, cal), cfg.n_trials, cfg.jobs)
    freq = sum(r["success"] for r in rows) / len(rows)
    max_ratio = max(r["budget_ratio"] for r in rows)
    passed = bool(freq >= REDUCTION_SUCCESS_TARGET and max_ratio <= 1.0)
    config = cfg.resolved()
    config["calibration"] = _calibration_dict(cal)
    config["plan"] = asdict(plan)
    summary = {
        "success_frequency": freq, "success_target": REDUCTION_SUCCESS_TARGET,
        "max_budget_ratio": max_ratio, "mean_queries": float(np.mean([r["queries_used"] for r in rows])),
        "class_member_all": all(r["class_member"] for r in rows), "pass": passed,
    }
    return Report("reduction", config, REDUCTION_COLUMNS, rows, summary, passed)


# ---------------------------------------------------------------- decoupling

DECOUPLING_COLUMNS = [
    "schema_version", "seed", "trial", "d", "T", "lambda_hat_min", "lambda_min_true",
    "lambda_min_corner", "hat_above_t", "corner_below", "true_below", "true_above", "error", "discarded",
]


def _decoupling_trial(cfg: ExperimentConfig, T, shift, i):
    rng = trial_rng(cfg.seed, "decoupling", i)
    d = cfg.d
    ws = sample_wishart(d, rng)
    t, eps = 1.0 / (2 * d * d), 1.0 / (4 * d * d)
    est, oracle = estimate_lambda_min(cfg.solver, ws.X, T, rng, shift, retain_history=True)
    truth = ws.lambda_min
    row = {
        "schema_version": SCHEMA_VERSION, "seed": cfg.seed, "trial": i, "d": d, "T": T,
        "lambda_hat_min": est, "lambda_min_true": truth,
        "hat_above_t": bool(est >= t), "true_below": bool(truth <= t - eps),
        "true_above": bool(truth >= t + eps), "error": bool(abs(est - truth) >= eps),
    }
    try:
        queries = gram_schmidt(oracle.ledger.queries)
        ce = extract_corner(build_rotations(queries, ws.X), ws.X)
    except (DependentVector, DegenerateSpan):
        row.update(discarded=True)
        return row
    corner_min = eigvals_sym(ce.W_tilde)[-1]
    row.update(lambda_min_corner=corner_min, corner_below=bool(corner_min <= t - eps), discarded=False)
    return row


def run_decoupling(cfg: ExperimentConfig) -> Report:
    """Estimate the probabilities in the decoupling argument of the lower bound."""
    if cfg.solver == "cg":
        raise ConfigError("solver", "cg solves linear systems; decoupling needs an eigenvalue solver")
    d = cfg.d
    T = cfg.T if cfg.T is not None else int(math.floor((1 - cfg.beta) * d))
    if T >= d:
        raise ConfigError("T", f"T must be smaller than d={d}, got {T}")
    if cfg.solver == "shift_invert" and T == 1:
        raise ConfigError("T", "shift_invert needs T = 0 or T >= 2")
    shift, cal = _shift_for(cfg, d)
    rows = _map_trials(partial(_decoupling_trial, cfg, T, shift), cfg.n_trials, cfg.jobs)
    kept = [r for r in rows if not r["discarded"]]
    n = len(kept)
    p_hat = sum(r["hat_above_t"] for r in kept) / n
    p_corner = sum(r["corner_below"] for r in kept) / n
    p_joint = sum(r["hat_above_t"] and r["true_below"] for r in kept) / n
    p_below = sum(r["true_below"] for r in kept) / n
    p_above = sum(r["true_above"] for r in kept) / n
    p_err = sum(r["error"] for r in kept) / n
    product = p_hat * p_corner
    bound = p_corner * p_above / (1.0 + p_corner)
    discards = len(rows) - n
    passed = bool(p_joint >= product * (1.0 - cfg.slack) and discards <= MAX_DISCARD_FRACTION * len(rows))
    config = cfg.resolved()
    config["T"] = T
    if cal is not None:
        config["calibration"] = _calibration_dict(cal)
    summary = {
        "t": 1.0 / (2 * d * d), "eps": 1.0 / (4 * d * d), "N": len(rows), "discards": discards,
        "p_hat_above_t": p_hat, "p_corner_below": p_corner, "p_joint": p_joint, "product": product,
        "p_true_below": p_below, "p_true_above": p_above, "p_err": p_err, "p_err_bound": bound,
        "p_err_bound_direct": p_above - p_hat, "limit_cdf_quarter": float(edge_cdf(0.25)),
        "slack": cfg.slack, "pass": passed,
    }
    return Report("decoupling", config, DECOUPLING_COLUMNS, rows, summary, passed)


# ------------------------------------------------------------------- density

DENSITY_COLUMNS = ["schema_version", "seed", "x", "pdf", "cdf", "quadrature_cdf", "empirical_cdf"]


def quadrature_cdf(x, nodes: int = 64) -> float:
    """``int_0^x f`` by Gauss-Legendre after substituting ``x = u**2``.

    The substitution turns the integrand into ``(1 + u) exp(-(u**2/2 + u))``,
    which is smooth on ``[0, sqrt(x)]``.
    """
    if x <= 0:
        return 0.0
    nodes_, weights = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * math.sqrt(x)
    u = half * (nodes_ + 1.0)
    return float(half * np.sum(weights * (1.0 + u) * np.exp(-(0.5 * u * u + u))))


def _density_sample(cfg: ExperimentConfig, i):
    return cfg.d**2 * sample_wishart(cfg.d, trial_rng(cfg.seed, "density", i)).lambda_min


def run_density(cfg: ExperimentConfig) -> Report:
    """Hard-edge law table and one-sample KS of ``d**2 lambda_min`` samples."""
    samples = np.sort(np.array(_map_trials(partial(_density_sample, cfg), cfg.n_trials, cfg.jobs)))
    stat = ks_one_sample(samples, edge_cdf)
    grid = np.asarray(cfg.grid, dtype=float) if cfg.grid is not None else np.array(DENSITY_GRID)
    rows = []
    worst = 0.0
    for x in grid:
        cdf = float(edge_cdf(x))
        quad = quadrature_cdf(x)
        worst = max(worst, abs(cdf - quad))
        rows.append({
            "schema_version": SCHEMA_VERSION, "seed": cfg.seed, "x": float(x),
            "pdf": float(edge_pdf(x)) if x > 0 else math.inf, "cdf": cdf, "quadrature_cdf": quad,
            "empirical_cdf": float(np.searchsorted(samples, x, side="right") / samples.size),
        })
    passed = bool(stat <= DENSITY_KS_THRESHOLD and worst <= 1e-8)
    config = cfg.resolved()
    config["grid"] = [float(x) for x in grid]
    summary = {
        "N": int(samples.size), "statistic": stat, "threshold": DENSITY_KS_THRESHOLD,
        "max_quadrature_discrepancy": worst, "pass": passed,
    }
    return Report("density", config, DENSITY_COLUMNS, rows, summary, passed)


# ----------------------------------------------------------------- calibrate

CALIBRATE_COLUMNS = ["schema_version", "d", "statistic", "level", "value"]


def run_calibrate(cfg: ExperimentConfig) -> Report:
    """Pilot-run calibration of the good-event constants."""
    cal = calibrate(cfg.d, cfg.delta, cfg.calibration_seed, cfg.n_trials)
    rows = [
        {"schema_version": SCHEMA_VERSION, "d": cfg.d, "statistic": name, "level": float(level), "value": value}
        for name, table in cal.quantiles.items()
        for level, value in table.items()
    ]
    config = cfg.resolved()
    config["calibration"] = _calibration_dict(cal)
    summary = {
        "d": cal.d, "seed": cal.seed, "C1": cal.C1, "C2": cal.C2, "pilot_N": cal.pilot_N,
        "accept_rate": cal.accept_rate, "quantiles": cal.quantiles,
    }
    return Report("calibrate", config, CALIBRATE_COLUMNS, rows, summary, None)


RUNNERS = {
    "tradeoff": run_tradeoff,
    "posterior": run_posterior,
    "reduction": run_reduction,
    "decoupling": run_decoupling,
    "density": run_density,
    "calibrate": run_calibrate,
}


def run_experiment(cfg: ExperimentConfig) -> Report:
    return RUNNERS[cfg.experiment](cfg)


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **changes)
