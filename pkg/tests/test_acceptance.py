"""The twelve acceptance criteria, each at its stated size and tolerance.

Every test records a one-line verdict that is printed in the pytest terminal
summary under "acceptance criteria".
"""
import math
import time

import numpy as np
import pytest
from scipy import integrate

from querylab.cli import main
from querylab.errors import SingularBlock
from querylab.experiments import ExperimentConfig, run_posterior, run_reduction, run_tradeoff
from querylab.lemmas import corner_witness, ks_one_sample
from querylab.oracle import LinSysInstance, QueryOracle
from querylab.rng import trial_rng
from querylab.solvers import (
    ShiftParams,
    boost_restarts,
    bootstrap_solve,
    cg_base,
    cg_iterations_for_contract,
    shift_invert_eig,
)
from querylab.spectral import QuadraticProblem, eig_sym, gap, suboptimality
from querylab.wishart import (
    NORM_CAP,
    calibrate,
    edge_cdf,
    edge_pdf,
    sample_conditioned_instance,
    sample_wishart,
)

SEED = 1


@pytest.fixture(scope="module")
def edge_samples():
    """``d**2 lambda_min`` and ``|W|`` for 1000 Wishart samples at d = 128."""
    d = 128
    edges, norms = [], []
    for i in range(1000):
        w = sample_wishart(d, trial_rng(SEED, "acceptance-edge", i))
        vals = w.spectrum.eigenvalues
        edges.append(d * d * vals[-1])
        norms.append(vals[0])
    return np.array(edges), np.array(norms)


def test_ac01_hard_edge_closed_form(record_criterion):
    start = time.perf_counter()
    worst = 0.0
    for x in (0.1, 0.5, 1.0, 2.0, 5.0):
        quad, _ = integrate.quad(lambda t: float(edge_pdf(t)), 0.0, x, epsabs=1e-13, epsrel=1e-12, limit=200)
        worst = max(worst, abs(float(edge_cdf(x)) - quad))
    total, _ = integrate.quad(lambda t: float(edge_pdf(t)), 0.0, 60.0, epsabs=1e-13, limit=200)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and abs(total - 1.0) <= 1e-6 and elapsed < 1.0
    assert record_criterion(1, ok, f"max |cdf - quad| = {worst:.2e}, int_0^60 f = {total:.10f}, {elapsed:.3f}s")


def test_ac02_edge_law_convergence(record_criterion, edge_samples):
    edges, _ = edge_samples
    stat = ks_one_sample(edges, edge_cdf)
    assert record_criterion(2, stat <= 0.06, f"d=128 N=1000 KS = {stat:.4f} (<= 0.06)")


def test_ac03_tail_facts(record_criterion, edge_samples):
    edges, _ = edge_samples
    upper = float(np.mean(edges >= 1.0))
    small = {a: float(np.mean(edges <= a * a)) for a in (0.25, 0.5)}
    ok = 0.12 <= upper <= 0.35 and all(p >= 0.5 * a for a, p in small.items())
    detail = f"Pr[>=1] = {upper:.3f} in [0.12, 0.35]; " + ", ".join(
        f"Pr[<={a * a:g}] = {p:.3f} >= {0.5 * a:g}" for a, p in small.items()
    )
    assert record_criterion(3, ok, detail)


def test_ac04_operator_norm_event(record_criterion, edge_samples):
    _, norms = edge_samples
    frac = float(np.mean(norms[:500] < NORM_CAP))
    assert record_criterion(4, frac >= 0.99, f"fraction |W| < 5 = {frac:.3f} over 500 samples (>= 0.99)")


def test_ac05_corner_lemma(record_criterion):
    d, T = 16, 4
    ok_count, discards, worst_gap, worst_exact = 0, 0, -math.inf, 0.0
    for i in range(1000):
        rng = trial_rng(SEED, "acceptance-corner", i)
        A = rng.standard_normal((T, T))
        B = rng.standard_normal((d - T, T))
        W = sample_wishart(d - T, rng).W
        try:
            out = corner_witness(A, B, W)
        except SingularBlock:
            discards += 1
            continue
        lam_w = float(np.linalg.eigvalsh(W.entries)[0])
        lam_m = float(np.linalg.eigvalsh(out.M)[0])
        exact = abs(out.quadratic - lam_w) / np.linalg.norm(out.M, 2)
        worst_gap = max(worst_gap, lam_m - lam_w)
        worst_exact = max(worst_exact, exact)
        ok_count += lam_m <= lam_w + 1e-10 and exact <= 1e-10
    ok = ok_count == 1000
    detail = f"{ok_count}/1000 trials; max lambda_min(M) - lambda_min(W) = {worst_gap:.2e}; max witness error/|M| = {worst_exact:.2e}; discards {discards}"
    assert record_criterion(5, ok, detail)


def test_ac06_conditional_wishart_posterior(record_criterion):
    rep = run_posterior(ExperimentConfig("posterior", d=64, T=16, trials=500, seed=SEED))
    s = rep.summary
    detail = (
        f"KS = {s['statistic']:.4f} (<= 0.10), max residual/|W| = {s['max_block_residual']:.2e} (<= 1e-9), "
        f"discards {s['discards']}/500"
    )
    assert record_criterion(6, rep.passed, detail)


def test_ac07_lanczos_full_budget(record_criterion):
    rep = run_tradeoff(ExperimentConfig("tradeoff", d=64, trials=100, seed=SEED, grid=(64,)))
    errs = [r["abs_error"] for r in rep.rows]
    hits = sum(e <= 1e-8 for e in errs)
    assert record_criterion(7, hits == 100, f"{hits}/100 with |err| <= 1e-8, max err = {max(errs):.2e}")


def test_ac08_lower_bound_regime(record_criterion):
    rep = run_tradeoff(ExperimentConfig("tradeoff", d=128, trials=200, seed=SEED, grid=(64,)))
    frac = rep.summary["failure_frequency"]["64"]
    assert record_criterion(8, frac >= 0.25, f"Lanczos T=64, d=128: failure fraction = {frac:.3f} (>= 0.25)")


def test_ac09_conditioned_hard_instances(record_criterion):
    s = 64
    cal = calibrate(s)
    bad, n = 0, 500
    for i in range(n):
        inst, _ = sample_conditioned_instance(s, s, cal, trial_rng(SEED, "acceptance-hard", i))
        vals = inst.truth.eigenvalues
        ok = (
            vals[-1] >= -1e-12
            and vals[0] <= 1.0 + 1e-12
            and abs(vals[0] - 1.0) <= cal.C1 / (5 * s * s)
            and gap(inst.truth) >= cal.C2 / (10 * s * s)
            and inst.nonzeros <= s * s
        )
        bad += not ok
    assert record_criterion(9, bad == 0, f"{n - bad}/{n} accepted instances satisfy all four properties (C1={cal.C1:.4f}, C2={cal.C2:.4f})")


@pytest.mark.slow
def test_ac10_shift_invert_reduction(record_criterion):
    rep = run_reduction(ExperimentConfig("reduction", d=64, trials=100, seed=SEED))
    s = rep.summary
    detail = (
        f"success = {s['success_frequency']:.2f} (>= 0.90), max measured/budget = {s['max_budget_ratio']:.3f} (<= 1), "
        f"mean queries = {s['mean_queries']:.0f}"
    )
    assert record_criterion(10, rep.passed, detail)


def test_ac11_bootstrap_and_boost(record_criterion):
    d, condition = 64, 100.0
    T_base = cg_iterations_for_contract(condition)
    eps, delta = math.exp(-10), 0.1
    hits = 0
    for i in range(100):
        rng = trial_rng(SEED, "acceptance-bootstrap", i)
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        A = (Q * np.geomspace(1.0, condition, d)) @ Q.T
        b, x0 = rng.standard_normal(d), rng.standard_normal(d)
        prob = QuadraticProblem(A, b, x0)
        out = bootstrap_solve(cg_base(T_base), LinSysInstance(QueryOracle(A), b, x0), eps, delta, rng)
        assert len(out.trace) == 10
        hits += suboptimality(prob, out.x_hat) <= eps * suboptimality(prob, x0)
    contraction = hits / 100

    s = 64
    cal = calibrate(s)
    sp = ShiftParams(cal.gap_param, cal.alpha)

    def weak_eig(oracle, g):
        return shift_invert_eig(oracle, sp, 0.1, R=1, seed=g)

    failures = {}
    for L in (1, 3, 5):
        fails = 0
        for i in range(200):
            inst, _ = sample_conditioned_instance(s, s, cal, trial_rng(SEED, "acceptance-boost", i))
            out = boost_restarts(weak_eig, QueryOracle(inst.M), L, trial_rng(SEED, "acceptance-boost-copies", i))
            v = out.v_hat
            fails += float(v @ inst.M.entries @ v) < (1 - gap(inst.truth)) * inst.truth.top
        failures[L] = fails / 200
    monotone = failures[1] >= failures[3] >= failures[5]
    ok = contraction >= 0.95 and monotone
    detail = (
        f"bootstrap T_base={T_base}: {hits}/100 reach e^-10 (>= 95); boost failure "
        + ", ".join(f"L={L}: {f:.3f}" for L, f in failures.items())
    )
    assert record_criterion(11, ok, detail)


REPRO_RUNS = [
    ["tradeoff", "--d", "16", "--trials", "5"],
    ["tradeoff", "--d", "16", "--trials", "3", "--solver", "shift_invert", "--grid", "4,16"],
    ["posterior", "--d", "16", "--T", "4", "--trials", "20"],
    ["reduction", "--d", "16", "--trials", "2"],
    ["decoupling", "--d", "16", "--T", "4", "--trials", "20", "--solver", "power"],
    ["density", "--d", "16", "--trials", "50"],
    ["calibrate", "--d", "8", "--trials", "100"],
]


def test_ac12_reproducibility(record_criterion, tmp_path):
    mismatched = []
    for args in REPRO_RUNS:
        for fmt in ("csv", "json"):
            blobs = []
            for rep in range(2):
                path = tmp_path / f"{args[0]}-{fmt}-{rep}"
                code = main(args + ["--seed", "12345", "--format", fmt, "--out", str(path)])
                assert code in (0, 2)
                blobs.append(path.read_bytes())
            if blobs[0] != blobs[1]:
                mismatched.append(f"{args[0]}/{fmt}")
    ok = not mismatched
    detail = f"{2 * len(REPRO_RUNS) - len(mismatched)}/{2 * len(REPRO_RUNS)} experiment/format pairs byte-identical"
    assert record_criterion(12, ok, detail + (f"; differ: {mismatched}" if mismatched else ""))
