import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from querylab.errors import DegenerateSpan, SingularBlock
from querylab.experiments import adaptive_queries
from querylab.lemmas import (
    assemble_blocks,
    build_rotations,
    corner_witness,
    extract_corner,
    ks_critical_value,
    ks_one_sample,
    ks_two_sample,
)
from querylab.oracle import gram_schmidt
from querylab.rng import as_rng
from querylab.wishart import edge_cdf, edge_quantile, sample_wishart


def _random_queries(d, T, rng):
    return gram_schmidt(rng.standard_normal((T, d)))


def test_rotations_identity_geometry():
    rp = build_rotations([np.eye(3)[0]], np.eye(3))
    np.testing.assert_allclose(rp.V, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(rp.R[:, 0], [1.0, 0.0, 0.0], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_rotation_invariants(d, seed):
    rng = np.random.default_rng(seed)
    T = int(rng.integers(0, d))
    X = rng.standard_normal((d, d)) / math.sqrt(d)
    qs = _random_queries(d, T, rng)
    rp = build_rotations(qs, X)
    assert np.max(np.abs(rp.V.T @ rp.V - np.eye(d))) <= 1e-10
    assert np.max(np.abs(rp.R.T @ rp.R - np.eye(d))) <= 1e-10
    for t, q in enumerate(qs):
        assert np.max(np.abs(rp.V[t] - q)) <= 1e-10
    Y = rp.V @ X @ rp.R
    # leading rows are lower triangular: row t lives in the first t + 1 columns
    assert np.max(np.abs(np.triu(Y[:T], 1)), initial=0.0) <= 1e-10
    ce = extract_corner(rp, X)
    assert ce.residual <= 1e-9 * max(1.0, np.linalg.norm(X @ X.T, 2))


def test_rotations_reproducible():
    rng = as_rng(1)
    X = rng.standard_normal((8, 8))
    qs = _random_queries(8, 3, rng)
    a, b = build_rotations(qs, X), build_rotations(qs, X)
    assert np.array_equal(a.V, b.V) and np.array_equal(a.R, b.R)


def test_block_identity_d16():
    rng = as_rng(2)
    w = sample_wishart(16, rng)
    ce = extract_corner(build_rotations(_random_queries(16, 4, rng), w.X), w.X)
    assert ce.residual <= 1e-9 * w.norm
    assert ce.Y1.shape == (4, 4) and ce.Y2.shape == (12, 4) and ce.W_tilde.dim == 12
    assert np.linalg.eigvalsh(ce.W_tilde.entries)[0] >= -1e-12


def test_corner_edge_cases():
    rng = as_rng(3)
    w = sample_wishart(6, rng)
    ce = extract_corner(build_rotations([], w.X), w.X)
    np.testing.assert_allclose(ce.W_tilde.entries, w.X @ w.X.T, atol=1e-15)
    ce = extract_corner(build_rotations(_random_queries(6, 5, rng), w.X), w.X)
    assert ce.W_tilde.dim == 1 and ce.W_tilde.entries[0, 0] >= 0


def test_rotation_errors():
    X = np.diag([1.0, 1.0, 0.0])
    with pytest.raises(DegenerateSpan):
        build_rotations([np.eye(3)[2]], X)
    with pytest.raises(ValueError):
        build_rotations([np.array([1.0, 1.0, 0.0])], np.eye(3))
    with pytest.raises(ValueError):
        build_rotations(list(np.eye(3)), np.eye(3))


def test_corner_bound_under_adaptive_queries():
    rng = as_rng(4)
    for _ in range(200):
        w = sample_wishart(64, rng)
        qs = gram_schmidt(adaptive_queries(w.X, 16, rng))
        ce = extract_corner(build_rotations(qs, w.X), w.X)
        assert w.lambda_min <= np.linalg.eigvalsh(ce.W_tilde.entries)[0] + 1e-10


def test_assemble_blocks_shape():
    M = assemble_blocks(np.eye(2), np.ones((3, 2)), np.eye(3))
    assert M.shape == (5, 5)


def test_witness_hand_example():
    out = corner_witness([[1.0]], [[1.0]], [[2.0]])
    np.testing.assert_allclose(out.M, [[1.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(np.abs(out.z), [1.0, 1.0])
    assert out.z[0] == -out.z[1]
    assert out.quadratic == pytest.approx(2.0, abs=1e-15)
    assert np.linalg.eigvalsh(out.M)[0] == pytest.approx(2 - math.sqrt(2))
    assert out.value == pytest.approx(1.0)


def test_witness_block_diagonal():
    W = np.array([[2.0, 0.5], [0.5, 1.0]])
    out = corner_witness(np.eye(2) * 3.0, np.zeros((2, 2)), W)
    np.testing.assert_allclose(out.z[:2], 0.0, atol=1e-15)
    assert out.value == pytest.approx(np.linalg.eigvalsh(W)[0], abs=1e-14)


def test_witness_singular_block():
    with pytest.raises(SingularBlock):
        corner_witness(np.zeros((2, 2)), np.ones((3, 2)), np.eye(3))


def test_witness_random_psd_blocks():
    rng = as_rng(5)
    for _ in range(200):
        A = rng.standard_normal((4, 4))
        B = rng.standard_normal((12, 4))
        W = sample_wishart(12, rng).W
        out = corner_witness(A, B, W)
        lam_w = np.linalg.eigvalsh(W.entries)[0]
        norm_m = np.linalg.norm(out.M, 2)
        assert np.linalg.eigvalsh(out.M)[0] <= lam_w + 1e-10
        assert abs(out.quadratic - lam_w) <= 1e-10 * norm_m
        assert out.value <= lam_w + 1e-10


def test_ks_one_sample_examples():
    u = as_rng(6).random(10000)
    assert ks_one_sample(edge_quantile(u), edge_cdf) <= 0.03
    assert ks_one_sample([0.0, 0.0], edge_cdf) == 1.0
    assert ks_one_sample([0.0], stats.norm.cdf) == 0.5
    with pytest.raises(ValueError):
        ks_one_sample([], edge_cdf)


def test_ks_two_sample_examples():
    xs = [0.1, 0.4, 0.2]
    assert ks_two_sample(xs, xs) == 0.0
    assert ks_two_sample([1.0, 2.0], [3.0, 4.0]) == 1.0
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


@pytest.mark.filterwarnings("ignore:ks_2samp:RuntimeWarning")
@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=40),
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=40),
)
def test_ks_match_scipy(xs, ys):
    assert ks_two_sample(xs, ys) == pytest.approx(stats.ks_2samp(xs, ys).statistic, abs=1e-12)
    assert ks_one_sample(xs, stats.norm.cdf) == pytest.approx(stats.kstest(xs, "norm").statistic, abs=1e-12)


def test_ks_two_sample_null_calibration():
    crit = ks_critical_value(500, 500)
    assert crit == pytest.approx(0.103, abs=5e-4)
    rng = as_rng(7)
    hits = sum(ks_two_sample(rng.standard_normal(500), rng.standard_normal(500)) <= 0.103 for _ in range(200))
    assert hits / 200 >= 0.95
