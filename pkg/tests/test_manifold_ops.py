import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fibered.manifold_ops import (DegenerateFrameError, nearest_frame, procrustes_fit,
                                  random_frame)
from oracles import grid_nearest_orthogonal, grid_procrustes

# frozen oracle outputs (1-degree grid search plus ternary polish)
ROTATION_90 = np.array([[0.0, -1.0], [1.0, 0.0]])
REFLECT_Y = np.diag([1.0, -1.0])
NEAREST_OF_0210 = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_identity_fit(rng):
    src = rng.normal(size=(6, 3))
    np.testing.assert_allclose(procrustes_fit(src, src).entries, np.eye(3), atol=1e-12)


def test_rotation_fit_matches_oracle():
    src, tgt = [(1, 0), (0, 1)], [(0, 1), (-1, 0)]
    _, oracle = grid_procrustes(src, tgt)
    np.testing.assert_allclose(oracle, ROTATION_90, atol=1e-9)
    np.testing.assert_allclose(procrustes_fit(src, tgt).entries, ROTATION_90, atol=1e-12)


def test_reflection_fit_matches_oracle():
    src, tgt = [(1, 0), (0, 1)], [(1, 0), (0, -1)]
    _, oracle = grid_procrustes(src, tgt)
    np.testing.assert_allclose(oracle, REFLECT_Y, atol=1e-9)
    fit = procrustes_fit(src, tgt)
    np.testing.assert_allclose(fit.entries, REFLECT_Y, atol=1e-12)
    assert fit.det_sign == -1


def test_rank_deficient_flagged():
    fit = procrustes_fit([(1, 0), (2, 0)], [(0, 1), (0, 2)])
    assert fit.degenerate
    np.testing.assert_allclose(fit.entries.T @ fit.entries, np.eye(2), atol=1e-12)


def test_procrustes_rejects_bad_input():
    with pytest.raises(ValueError):
        procrustes_fit([(1, 0)], [(1, 0), (0, 1)])


@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 12))
def test_procrustes_equivariance(seed, r, m):
    rng = np.random.default_rng(seed)
    src = rng.normal(size=(m + r, r))
    tgt = rng.normal(size=(m + r, r))
    base = procrustes_fit(src, tgt).entries
    R = random_frame(r, r, False, rng).entries
    R2 = random_frame(r, r, False, rng).entries
    moved = procrustes_fit(src @ R.T, tgt @ R2.T).entries
    np.testing.assert_allclose(moved, R2 @ base @ R.T, atol=1e-8)


@given(arrays(np.float64, (5, 2), elements=st.floats(-10, 10)),
       arrays(np.float64, (5, 2), elements=st.floats(-10, 10)))
def test_procrustes_always_orthogonal(src, tgt):
    q = procrustes_fit(src, tgt).entries
    np.testing.assert_allclose(q.T @ q, np.eye(2), atol=1e-9)


def test_nearest_frame_examples():
    f = random_frame(4, 2, False, np.random.default_rng(1)).entries
    np.testing.assert_allclose(nearest_frame(f).entries, f, atol=1e-12)
    np.testing.assert_allclose(nearest_frame(np.diag([2.0, 0.5])).entries, np.eye(2), atol=1e-12)
    m = np.array([[0.0, 2.0], [1.0, 0.0]])
    _, oracle = grid_nearest_orthogonal(m)
    np.testing.assert_allclose(oracle, NEAREST_OF_0210, atol=1e-12)
    np.testing.assert_allclose(nearest_frame(m).entries, NEAREST_OF_0210, atol=1e-12)
    with pytest.raises(DegenerateFrameError, match="degenerate frame projection"):
        nearest_frame(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        nearest_frame(np.ones((2, 3)))


@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(0, 3))
def test_nearest_frame_idempotent(seed, cols, extra):
    m = np.random.default_rng(seed).normal(size=(cols + extra, cols))
    once = nearest_frame(m).entries
    twice = nearest_frame(once).entries
    np.testing.assert_allclose(twice, once, atol=1e-12)


def test_special_projection_has_det_one(rng):
    for _ in range(20):
        m = rng.normal(size=(3, 3))
        assert np.linalg.det(nearest_frame(m, special=True).entries) == pytest.approx(1.0)


def test_random_frame_properties():
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert np.linalg.det(random_frame(2, 2, True, rng).entries) == pytest.approx(1.0)
    v = random_frame(3, 1, False, rng).entries
    assert abs(np.linalg.norm(v) - 1) < 1e-12


def test_random_frame_rotationally_symmetric():
    # Monte-Carlo check: column entries average to zero
    rng = np.random.default_rng(7)
    draws = np.array([random_frame(3, 2, False, rng).entries for _ in range(10_000)])
    assert np.abs(draws.mean(axis=0)).max() < 0.05


def test_procrustes_matches_grid_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = int(rng.integers(2, 9))
        src, tgt = rng.normal(size=(m, 2)), rng.normal(size=(m, 2))
        val, _ = grid_procrustes(src, tgt)
        q = procrustes_fit(src, tgt).entries
        assert abs(np.sum((src @ q.T - tgt) ** 2) - val) < 1e-6
