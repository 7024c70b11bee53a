import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fibered.cover import (COVER_FACTOR, Cover, CoverError, Nerve, build_cover, build_nerve,
                           bump, greedy_k_center, greedy_k_center_metric, partition_of_unity)
from oracles import optimal_k_center


def test_greedy_on_line():
    centers, radius = greedy_k_center(np.array([0.0, 1, 2, 3, 4]), 2)
    assert list(centers) == [0, 4]
    assert radius == 2.0


def test_greedy_two_approximation():
    rng = np.random.default_rng(3)
    for _ in range(20):
        pts = rng.normal(size=(9, 2))
        k = int(rng.integers(1, 5))
        _, radius = greedy_k_center(pts, k)
        assert radius <= 2 * optimal_k_center(pts, k) + 1e-12


def test_metric_variant_agrees():
    rng = np.random.default_rng(4)
    pts = rng.normal(size=(40, 3))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    a, ra = greedy_k_center(pts, 7)
    b, rb = greedy_k_center_metric(d, 7)
    np.testing.assert_array_equal(a, b)
    assert ra == pytest.approx(rb)


def test_cover_errors():
    with pytest.raises(CoverError, match="exceeds"):
        build_cover(np.zeros((3, 1)), 5)
    with pytest.raises(CoverError, match="degenerate cover"):
        build_cover(np.zeros((4, 2)), 2)


def test_k_equals_n_gives_singletons():
    base = np.arange(5.0)[:, None]
    cov = build_cover(base, 5)
    assert cov.cover_radius == 0
    assert all(m.size == 1 for m in cov.membership)
    pou = partition_of_unity(cov, base)
    np.testing.assert_allclose(pou.weights.toarray().sum(axis=1), 1.0)


def test_circle_cover_and_nerve():
    t = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    base = np.column_stack([np.cos(t), np.sin(t)])
    cov = build_cover(base, 16)
    assert cov.k == 16
    nerve = build_nerve(cov)
    assert len(nerve.components()) == 1
    for i, j, s in nerve.edges:
        assert s == np.intersect1d(cov.membership[i], cov.membership[j]).size
    assert Nerve.from_json(nerve.to_json()) == nerve
    back = Cover.from_json(cov.to_json())
    assert back.cover_radius == cov.cover_radius


def test_bump_values():
    d = np.array([0.0, 0.5, 1.0, 2.0])
    out = bump(d, 1.0)
    assert out[0] == pytest.approx(np.exp(-1))
    assert out[1] == pytest.approx(np.exp(-1 / 0.75))
    assert out[2] == 0 and out[3] == 0


@given(arrays(np.float64, (60, 2), elements=st.floats(-5, 5)), st.integers(2, 12))
def test_partition_of_unity_properties(base, k):
    try:
        cov = build_cover(base, k)
    except CoverError:
        return
    w = partition_of_unity(cov, base).weights.toarray()
    assert np.all(w >= 0)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    # support inside the enlarged balls
    for i, c in enumerate(cov.center_points):
        far = np.linalg.norm(base - c, axis=1) >= COVER_FACTOR * cov.cover_radius
        assert np.all(w[far, i] == 0)
    # every point covered; nerve weights symmetric and positive
    assert np.all([(w[p] > 0).any() for p in range(len(base))])
    for _, _, s in build_nerve(cov).edges:
        assert s > 0


def test_duplicate_points_single_center():
    base = np.array([[0.0, 0], [0, 0], [3, 4]])
    _, radius = greedy_k_center(base, 1)
    assert radius == 5.0


def test_far_clusters_have_no_nerve_edge():
    rng = np.random.default_rng(0)
    base = np.vstack([rng.uniform(0, 1, (20, 2)), rng.uniform(0, 1, (20, 2)) + 100])
    cov = build_cover(base, 2)
    assert build_nerve(cov).edges == ()


def test_two_sets_on_circle_cover_everything():
    # antipodal centers give cover radius sqrt(2); balls of radius 3 sqrt(2)
    # contain the whole circle, so the overlap is the full sample rather than two arcs
    t = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    base = np.column_stack([np.cos(t), np.sin(t)])
    cov = build_cover(base, 2)
    assert cov.cover_radius == pytest.approx(np.sqrt(2))
    assert build_nerve(cov).edges == ((0, 1, 720),)


def test_partition_at_center_and_midpoint():
    base = np.array([[0.0], [1.0], [0.5]])
    cov = Cover(centers=np.array([0, 1]), center_points=base[:2], cover_radius=0.2,
                membership=(np.array([0, 2]), np.array([1, 2])))
    w = partition_of_unity(cov, base).weights.toarray()
    np.testing.assert_allclose(w[0], [1.0, 0.0])
    np.testing.assert_allclose(w[2], [0.5, 0.5])
    assert bump(np.array([0.0]), 0.6)[0] == pytest.approx(0.367879, abs=1e-6)
    assert bump(np.array([0.6 * (1 - 1e-9)]), 0.6)[0] < 1e-100


def test_nerve_subset_weight():
    cov = Cover(np.array([0, 1]), np.zeros((2, 1)), 1.0, (np.array([1, 2]), np.arange(5)))
    assert build_nerve(cov).edges == ((0, 1, 2),)


def test_cylinder_arcs_make_a_16_cycle(cylinder_small):
    # hand-built arcs overlapping only their two neighbors
    turns = np.mod(np.arctan2(cylinder_small.base_image[:, 1],
                              cylinder_small.base_image[:, 0]) / (2 * np.pi), 1)
    members = []
    for i in range(16):
        off = np.mod(turns - i / 16 + 0.5, 1) - 0.5
        members.append(np.flatnonzero(np.abs(off) < 0.75 / 16))
    cov = Cover(np.zeros(16, int), np.zeros((16, 2)), 1.0, tuple(members))
    edges = {(i, j) for i, j, _ in build_nerve(cov).edges}
    assert edges == {tuple(sorted((i, (i + 1) % 16))) for i in range(16)}


def test_nerve_total_weight_recount():
    rng = np.random.default_rng(5)
    base = rng.normal(size=(200, 2))
    cov = build_cover(base, 10)
    nerve = build_nerve(cov)
    recount = 0
    for p in range(200):
        sets = [i for i, m in enumerate(cov.membership) if p in set(m.tolist())]
        recount += len(sets) * (len(sets) - 1) // 2
    assert nerve.total_weight == recount
