"""Geodesic distances, landmarks, Vietoris-Rips persistence and prominence scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import _rips
from .cover import greedy_k_center_metric
from .data_model import PersistenceDiagram, seeded_rng, validate_distances


class TopologyError(ValueError):
    pass


# ---------------------------------------------------------------- geodesics


@dataclass(frozen=True)
class GeodesicMetric:
    distances: np.ndarray               # m x m shortest-path distances
    knn: int
    indices: np.ndarray                 # rows of the input metric the matrix refers to


def knn_graph(distances: np.ndarray, knn: int) -> sparse.csr_matrix:
    """Union-symmetrized k-nearest-neighbor graph weighted by distance."""
    n = distances.shape[0]
    knn = min(knn, n - 1)
    d = np.array(distances, dtype=float)
    np.fill_diagonal(d, np.inf)
    nbrs = np.argpartition(d, knn - 1, axis=1)[:, :knn] if knn > 0 else np.empty((n, 0), int)
    rows = np.repeat(np.arange(n), nbrs.shape[1])
    cols = nbrs.ravel()
    # both directions, each undirected pair once
    a = np.minimum(rows, cols)
    b = np.maximum(rows, cols)
    key = np.unique(a.astype(np.int64) * n + b)
    a, b = key // n, key % n
    w = distances[a, b]
    # csgraph keeps explicit zeros in sparse input as zero-weight edges
    g = sparse.csr_matrix((np.r_[w, w], (np.r_[a, b], np.r_[b, a])), shape=(n, n))
    return g


def knn_geodesic(distances: np.ndarray, knn: int = 15,
                 sources: Optional[np.ndarray] = None) -> GeodesicMetric:
    """Shortest-path distances in the k-NN graph between ``sources`` (all
    points when None)."""
    d = np.asarray(distances, dtype=float)
    n = d.shape[0]
    g = knn_graph(d, knn)
    n_comp, labels = csgraph.connected_components(g, directed=False)
    if n_comp > 1:
        sizes = sorted(np.bincount(labels).tolist(), reverse=True)
        raise TopologyError(
            f"k-NN graph disconnected: {n_comp} components of sizes {sizes}")
    idx = np.arange(n) if sources is None else np.asarray(sources, dtype=int)
    full = csgraph.dijkstra(g, directed=False, indices=idx)
    sub = full[:, idx]
    sub = np.minimum(sub, sub.T)
    np.fill_diagonal(sub, 0.0)
    return GeodesicMetric(sub, knn, idx)


def landmark_subsample(distances: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Maxmin landmarks from a random start point."""
    n = distances.shape[0]
    if m > n:
        raise TopologyError(f"cannot pick {m} landmarks from {n} points")
    if m == n:
        return np.arange(n)
    start = int(rng.integers(n))
    centers, _ = greedy_k_center_metric(np.asarray(distances, dtype=float), m, start)
    return centers


# ---------------------------------------------------------------- Rips


def enclosing_radius(distances: np.ndarray) -> float:
    return float(np.asarray(distances).max(axis=1).min())


def _table_bits(ncols: int) -> int:
    return max(4, int(math.ceil(math.log2(1.5 * ncols + 2))))


def vietoris_rips_pd(metric: np.ndarray, max_dim: int = 2, field_char: int = 2,
                     threshold: Optional[float] = None) -> PersistenceDiagram:
    """Persistent homology of the Rips filtration up to ``threshold``.

    Dimension 0 by union-find, dimensions 1 and 2 by cohomology reduction
    with clearing; Z/p arithmetic is exact.
    """
    dist = np.ascontiguousarray(metric, dtype=np.float64)
    validate_distances(dist)
    if field_char not in (2, 3):
        raise TopologyError("field characteristic must be 2 or 3")
    if not 0 <= max_dim <= 2:
        raise TopologyError("max_dim must lie in 0..2")
    n = dist.shape[0]
    if threshold is None:
        threshold = enclosing_radius(dist) if n > 1 else 1.0
    if not threshold > 0:
        raise TopologyError("threshold must be positive")
    thr = float(threshold)
    binom = _rips.binomial_table(max(n, 3), max_dim + 2)
    classes = []

    eidx, ediam = _rips.enumerate_edges(dist, thr)
    order = np.argsort(ediam, kind="stable")        # enumeration is index-ascending
    eidx, ediam = eidx[order], ediam[order]
    deaths, mst = _rips.union_find_h0(n, eidx, ediam, binom)
    classes += [(0, 0.0, d) for d in deaths if d > 0]
    classes += [(0, 0.0, math.inf)] * (n - len(deaths))
    if max_dim < 1 or n < 2:
        return PersistenceDiagram(field_char, tuple(classes))

    in_mst = np.zeros(n * (n - 1) // 2 + 1, dtype=bool)
    in_mst[mst] = True
    cols = eidx[~in_mst[eidx]][::-1].copy()
    b, d, ess, piv = _rips.reduce_dimension(cols, 1, n, dist, thr, field_char, binom,
                                            _table_bits(len(cols)), max_dim >= 2)
    classes += [(1, x, y) for x, y in zip(b, d)] + [(1, x, math.inf) for x in ess]
    if max_dim < 2 or n < 3:
        return PersistenceDiagram(field_char, tuple(classes))

    cleared = np.zeros(binom[n, 3] + 1, dtype=bool)
    cleared[piv] = True
    tidx, tdiam = _rips.enumerate_triangles(dist, thr, binom, cleared)
    del cleared
    order = np.argsort(tdiam, kind="stable")[::-1]
    cols = tidx[order]
    del tidx, tdiam, order
    b, d, ess, _ = _rips.reduce_dimension(cols, 2, n, dist, thr, field_char, binom,
                                          _table_bits(len(cols)), False)
    classes += [(2, x, y) for x, y in zip(b, d)] + [(2, x, math.inf) for x in ess]
    return PersistenceDiagram(field_char, tuple(classes))


# ---------------------------------------------------------------- prominence


@dataclass(frozen=True)
class ProminenceScore:
    """Sorted persistences per dimension and their consecutive ratios."""

    persistences: dict                  # dim -> descending array
    gap_ratios: dict                    # dim -> p_i / p_{i+1}
    clip: float

    def prominent_count(self, dim: int, gap: float = 3.0, floor: Optional[float] = None) -> int:
        """Number of classes above the last gap of at least ``gap``.

        Classes at or below ``floor`` count as noise; the list is padded with
        ``floor`` so a lone class must stand ``gap`` times above it.
        """
        if floor is None:
            floor = DEFAULT_FLOOR * self.clip
        p = self.persistences.get(dim, np.empty(0))
        p = p[p > floor]
        padded = np.append(p, max(floor, np.finfo(float).tiny))
        count = 0
        for i in range(p.size):
            if padded[i] >= gap * padded[i + 1]:
                count = i + 1
        return count

    def gap_after(self, dim: int, count: int, floor: Optional[float] = None) -> float:
        """Ratio between the count-th and the next persistence (floor-padded)."""
        if floor is None:
            floor = DEFAULT_FLOOR * self.clip
        p = self.persistences.get(dim, np.empty(0))
        if count == 0 or count > p.size:
            return 0.0
        nxt = p[count] if count < p.size else 0.0
        return float(p[count - 1] / max(nxt, floor, np.finfo(float).tiny))


DEFAULT_FLOOR = 0.05


def prominence(pd: PersistenceDiagram, dims=(0, 1, 2), clip: Optional[float] = None) -> ProminenceScore:
    """Persistences sorted descending, infinite deaths clipped at ``clip``."""
    pers, gaps = {}, {}
    finite = [d for _, _, d in pd.classes if math.isfinite(d)]
    if clip is None:
        clip = max(finite) if finite else 1.0
    for q in dims:
        bd = pd.in_dim(q)
        if bd.size == 0:
            pers[q] = np.empty(0)
            gaps[q] = np.empty(0)
            continue
        p = np.minimum(bd[:, 1], clip) - bd[:, 0]
        p = np.sort(np.clip(p, 0.0, None))[::-1]
        pers[q] = p
        with np.errstate(divide="ignore", invalid="ignore"):
            gaps[q] = p[:-1] / p[1:]
    return ProminenceScore(pers, gaps, float(clip))


def geodesic_pd(distances: np.ndarray, field_char: int = 2, knn: int = 15,
                landmarks: int = 400, max_dim: int = 2, seed: int = 0,
                threshold: Optional[float] = None):
    """Landmarked geodesic Rips diagram as used for validating embeddings.
    Returns (diagram, prominence score, landmark indices)."""
    n = distances.shape[0]
    idx = landmark_subsample(distances, min(landmarks, n), seeded_rng(seed, "landmarks"))
    geo = knn_geodesic(distances, knn, sources=idx)
    thr = enclosing_radius(geo.distances) if threshold is None else threshold
    pd = vietoris_rips_pd(geo.distances, max_dim, field_char, thr)
    return pd, prominence(pd, clip=thr), idx
