"""Metric-ball cover of the base image, bump partition of unity, weighted nerve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

COVER_FACTOR = 3.0


class CoverError(ValueError):
    pass


@dataclass(frozen=True)
class Cover:
    centers: np.ndarray          # indices into B
    center_points: np.ndarray    # k x D
    cover_radius: float
    membership: tuple            # k sorted index arrays

    @property
    def k(self) -> int:
        return len(self.membership)

    @property
    def ball_radius(self) -> float:
        return COVER_FACTOR * self.cover_radius

    def to_json(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "center_points": self.center_points.tolist(),
            "cover_radius": self.cover_radius,
            "membership": [m.tolist() for m in self.membership],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Cover":
        return cls(
            centers=np.asarray(obj["centers"], dtype=int),
            center_points=np.asarray(obj["center_points"], dtype=float),
            cover_radius=float(obj["cover_radius"]),
            membership=tuple(np.asarray(m, dtype=int) for m in obj["membership"]),
        )


@dataclass(frozen=True)
class PartitionOfUnity:
    weights: sparse.csr_matrix   # n x k


@dataclass(frozen=True)
class Nerve:
    n_vertices: int
    edges: tuple                 # ((i, j, s_ij), ...) with i < j

    @property
    def total_weight(self) -> int:
        return sum(s for _, _, s in self.edges)

    def weight(self, i: int, j: int) -> int:
        a, b = min(i, j), max(i, j)
        for x, y, s in self.edges:
            if (x, y) == (a, b):
                return s
        return 0

    def adjacency(self) -> np.ndarray:
        w = np.zeros((self.n_vertices, self.n_vertices))
        for i, j, s in self.edges:
            w[i, j] = w[j, i] = s
        return w

    def components(self) -> list:
        n_comp, labels = sparse.csgraph.connected_components(
            sparse.csr_matrix(self.adjacency()), directed=False)
        return [np.flatnonzero(labels == c) for c in range(n_comp)]

    def to_json(self) -> dict:
        return {"n_vertices": self.n_vertices,
                "edges": [{"i": i, "j": j, "weight": s} for i, j, s in self.edges]}

    @classmethod
    def from_json(cls, obj: dict) -> "Nerve":
        edges = tuple(sorted((int(e["i"]), int(e["j"]), int(e["weight"]))
                             for e in obj["edges"]))
        return cls(int(obj["n_vertices"]), edges)


def greedy_k_center(points: np.ndarray, k: int, start: int = 0):
    """Farthest-first traversal. Returns (center indices, covering radius)."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if k > n:
        raise CoverError(f"k = {k} exceeds the number of points {n}")
    centers = [start]
    nearest = np.linalg.norm(points - points[start], axis=1)
    for _ in range(k - 1):
        nxt = int(np.argmax(nearest))
        centers.append(nxt)
        np.minimum(nearest, np.linalg.norm(points - points[nxt], axis=1), out=nearest)
    return np.array(centers), float(nearest.max())


def greedy_k_center_metric(distances: np.ndarray, k: int, start: int = 0):
    """Farthest-first traversal on a precomputed distance matrix."""
    n = distances.shape[0]
    if k > n:
        raise CoverError(f"k = {k} exceeds the number of points {n}")
    centers = [start]
    nearest = distances[start].copy()
    for _ in range(k - 1):
        nxt = int(np.argmax(nearest))
        centers.append(nxt)
        np.minimum(nearest, distances[nxt], out=nearest)
    return np.array(centers), float(nearest.max())


def build_cover(base: np.ndarray, k: int, start: int = 0) -> Cover:
    base = np.asarray(base, dtype=float)
    if base.ndim == 1:
        base = base[:, None]
    centers, radius = greedy_k_center(base, k, start)
    if radius == 0.0 and k < base.shape[0]:
        raise CoverError("degenerate cover: all points coincide with the centers")
    ball = COVER_FACTOR * radius
    cpts = base[centers]
    dist = np.linalg.norm(base[:, None, :] - cpts[None, :, :], axis=2)   # n x k
    if radius == 0.0:
        # k == n: each point is its own center
        member = dist <= 0.0
    else:
        member = dist < ball
    membership = tuple(np.flatnonzero(member[:, i]) for i in range(k))
    if not member.any(axis=1).all():
        raise CoverError("cover misses some points")
    if any(m.size == 0 for m in membership):
        raise CoverError("cover has an empty set")
    return Cover(centers=centers, center_points=cpts, cover_radius=radius,
                 membership=membership)


def bump(dist: np.ndarray, radius: float) -> np.ndarray:
    """exp(-1 / (1 - (dist/radius)^2)) inside the ball, 0 outside."""
    out = np.zeros_like(dist, dtype=float)
    inside = dist < radius
    t = (dist[inside] / radius) ** 2
    out[inside] = np.exp(-1.0 / (1.0 - t))
    return out


def partition_of_unity(cover: Cover, base: np.ndarray) -> PartitionOfUnity:
    base = np.asarray(base, dtype=float)
    if base.ndim == 1:
        base = base[:, None]
    n = base.shape[0]
    rows, cols, vals = [], [], []
    for i, members in enumerate(cover.membership):
        d = np.linalg.norm(base[members] - cover.center_points[i], axis=1)
        if cover.cover_radius == 0.0:
            p = np.full(members.size, np.exp(-1.0))
        else:
            p = bump(d, cover.ball_radius)
        rows.append(members)
        cols.append(np.full(members.size, i))
        vals.append(p)
    raw = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, cover.k))
    total = np.asarray(raw.sum(axis=1)).ravel()
    assert np.all(total > 0), "a point has no covering set"
    weights = sparse.diags(1.0 / total) @ raw
    return PartitionOfUnity(weights=sparse.csr_matrix(weights))


def build_nerve(cover: Cover) -> Nerve:
    sets = [set(m.tolist()) for m in cover.membership]
    edges = []
    for i in range(cover.k):
        for j in range(i + 1, cover.k):
            s = len(sets[i] & sets[j])
            if s > 0:
                edges.append((i, j, s))
    return Nerve(cover.k, tuple(edges))
