"""Synthetic bundles over the circle with analytic base maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data_model import Dataset, euclidean_distances, seeded_rng

MIN_POINTS = 50


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in GENERATORS:
            raise ValueError(f"unknown generator {self.name!r}; choose from {sorted(GENERATORS)}")
        if self.n < MIN_POINTS:
            raise ValueError(f"generators need n >= {MIN_POINTS}")

    def build(self) -> Dataset:
        return GENERATORS[self.name](self.n, self.seed, **self.params)


def _check(n: int):
    if n < MIN_POINTS:
        raise ValueError(f"generators need n >= {MIN_POINTS}")


def _circle(u: np.ndarray) -> np.ndarray:
    return np.column_stack([np.cos(u), np.sin(u)])


def _finish(points: np.ndarray, u: np.ndarray, labels: np.ndarray) -> Dataset:
    return Dataset(euclidean_distances(points), _circle(u), points=points, labels=labels)


def gen_cylinder(n: int, seed: int = 0, height: float = 0.15) -> Dataset:
    """Unit-radius cylinder of the given total height."""
    _check(n)
    rng = seeded_rng(seed, "cylinder")
    u = rng.uniform(0.0, 2 * np.pi, n)
    z = rng.uniform(-height / 2, height / 2, n)
    pts = np.column_stack([np.cos(u), np.sin(u), z])
    return _finish(pts, u, np.column_stack([u, z]))


def flat_torus_points(u, v) -> np.ndarray:
    return np.column_stack([np.cos(u), np.sin(u), np.cos(v), np.sin(v)]) / np.sqrt(2.0)


def gen_flat_torus(n: int, seed: int = 0) -> Dataset:
    _check(n)
    rng = seeded_rng(seed, "flat_torus")
    u = rng.uniform(0.0, 2 * np.pi, n)
    v = rng.uniform(0.0, 2 * np.pi, n)
    return _finish(flat_torus_points(u, v), u, np.column_stack([u, v]))


def mobius_points(u, v) -> np.ndarray:
    return np.column_stack([np.cos(u), np.sin(u), v * np.cos(u / 2), v * np.sin(u / 2)])


def gen_mobius(n: int, seed: int = 0, half_width: float = 2 * np.pi / 3) -> Dataset:
    """Moebius band in R^4; height-to-circumference ratio 2/3 by default."""
    _check(n)
    rng = seeded_rng(seed, "mobius")
    u = rng.uniform(0.0, 2 * np.pi, n)
    v = rng.uniform(-half_width, half_width, n)
    return _finish(mobius_points(u, v), u, np.column_stack([u, v]))


def klein_points(u, v, R: float = 1.0, r_tube: float = 0.4) -> np.ndarray:
    ring = R + r_tube * np.cos(v)
    return np.column_stack([ring * np.cos(u), ring * np.sin(u),
                            r_tube * np.sin(v) * np.cos(u / 2),
                            r_tube * np.sin(v) * np.sin(u / 2)])


def gen_klein(n: int, seed: int = 0, R: float = 1.0, r_tube: float = 0.4) -> Dataset:
    _check(n)
    if not 0 < r_tube < R:
        raise ValueError("need 0 < r_tube < R for an embedded Klein bottle")
    rng = seeded_rng(seed, "klein")
    u = rng.uniform(0.0, 2 * np.pi, n)
    v = rng.uniform(0.0, 2 * np.pi, n)
    return _finish(klein_points(u, v, R, r_tube), u, np.column_stack([u, v]))


GENERATORS = {
    "cylinder": gen_cylinder,
    "flat_torus": gen_flat_torus,
    "mobius": gen_mobius,
    "klein": gen_klein,
}

# local MDS dimension that exposes the fiber of each generator
DEFAULT_LOCAL_DIM = {"cylinder": 2, "flat_torus": 3, "mobius": 2, "klein": 3}
