"""Blend per-chart fiber offsets into the final embedding; cut a circular base."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray                  # n x D
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("embedding has non-finite rows")

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


def pad_columns(base: np.ndarray, D: int) -> np.ndarray:
    base = np.asarray(base, dtype=float)
    if base.ndim == 1:
        base = base[:, None]
    if base.shape[1] > D:
        raise ValueError(f"base has {base.shape[1]} columns, more than D = {D}")
    return np.hstack([base, np.zeros((base.shape[0], D - base.shape[1]))])


def assemble(charts, partition, frames, normal_frames, base: np.ndarray, tau: float,
             fiber_scale: float, provenance: dict = None) -> Embedding:
    """pi(x) + fiber_scale * tau * sum_i rho_i(x) alpha_i Phi_i fbar_i(x)."""
    D = normal_frames[0].rows
    pi = pad_columns(base, D)
    offset = np.zeros_like(pi)
    weights = partition.weights.tocsc()
    for c, phi, alpha in zip(charts, frames, normal_frames):
        rho = weights[:, c.index].toarray().ravel()[c.members]
        lift = c.normalized_fiber @ phi.entries.T @ alpha.entries.T     # |X_i| x D
        offset[c.members] += rho[:, None] * lift
    covered = np.asarray(partition.weights.sum(axis=1)).ravel()
    assert np.all(covered > 0), "a point has no chart"
    return Embedding(pi + fiber_scale * tau * offset, dict(provenance or {}))


def cut_unfold(base_angles: np.ndarray, cut_point: float, band: float = 0.02):
    """Cut a circle-valued base (angles in turns) at ``cut_point``.

    Returns the interval coordinate (n x 1, values in [0, 1)) and a mask of
    points within ``band`` of the cut on either side.
    """
    theta = np.mod(np.asarray(base_angles, dtype=float).ravel(), 1.0)
    shifted = np.mod(theta - cut_point, 1.0)
    shifted[shifted >= 1.0] = 0.0
    near = np.minimum(shifted, 1.0 - shifted) < band
    return shifted[:, None], near


def circle_to_turns(base: np.ndarray) -> np.ndarray:
    """Angle of a planar circular base map, in turns in [0, 1)."""
    base = np.asarray(base, dtype=float)
    return np.mod(np.arctan2(base[:, 1], base[:, 0]) / (2 * np.pi), 1.0)
