"""Orthogonal-group and Stiefel-manifold primitives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import Frame

SINGULAR_WARN = 1e-12


class DegenerateFrameError(ValueError):
    pass


def _svd(m: np.ndarray, full_matrices: bool = False):
    """SVD with a pinned sign convention.

    Each left singular vector is flipped so that its largest-magnitude entry
    (first one on ties) is positive; the matching right vector flips with it.
    """
    u, s, vt = np.linalg.svd(m, full_matrices=full_matrices)
    k = min(u.shape[1], vt.shape[0])
    idx = np.argmax(np.abs(u[:, :k]), axis=0)
    signs = np.sign(u[idx, np.arange(k)])
    signs[signs == 0] = 1.0
    u[:, :k] *= signs
    vt[:k] *= signs[:, None]
    return u, s, vt


@dataclass(frozen=True)
class OrthogonalMatrix(Frame):
    """Square frame. ``degenerate`` marks a fit whose solution is not unique."""

    degenerate: bool = False

    def __post_init__(self):
        super().__post_init__()
        if self.rows != self.cols:
            raise ValueError("orthogonal matrix must be square")

    @property
    def size(self) -> int:
        return self.rows

    @property
    def det_sign(self) -> int:
        if self.size == 0:
            return 1
        return 1 if np.linalg.det(self.entries) > 0 else -1


def polar_factor(m: np.ndarray) -> np.ndarray:
    u, _, vt = _svd(m)
    return u @ vt


def special_polar_factor(m: np.ndarray) -> np.ndarray:
    """Frobenius-nearest rotation (determinant +1) to a square matrix."""
    u, _, vt = _svd(m)
    if np.linalg.det(u @ vt) < 0:
        u[:, -1] *= -1.0
    return u @ vt


def procrustes_fit(source, target) -> OrthogonalMatrix:
    """Orthogonal Q minimizing sum ||Q source_x - target_x||^2 over O(r).

    ``source`` and ``target`` are sequences of r-vectors (or n x r arrays).
    Reflections are allowed.
    """
    src = np.atleast_2d(np.asarray(source, dtype=float))
    tgt = np.atleast_2d(np.asarray(target, dtype=float))
    if src.shape != tgt.shape or src.shape[0] == 0:
        raise ValueError("procrustes_fit needs equal-length, non-empty inputs")
    cross = tgt.T @ src
    u, s, vt = _svd(cross)
    q = u @ vt
    degenerate = bool(s.size and s.min() < SINGULAR_WARN)
    return OrthogonalMatrix(q, degenerate=degenerate)


def nearest_frame(m: np.ndarray, special: bool = False) -> Frame:
    """Polar projection of a rows x cols matrix onto V(cols, rows).

    With ``special`` (square input only) the result is the nearest rotation.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ValueError("nearest_frame needs a tall (rows >= cols) matrix")
    if not np.any(m):
        raise DegenerateFrameError("degenerate frame projection")
    if special:
        if m.shape[0] != m.shape[1]:
            raise ValueError("special projection needs a square matrix")
        return Frame(special_polar_factor(m))
    return Frame(polar_factor(m))


def random_frame(rows: int, cols: int, special: bool, rng: np.random.Generator) -> Frame:
    """Haar-distributed frame via QR of a Gaussian matrix."""
    if rows < cols:
        raise ValueError("random_frame needs rows >= cols")
    g = rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    # sign fix makes the QR factor Haar distributed
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    q = q * d
    if special and rows == cols and np.linalg.det(q) < 0:
        q[:, 0] *= -1.0
    return Frame(q)


def rotation2(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])
