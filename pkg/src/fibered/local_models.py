"""Per-chart local models: classical MDS, tangent/normal frames of the base,
and fiber coordinates as the kernel of the chart-to-base regression."""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data_model import Frame
from .manifold_ops import _svd

KERNEL_RTOL = 1e-8


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class LocalChart:
    index: int
    members: np.ndarray                   # point indices X_i
    local_coords: np.ndarray              # |X_i| x d, mean-centered
    tangent_frame: Frame                  # Psi_i in V(e, D)
    normal_frame: Frame                   # alpha_i in V(D - e, D)
    regression: Optional[np.ndarray] = None      # m_i, e x d
    kernel_frame: Optional[Frame] = None          # eta_i in V(r, d)
    fiber_coords: Optional[np.ndarray] = None     # f_i, |X_i| x r
    normalized_fiber: Optional[np.ndarray] = None
    kernel_residual: float = 0.0          # max |m_i eta_i|
    kernel_warning: bool = False

    def replace(self, **kw) -> "LocalChart":
        return dataclasses.replace(self, **kw)


def classical_mds(sub_distances: np.ndarray, d: int) -> np.ndarray:
    """Top-d classical scaling of a distance matrix, mean-centered output."""
    dist = np.asarray(sub_distances, dtype=float)
    m = dist.shape[0]
    if d > m:
        raise ChartError(f"MDS dimension {d} exceeds the {m} points of the chart")
    j = np.eye(m) - 1.0 / m
    gram = -0.5 * j @ (dist**2) @ j
    gram = 0.5 * (gram + gram.T)
    vals, vecs = np.linalg.eigh(gram)
    order = np.argsort(vals)[::-1][:d]
    vals, vecs = vals[order], vecs[:, order]
    # pin eigenvector signs: largest-magnitude entry positive
    piv = np.argmax(np.abs(vecs), axis=0)
    sgn = np.sign(vecs[piv, np.arange(vecs.shape[1])])
    sgn[sgn == 0] = 1.0
    vecs = vecs * sgn
    coords = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return coords - coords.mean(axis=0)


def tangent_and_normal_frames(points: np.ndarray, e: int):
    """PCA on one cover set of the base: (Psi, alpha) spanning R^D together."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] < 2:
        raise ChartError("degenerate chart: fewer than two points")
    dim = pts.shape[1]
    if e > dim:
        raise ChartError(f"base dimension e = {e} exceeds the ambient dimension {dim}")
    centered = pts - pts.mean(axis=0)
    if not np.any(np.abs(centered) > 0):
        raise ChartError("degenerate chart: zero covariance")
    # full SVD so the trailing right-singular vectors complete the basis
    _, _, vt = _svd(centered, full_matrices=True)
    basis = vt.T
    if basis.shape[1] < dim:
        q, _ = np.linalg.qr(np.hstack([basis, np.eye(dim)]))
        basis = q[:, :dim]
    return Frame(basis[:, :e]), Frame(basis[:, e:])


def pad_normal_frame(tangent: Frame, normal: Frame, D: int):
    """Embed frames from R^D0 into R^D (D >= D0) by appending coordinate axes
    to the normal part."""
    d0 = tangent.rows
    if D < d0:
        raise ChartError(f"target dimension {D} is below the base dimension {d0}")
    if D == d0:
        return tangent, normal
    psi = np.vstack([tangent.entries, np.zeros((D - d0, tangent.cols))])
    extra = np.vstack([np.zeros((d0, D - d0)), np.eye(D - d0)])
    alpha = np.hstack([np.vstack([normal.entries, np.zeros((D - d0, normal.cols))]), extra])
    return Frame(psi), Frame(alpha)


def fiber_coordinates(local_coords: np.ndarray, base_points: np.ndarray,
                      center: np.ndarray, tangent: Frame, r: int):
    """Regress base tangent coordinates on local coordinates and keep the
    r least-explained directions.  Returns (m, eta, f, residual, warned)."""
    ell = np.asarray(local_coords, dtype=float)
    d = ell.shape[1]
    if r > d:
        raise ChartError(f"fiber rank {r} exceeds local dimension {d}")
    if r <= 0:
        raise ChartError("fiber rank zero")
    t = (np.asarray(base_points, dtype=float) - center) @ tangent.entries   # |X| x e
    # minimal-norm least squares: t ~ ell @ m.T
    m = (np.linalg.pinv(ell) @ t).T                                          # e x d
    _, s, vt = _svd(m, full_matrices=True)
    eta = vt[d - r:].T                                                       # d x r
    piv = np.argmax(np.abs(eta), axis=0)
    sgn = np.sign(eta[piv, np.arange(r)])
    sgn[sgn == 0] = 1.0
    eta = eta * sgn
    residual = float(np.abs(m @ eta).max(initial=0.0))
    scale = np.linalg.norm(m, 2) if m.size else 0.0
    warned = residual > KERNEL_RTOL * max(scale, np.finfo(float).tiny)
    return m, Frame(eta), ell @ eta, residual, bool(warned)


def build_charts(distances: np.ndarray, base: np.ndarray, cover, e: int, d: int,
                 r: int) -> list:
    """Local MDS, base frames and raw fiber coordinates for every cover set."""
    if r <= 0:
        raise ChartError("fiber rank zero")
    charts = []
    n_warn = 0
    for i, members in enumerate(cover.membership):
        sub = distances[np.ix_(members, members)]
        if members.size < d:
            raise ChartError(f"chart {i} has {members.size} points, fewer than d = {d}")
        ell = classical_mds(sub, d)
        psi, alpha = tangent_and_normal_frames(base[members], e)
        m, eta, f, res, warned = fiber_coordinates(
            ell, base[members], cover.center_points[i], psi, r)
        n_warn += warned
        charts.append(LocalChart(i, members, ell, psi, alpha, m, eta, f,
                                 kernel_residual=res, kernel_warning=warned))
    if n_warn:
        warnings.warn(f"fiber not orthogonal to base in {n_warn} chart(s)")
    return charts


def normalize_fibers(charts: list, mode: str = "global"):
    """Scale fiber coordinates into the unit ball.  Returns (charts, scales)."""
    maxima = np.array([np.linalg.norm(c.fiber_coords, axis=1).max(initial=0.0)
                       for c in charts])
    if not np.any(maxima > 0):
        raise ChartError("flat fiber")
    if mode == "global":
        scales = np.full(len(charts), maxima.max())
    elif mode == "per_chart":
        scales = np.where(maxima > 0, maxima, 1.0)
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    out = [c.replace(normalized_fiber=c.fiber_coords / s) for c, s in zip(charts, scales)]
    return out, scales


def explained_variance(points: np.ndarray) -> np.ndarray:
    """PCA explained-variance ratios, a helper for picking e and d by hand."""
    pts = np.asarray(points, dtype=float)
    s = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    var = s**2
    return var / var.sum() if var.sum() > 0 else var
