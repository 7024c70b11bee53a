"""Embedding diagnostics: self-intersection ratio, per-chart distortion, distance noise."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class DiagnosticsError(ValueError):
    pass


@dataclass
class DiagnosticsReport:
    kappa: np.ndarray
    worst_case_distortion: np.ndarray   # per chart
    sigma_distortion: np.ndarray        # per chart
    chart_sizes: np.ndarray

    def averages(self) -> dict:
        w = self.chart_sizes.astype(float)
        if self.worst_case_distortion.size == 0:
            return {"worst_case": np.nan, "sigma": np.nan,
                    "worst_case_weighted": np.nan, "sigma_weighted": np.nan}
        return {
            "worst_case": float(self.worst_case_distortion.mean()),
            "sigma": float(self.sigma_distortion.mean()),
            "worst_case_weighted": float(np.average(self.worst_case_distortion, weights=w)),
            "sigma_weighted": float(np.average(self.sigma_distortion, weights=w)),
        }

    def to_json(self) -> dict:
        out = {
            "kappa": self.kappa.tolist(),
            "kappa_min": float(self.kappa.min()) if self.kappa.size else None,
            "worst_case_distortion": self.worst_case_distortion.tolist(),
            "sigma_distortion": self.sigma_distortion.tolist(),
            "chart_sizes": self.chart_sizes.tolist(),
        }
        out.update({f"average_{k}": v for k, v in self.averages().items()})
        return out


def kappa(d_x: np.ndarray, d_y: np.ndarray) -> np.ndarray:
    """Per point, min over y != x of d_Y / d_X (pairs with d_X = 0 skipped)."""
    d_x = np.asarray(d_x, dtype=float)
    d_y = np.asarray(d_y, dtype=float)
    if d_x.shape != d_y.shape:
        raise DiagnosticsError("metric shapes differ")
    valid = d_x > 0
    np.fill_diagonal(valid, False)
    bad = ~valid.any(axis=1)
    if bad.any():
        raise DiagnosticsError(f"duplicate-only point at row {int(np.argmax(bad))}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(valid, d_y / np.where(valid, d_x, 1.0), np.inf)
    return ratio.min(axis=1)


def _chart_distortion(d_x: np.ndarray, d_y: np.ndarray):
    iu = np.triu_indices(d_x.shape[0], 1)
    dx, dy = d_x[iu], d_y[iu]
    keep = dx > 0
    dx, dy = dx[keep], dy[keep]
    if dx.size == 0:
        return None
    rho = dy / dx
    if np.any(rho == 0):
        worst = np.inf
    else:
        worst = float(rho.max() * (1.0 / rho).max())
    mean = rho.mean()
    sigma = float(np.mean((rho / mean - 1.0) ** 2)) if mean > 0 else np.inf
    return worst, sigma


def chart_distortions(membership, d_x: np.ndarray, d_y: np.ndarray):
    """Bilipschitz product and variance-of-ratio distortion per chart.
    Returns (worst_case, sigma, sizes) for charts with at least two points."""
    worst, sigma, sizes = [], [], []
    for i, members in enumerate(membership):
        members = np.asarray(members)
        if members.size < 2:
            warnings.warn(f"chart {i} has a single point; skipped")
            continue
        res = _chart_distortion(d_x[np.ix_(members, members)], d_y[np.ix_(members, members)])
        if res is None:
            warnings.warn(f"chart {i} has only duplicate points; skipped")
            continue
        worst.append(res[0])
        sigma.append(res[1])
        sizes.append(members.size)
    return np.array(worst), np.array(sigma), np.array(sizes, dtype=int)


def diagnose(d_x: np.ndarray, d_y: np.ndarray, membership) -> DiagnosticsReport:
    worst, sigma, sizes = chart_distortions(membership, d_x, d_y)
    return DiagnosticsReport(kappa(d_x, d_y), worst, sigma, sizes)


def median_distance(distances: np.ndarray) -> float:
    """The noise unit: median over unordered point pairs."""
    iu = np.triu_indices(distances.shape[0], 1)
    return float(np.median(distances[iu]))


def inject_distance_noise(distances: np.ndarray, magnitude: float,
                          rng: np.random.Generator) -> np.ndarray:
    """Add one U[-magnitude, magnitude] draw per unordered pair, clamped at 0."""
    if magnitude < 0:
        raise DiagnosticsError("noise magnitude must be non-negative")
    d = np.array(distances, dtype=float)
    if magnitude == 0:
        return d
    n = d.shape[0]
    iu = np.triu_indices(n, 1)
    noise = rng.uniform(-magnitude, magnitude, size=iu[0].size)
    vals = np.maximum(d[iu] + noise, 0.0)
    out = np.zeros_like(d)
    out[iu] = vals
    out = out + out.T
    np.fill_diagonal(out, np.diag(d))
    return out
