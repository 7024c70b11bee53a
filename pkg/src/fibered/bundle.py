"""Bundle estimation and alignment: reach, transition cocycles, sign
synchronization, stochastic frame alignment and target-dimension choice."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cover import Nerve
from .data_model import Frame
from .manifold_ops import (DegenerateFrameError, OrthogonalMatrix, nearest_frame,
                           polar_factor, procrustes_fit, random_frame)

SKIP_TOL = 1e-14
TRACE_EVERY = 25
MAX_DEGENERATE = 10
POWER_STEPS = 1000
POWER_TOL = 1e-10
RANK_TOL = 1e-12


class BundleError(ValueError):
    pass


# ---------------------------------------------------------------- cocycles


@dataclass(frozen=True)
class DiscreteCocycle:
    """One orthogonal matrix per nerve edge, stored for i < j."""

    rank: int
    matrices: dict                      # (i, j) -> OrthogonalMatrix, i < j
    n_degenerate: int = 0

    def __post_init__(self):
        for (i, j), m in self.matrices.items():
            if not i < j:
                raise ValueError("cocycle keys must satisfy i < j")
            if m.size != self.rank:
                raise ValueError(f"edge ({i}, {j}) matrix has size {m.size}, not {self.rank}")

    @property
    def edges(self) -> list:
        return sorted(self.matrices)

    def get(self, i: int, j: int) -> np.ndarray:
        if i < j:
            return self.matrices[(i, j)].entries
        return self.matrices[(j, i)].entries.T

    def det_sign(self, i: int, j: int) -> int:
        return self.matrices[(min(i, j), max(i, j))].det_sign

    def to_json(self) -> list:
        return [{"i": i, "j": j, "matrix": self.matrices[(i, j)].entries.ravel().tolist(),
                 "det_sign": self.matrices[(i, j)].det_sign}
                for i, j in self.edges]

    @classmethod
    def from_json(cls, items: list) -> "DiscreteCocycle":
        mats = {}
        rank = None
        for it in items:
            flat = np.asarray(it["matrix"], dtype=float)
            size = int(round(np.sqrt(flat.size)))
            rank = size if rank is None else rank
            i, j = int(it["i"]), int(it["j"])
            m = flat.reshape(size, size)
            if i > j:
                i, j, m = j, i, m.T
            mats[(i, j)] = OrthogonalMatrix(m)
        return cls(rank or 0, mats)

    @classmethod
    def from_arrays(cls, rank: int, arrays: dict) -> "DiscreteCocycle":
        mats = {}
        for (i, j), m in arrays.items():
            m = np.asarray(m, dtype=float)
            if i > j:
                i, j, m = j, i, m.T
            mats[(i, j)] = OrthogonalMatrix(m)
        return cls(rank, mats)


@dataclass(frozen=True)
class SyncSigns:
    vertex_signs: np.ndarray            # lambda_i
    edge_signs: dict                    # (i, j) -> omega_ij


@dataclass
class AlignmentResult:
    frames: list                        # Phi_i as Frame
    objective_trace: list = field(default_factory=list)   # (iteration, value)
    final_objective: float = float("nan")
    initial_objective: float = float("nan")
    degenerate_resamples: int = 0


# ---------------------------------------------------------------- reach


def estimate_reach(center_points: np.ndarray, tangent_frames: list) -> float:
    """Curvature-based reach estimate from cover centers and tangent frames."""
    b = np.asarray(center_points, dtype=float)
    k = b.shape[0]
    if k < 2:
        raise BundleError("reach needs at least two centers")
    best = np.inf
    for i in range(k):
        delta = b - b[i]
        sq = np.einsum("ij,ij->i", delta, delta)
        tang = delta @ tangent_frames[i].entries
        normal_sq = sq - np.einsum("ij,ij->i", tang, tang)
        ok = normal_sq > SKIP_TOL
        ok[i] = False
        if ok.any():
            best = min(best, float(np.min(sq[ok] / (2.0 * np.sqrt(normal_sq[ok])))))
    if not np.isfinite(best):
        raise BundleError("reach undefined (flat or degenerate)")
    return best


# ---------------------------------------------------------------- cocycles


def _overlap(a: np.ndarray, b: np.ndarray):
    common = np.intersect1d(a, b, assume_unique=True)
    return np.searchsorted(a, common), np.searchsorted(b, common)


def data_cocycle(charts: list, nerve: Nerve) -> DiscreteCocycle:
    """Omega_ij: Procrustes fit carrying fbar_j onto fbar_i on the overlap."""
    r = charts[0].normalized_fiber.shape[1]
    omega = {}
    n_deg = 0
    for i, j, _ in nerve.edges:
        ii, jj = _overlap(charts[i].members, charts[j].members)
        assert ii.size > 0, f"nerve edge ({i}, {j}) has an empty overlap"
        fit = procrustes_fit(charts[j].normalized_fiber[jj], charts[i].normalized_fiber[ii])
        n_deg += fit.degenerate
        omega[(i, j)] = fit
    return DiscreteCocycle(r, omega, n_deg)


def normal_cocycle(normal_frames: list, nerve: Nerve) -> DiscreteCocycle:
    """Theta_ij: nearest orthogonal matrix to alpha_i^T alpha_j."""
    theta = {}
    for i, j, _ in nerve.edges:
        cross = normal_frames[i].entries.T @ normal_frames[j].entries
        theta[(i, j)] = OrthogonalMatrix(polar_factor(cross))
    return DiscreteCocycle(normal_frames[0].cols, theta)


def estimate_cocycles(charts: list, nerve: Nerve, normal_frames: list = None):
    """Data cocycle Omega from overlap fiber coordinates and normal-bundle
    cocycle Theta from the normal frames.  Returns (Omega, Theta)."""
    if normal_frames is None:
        normal_frames = [c.normal_frame for c in charts]
    return data_cocycle(charts, nerve), normal_cocycle(normal_frames, nerve)


# ---------------------------------------------------------------- sync


def flip_first(sign: int, size: int) -> np.ndarray:
    m = np.eye(size)
    m[0, 0] = sign
    return m


def _power_iteration(a: np.ndarray, v: np.ndarray):
    """Returns (vector, converged)."""
    v = v / np.linalg.norm(v)
    for _ in range(POWER_STEPS):
        nv = a @ v
        norm = np.linalg.norm(nv)
        if norm == 0:
            return v, False
        nv /= norm
        if np.linalg.norm(nv - v) <= POWER_TOL:
            return nv, True
        v = nv
    return v, False


def top_eigenvector(w: np.ndarray) -> np.ndarray:
    """Power iteration from the all-ones vector on a spectrally shifted W.

    The shift by the largest absolute row sum makes the matrix positive
    semidefinite so the iteration targets the largest algebraic eigenvalue.
    All-ones can be orthogonal to the top eigenvector (a single edge with a
    negative sign), so a ramp start is also run and the larger Rayleigh
    quotient wins.  When neither run converges (nearly tied top eigenvalues)
    the dense symmetric eigensolver decides.
    """
    n = w.shape[0]
    shift = np.abs(w).sum(axis=1).max()
    a = w + shift * np.eye(n)
    best, best_q = None, -np.inf
    for start in (np.ones(n), 1.0 + np.arange(n) / n):
        v, ok = _power_iteration(a, start)
        q = float(v @ w @ v)
        if ok and q > best_q + 1e-12 * max(shift, 1.0):
            best, best_q = v, q
    if best is None:
        _, vecs = np.linalg.eigh(w)
        best = vecs[:, -1]
        if best.sum() < 0:
            best = -best
    return best


def synchronize_signs(nerve: Nerve, omega: DiscreteCocycle, theta: DiscreteCocycle):
    """Choose lambda_i so that det(Omega_ij) det(Theta_ij) = lambda_i lambda_j
    on as much edge weight as possible.  Returns (SyncSigns, new Theta)."""
    if len(nerve.components()) > 1:
        raise BundleError("nerve disconnected; synchronization undefined")
    k = nerve.n_vertices
    w = np.zeros((k, k))
    edge_signs = {}
    for i, j, s in nerve.edges:
        om = omega.det_sign(i, j) * theta.det_sign(i, j)
        edge_signs[(i, j)] = om
        w[i, j] = w[j, i] = s * om
    v = top_eigenvector(w)
    lam = np.where(v >= 0, 1, -1)
    size = theta.rank
    new = {}
    for (i, j), m in theta.matrices.items():
        new[(i, j)] = flip_first(lam[i], size) @ m.entries @ flip_first(lam[j], size)
    return SyncSigns(lam, edge_signs), DiscreteCocycle.from_arrays(size, new)


def unsync_frames(frames: list, signs: SyncSigns) -> list:
    """Map frames solving the synchronized problem back to the original Theta."""
    out = []
    for phi, lam in zip(frames, signs.vertex_signs):
        out.append(Frame(flip_first(int(lam), phi.rows) @ phi.entries))
    return out


# ---------------------------------------------------------------- alignment


def objective(nerve: Nerve, omega: DiscreteCocycle, theta: DiscreteCocycle, frames) -> float:
    """sum_ij s_ij ||Phi_i Omega_ij - Theta_ij Phi_j||_F over nerve edges."""
    total = 0.0
    for i, j, s in nerve.edges:
        pi = frames[i].entries if isinstance(frames[i], Frame) else frames[i]
        pj = frames[j].entries if isinstance(frames[j], Frame) else frames[j]
        total += s * np.linalg.norm(pi @ omega.get(i, j) - theta.get(i, j) @ pj)
    return float(total)


def align_fibers(nerve: Nerve, omega: DiscreteCocycle, theta: DiscreteCocycle,
                 r: int, D: int, e: int, n_iter: int, rng: np.random.Generator,
                 special: bool = None) -> AlignmentResult:
    """Stochastic relaxation of Phi_i Omega_ij = Theta_ij Phi_j over the nerve."""
    q = D - e
    if special is None:
        special = (q == r)
    if not nerve.edges:
        raise BundleError("nerve has no edges; nothing to align")
    frames = [random_frame(q, r, special, rng).entries.copy()
              for _ in range(nerve.n_vertices)]
    edges = np.array([(i, j) for i, j, _ in nerve.edges])
    weights = np.array([s for _, _, s in nerve.edges], dtype=float)
    cum = np.cumsum(weights / weights.sum())
    cum[-1] = 1.0
    om = {(i, j): omega.get(i, j) for i, j in map(tuple, edges)}
    th = {(i, j): theta.get(i, j) for i, j in map(tuple, edges)}

    result = AlignmentResult(frames=[])
    init = objective(nerve, omega, theta, frames)
    result.initial_objective = init
    result.objective_trace.append((0, init))
    a = 1.0
    streak = 0
    n = 1
    while n <= n_iter:
        u, flip = rng.random(2)
        i, j = edges[int(np.searchsorted(cum, u, side="right"))]
        if flip < 0.5:
            i, j = j, i
        if i < j:
            o, t = om[(i, j)], th[(i, j)]
        else:
            o, t = om[(j, i)].T, th[(j, i)].T
        try:
            target = nearest_frame(t @ frames[j] @ o.T, special=special).entries
            mix = (1.0 - a) * frames[i] + a * target
            if np.linalg.svd(mix, compute_uv=False).min() < RANK_TOL:
                raise DegenerateFrameError("degenerate frame projection")
            frames[i] = nearest_frame(mix, special=special).entries
        except DegenerateFrameError:
            streak += 1
            result.degenerate_resamples += 1
            if streak >= MAX_DEGENERATE:
                raise BundleError(
                    f"alignment failed: {MAX_DEGENERATE} consecutive degenerate projections")
            continue
        streak = 0
        a = 1.0 - n / n_iter
        if n % TRACE_EVERY == 0 or n == n_iter:
            result.objective_trace.append((n, objective(nerve, omega, theta, frames)))
        n += 1
    result.frames = [Frame(f) for f in frames]
    result.final_objective = result.objective_trace[-1][1]
    return result


def choose_target_dimension(r: int, e: int, w1_trivial: bool, cut_unfold: bool = False) -> int:
    if cut_unfold:
        return r + 1
    if e != 1:
        raise BundleError("automatic D selection needs a circular base (e = 1); set D manually")
    return r + 1 if w1_trivial else r + 2


# ---------------------------------------------------------------- synthetic


def consistent_cocycles(nerve: Nerve, r: int, q: int, rng: np.random.Generator,
                        special: bool = False):
    """Exactly consistent cocycles Omega_ij = R_i R_j^T, Theta_ij = Q_i Q_j^T
    and a solution Phi_i = Q_i P R_i^T.  Returns (Omega, Theta, solution)."""
    rs = [random_frame(r, r, False, rng).entries.copy() for _ in range(nerve.n_vertices)]
    qs = [random_frame(q, q, False, rng).entries.copy() for _ in range(nerve.n_vertices)]
    if special:
        # a common determinant for R_i and Q_i keeps det(Omega) = det(Theta)
        for a, b in zip(rs, qs):
            if np.linalg.det(a) * np.linalg.det(b) < 0:
                b[:, 0] *= -1
    p = random_frame(q, r, special and q == r, rng).entries
    om = {(i, j): rs[i] @ rs[j].T for i, j, _ in nerve.edges}
    th = {(i, j): qs[i] @ qs[j].T for i, j, _ in nerve.edges}
    sol = [Frame(qs[i] @ p @ rs[i].T) for i in range(nerve.n_vertices)]
    return DiscreteCocycle.from_arrays(r, om), DiscreteCocycle.from_arrays(q, th), sol
