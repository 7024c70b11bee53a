"""First Stiefel-Whitney obstruction of a discrete cocycle over the filtered nerve."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .bundle import DiscreteCocycle
from .cover import Nerve
from .data_model import PersistenceDiagram


class ObstructionError(ValueError):
    pass


# ---------------------------------------------------------------- filtration


@dataclass(frozen=True)
class NerveFiltration:
    """Vertices at 0, edges at 1 - s_ij / n, triangles once all their edges exist."""

    nerve: Nerve
    n_points: int
    edge_births: dict                   # (i, j) -> birth
    triangles: tuple                    # ((i, j, k), birth), i < j < k, sorted by birth

    @classmethod
    def build(cls, nerve: Nerve, n_points: int) -> "NerveFiltration":
        eb = {(i, j): min(1.0, 1.0 - s / n_points) for i, j, s in nerve.edges}
        adj = [set() for _ in range(nerve.n_vertices)]
        for i, j in eb:
            adj[i].add(j)
            adj[j].add(i)
        tris = []
        for i, j in eb:
            for k in adj[i] & adj[j]:
                if k > j:
                    b = max(eb[(i, j)], eb[(i, k)], eb[(j, k)])
                    tris.append(((i, j, k), b))
        tris.sort(key=lambda t: (t[1], t[0]))
        return cls(nerve, n_points, eb, tuple(tris))

    def simplices(self) -> list:
        """All simplices as (birth, dim, vertices) in filtration order."""
        out = [(0.0, 0, (v,)) for v in range(self.nerve.n_vertices)]
        out += [(b, 1, e) for e, b in self.edge_births.items()]
        out += [(b, 2, t) for t, b in self.triangles]
        out.sort()
        return out


# ---------------------------------------------------------------- death


def cocycle_death(filt: NerveFiltration, omega: DiscreteCocycle, epsilon: float = 2.0) -> float:
    """Filtration value at which the first triangle violates
    ||Omega_ij Omega_jk - Omega_ik||_op < epsilon; 1 if none does."""
    for (i, j, k), birth in filt.triangles:
        defect = omega.get(i, j) @ omega.get(j, k) - omega.get(i, k)
        if np.linalg.norm(defect, 2) >= epsilon:
            return float(birth)
    return 1.0


# ---------------------------------------------------------------- persistence


@dataclass
class _Reduction:
    order: list                         # simplices in filtration order
    pairs: list                         # (birth_pos, death_pos or None) for edge creators
    cycles: dict                        # edge creator pos -> set of edge positions


def _reduce(filt: NerveFiltration) -> _Reduction:
    """Z/2 column reduction of the boundary matrix, tracking edge cycles."""
    order = filt.simplices()
    pos = {s[2]: p for p, s in enumerate(order)}
    low_owner = {}                      # pivot row -> column
    reduced = {}
    cycles = {}
    for p, (_, dim, verts) in enumerate(order):
        if dim == 0:
            continue
        col = {pos[f] for f in combinations(verts, dim)}
        v = {p}
        while col:
            low = max(col)
            other = low_owner.get(low)
            if other is None:
                break
            col ^= reduced[other]
            if dim == 1:
                v ^= cycles.get(other, {other})
        if col:
            low_owner[max(col)] = p
            reduced[p] = col
        if dim == 1:
            cycles[p] = v
    pairs = []
    killed = {low: owner for low, owner in low_owner.items() if order[low][1] == 1}
    for p, (_, dim, _) in enumerate(order):
        if dim == 1 and p not in reduced:
            pairs.append((p, killed.get(p)))
    return _Reduction(order, pairs, {p: cycles[p] for p, _ in pairs})


def _diagram(red: _Reduction):
    classes, reps = [], []
    for b, d in red.pairs:
        birth = red.order[b][0]
        death = math.inf if d is None else red.order[d][0]
        if death > birth:
            classes.append((1, birth, death))
            reps.append((birth, death, red.cycles[b]))
    return classes, reps


def nerve_persistence(filt: NerveFiltration) -> PersistenceDiagram:
    classes, _ = _diagram(_reduce(filt))
    return PersistenceDiagram(2, tuple(classes))


# ---------------------------------------------------------------- w1


def solve_z2(rows: list, rhs: list, n_vars: int):
    """Solve A x = b over Z/2; rows are int bitmasks.  Returns x or None."""
    pivots = {}                         # pivot bit -> (row, rhs)
    for row, b in zip(rows, rhs):
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = (row, b)
                break
            prow, pb = pivots[top]
            row ^= prow
            b ^= pb
        else:
            if b:
                return None
    x = 0
    for top in sorted(pivots):
        row, b = pivots[top]
        rest = row & ~(1 << top)
        val = b ^ (bin(rest & x).count("1") & 1)
        if val:
            x |= 1 << top
    return [(x >> i) & 1 for i in range(n_vars)]


def edge_cochain(omega: DiscreteCocycle, edges) -> dict:
    return {e: int(omega.det_sign(*e) < 0) for e in edges}


def first_sw_class(filt: NerveFiltration, omega: DiscreteCocycle, death: float):
    """Triviality of the determinant cochain on the nerve strictly below
    ``death``.  Returns (w1_trivial, w1_support) where the support lists the
    (birth, death) of persistent classes pairing to 1 with the cochain."""
    edges = [e for e, b in filt.edge_births.items() if b < death]
    w = edge_cochain(omega, edges)
    for (i, j, k), b in filt.triangles:
        if b >= death:
            break
        if (w[(i, j)] + w[(j, k)] + w[(i, k)]) % 2:
            raise ObstructionError("inconsistent cocycle; decrease death or increase overlaps")
    rows = [(1 << i) | (1 << j) for i, j in edges]
    sol = solve_z2(rows, [w[e] for e in edges], filt.nerve.n_vertices)
    trivial = sol is not None
    support = []
    if not trivial:
        red = _reduce(filt)
        _, reps = _diagram(red)
        for birth, dth, cyc in reps:
            if birth < death <= dth:
                value = sum(w.get(red.order[p][2], 0) for p in cyc) % 2
                if value:
                    support.append((birth, dth))
    return trivial, support


def holonomy(omega: DiscreteCocycle, cycle) -> int:
    """Product of det signs along a closed vertex sequence."""
    sign = 1
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        sign *= omega.det_sign(a, b)
    return sign


def circle_cycle(center_points: np.ndarray) -> list:
    """Centers of a circular base ordered by angle."""
    c = np.asarray(center_points, dtype=float)
    ang = np.arctan2(c[:, 1], c[:, 0])
    return [int(i) for i in np.argsort(ang, kind="stable")]


# ---------------------------------------------------------------- report


@dataclass
class ObstructionReport:
    death: float
    nerve_pd: PersistenceDiagram
    w1_trivial: bool
    w1_support: list = field(default_factory=list)

    @property
    def span(self) -> list:
        return [(b, d) for q, b, d in self.nerve_pd.classes if q == 1 and b < self.death]

    def to_json(self) -> dict:
        def item(b, d):
            return {"birth": b, "death": min(d, 1.0), "infinite": not math.isfinite(d)}
        return {
            "death": self.death,
            "nerve_pd": [item(b, d) for _, b, d in self.nerve_pd.classes],
            "span": [item(b, d) for b, d in self.span],
            "w1_trivial": self.w1_trivial,
            "w1_support": [item(b, d) for b, d in self.w1_support],
        }


def obstruction_report(nerve: Nerve, omega: DiscreteCocycle, n_points: int,
                       epsilon: float = 2.0) -> ObstructionReport:
    filt = NerveFiltration.build(nerve, n_points)
    death = cocycle_death(filt, omega, epsilon)
    pd = nerve_persistence(filt)
    trivial, support = first_sw_class(filt, omega, death)
    return ObstructionReport(death, pd, trivial, support)
