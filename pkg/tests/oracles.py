"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np


# ---------------------------------------------------------------- orthogonal fits


def _rot(a, reflect):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, s], [s, -c]]) if reflect else np.array([[c, -s], [s, c]])


def grid_procrustes(source, target, step_deg: float = 1.0, refine: bool = True):
    """Best 2x2 rotation or reflection on a dense angle grid, optionally
    polished by ternary search inside the winning grid cell."""
    src = np.asarray(source, float)
    tgt = np.asarray(target, float)

    def cost(a, reflect):
        return np.sum((src @ _rot(a, reflect).T - tgt) ** 2)

    best = (np.inf, None)
    for reflect in (False, True):
        angles = np.deg2rad(np.arange(0.0, 360.0, step_deg))
        vals = [cost(a, reflect) for a in angles]
        a = angles[int(np.argmin(vals))]
        if refine:
            lo, hi = a - np.deg2rad(step_deg), a + np.deg2rad(step_deg)
            for _ in range(200):
                m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
                if cost(m1, reflect) < cost(m2, reflect):
                    hi = m2
                else:
                    lo = m1
            a = 0.5 * (lo + hi)
        val = cost(a, reflect)
        if val < best[0]:
            best = (val, _rot(a, reflect))
    return best


def grid_nearest_orthogonal(m, step_deg: float = 0.25):
    best = (np.inf, None)
    for deg in np.arange(0.0, 360.0, step_deg):
        a = np.deg2rad(deg)
        c, s = np.cos(a), np.sin(a)
        for q in (np.array([[c, -s], [s, c]]), np.array([[c, s], [s, -c]])):
            val = np.linalg.norm(q - m)
            if val < best[0]:
                best = (val, q)
    return best


# ---------------------------------------------------------------- MDS / PCA


def gram_mds(dist, d):
    """Centered Gram matrix eigendecomposition written out directly."""
    dist = np.asarray(dist, float)
    m = dist.shape[0]
    sq = dist**2
    g = np.empty((m, m))
    rmean = sq.mean(axis=1)
    tmean = sq.mean()
    for i in range(m):
        for j in range(m):
            g[i, j] = -0.5 * (sq[i, j] - rmean[i] - rmean[j] + tmean)
    w, v = np.linalg.eigh(g)
    idx = np.argsort(w)[::-1][:d]
    return v[:, idx] * np.sqrt(np.clip(w[idx], 0, None))


# ---------------------------------------------------------------- k-center


def optimal_k_center(points, k):
    pts = np.asarray(points, float)
    n = pts.shape[0]
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    best = np.inf
    for c in itertools.combinations(range(n), k):
        best = min(best, d[:, list(c)].min(axis=1).max())
    return best


# ---------------------------------------------------------------- linear algebra mod p


def rank_mod_p(mat, p):
    a = np.array(mat, dtype=np.int64) % p
    if a.size == 0:
        return 0
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i, c] % p:
                piv = i
                break
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        r += 1
        if r == rows:
            break
    return r


def _boundary(simplices_q, simplices_qm1, p):
    index = {s: i for i, s in enumerate(simplices_qm1)}
    m = np.zeros((len(simplices_qm1), len(simplices_q)), dtype=np.int64)
    for j, s in enumerate(simplices_q):
        for k in range(len(s)):
            face = s[:k] + s[k + 1:]
            m[index[face], j] = (-1) ** k % p
    return m


def _nullspace_mod_p(mat, p):
    """Basis of the kernel of mat (columns) over Z/p, as columns."""
    a = np.array(mat, dtype=np.int64) % p
    rows, cols = a.shape
    a = a.copy()
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i, c] % p:
                piv = i
                break
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-a[i, f]) % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).T.reshape(cols, len(basis))


def rank_persistence(simplices, values, max_dim, p=2):
    """Persistence diagram from ranks of persistent homology maps.

    ``simplices`` are sorted vertex tuples closed under faces; ``values`` are
    their filtration values.  Returns a sorted list of (dim, birth, death).
    """
    fval = dict(zip(simplices, values))
    crit = sorted(set(values))
    out = []
    for q in range(max_dim + 1):
        def sub(dim, t):
            return sorted(s for s in simplices if len(s) == dim + 1 and fval[s] <= t)

        def pbetti(s, t):
            cq = sub(q, s)
            if not cq:
                return 0
            if q > 0:
                z = _nullspace_mod_p(_boundary(cq, sub(q - 1, s), p), p)
            else:
                z = np.eye(len(cq), dtype=np.int64)
            if z.shape[1] == 0:
                return 0
            cq_t = sub(q, t)
            idx = {x: i for i, x in enumerate(cq_t)}
            zt = np.zeros((len(cq_t), z.shape[1]), dtype=np.int64)
            for i, x in enumerate(cq):
                zt[idx[x]] = z[i]
            higher = sub(q + 1, t)
            b = _boundary(higher, cq_t, p) if higher else np.zeros((len(cq_t), 0), np.int64)
            rb = rank_mod_p(b, p)
            rzb = rank_mod_p(np.hstack([zt, b]), p)
            return z.shape[1] - (rb + z.shape[1] - rzb)

        beta = {}
        for i, s in enumerate(crit):
            for t in crit[i:]:
                beta[(s, t)] = pbetti(s, t)

        def bt(i, j):
            if i < 0:
                return 0
            if j >= len(crit):
                return 0
            return beta[(crit[i], crit[j])]

        for i in range(len(crit)):
            for j in range(i + 1, len(crit) + 1):
                mu = bt(i, j - 1) - bt(i - 1, j - 1) - bt(i, j) + bt(i - 1, j)
                death = crit[j] if j < len(crit) else math.inf
                out += [(q, crit[i], death)] * mu
    return sorted(out)


def rips_complex(dist, max_dim):
    n = dist.shape[0]
    simplices, values = [], []
    for k in range(1, max_dim + 3):
        for s in itertools.combinations(range(n), k):
            simplices.append(s)
            values.append(max((dist[a, b] for a, b in itertools.combinations(s, 2)), default=0.0))
    return simplices, values


# ---------------------------------------------------------------- signs and Z/2


def dfs_signs(k, edges):
    """Vertex signs with lambda_i lambda_j = omega_ij on a tree, by DFS."""
    adj = {i: [] for i in range(k)}
    for (i, j), w in edges.items():
        adj[i].append((j, w))
        adj[j].append((i, w))
    lam = {0: 1}
    stack = [0]
    while stack:
        i = stack.pop()
        for j, w in adj[i]:
            if j not in lam:
                lam[j] = lam[i] * w
                stack.append(j)
    return np.array([lam[i] for i in range(k)])


def coboundary_exists(k, cochain):
    """Exhaustive search for g with g_i + g_j = w_ij mod 2 on every edge."""
    for bits in range(1 << (k - 1)):
        g = [0] + [(bits >> i) & 1 for i in range(k - 1)]
        if all((g[i] + g[j]) % 2 == w for (i, j), w in cochain.items()):
            return True
    return False
