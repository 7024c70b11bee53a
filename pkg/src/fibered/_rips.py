"""Numba kernels for Vietoris-Rips persistent cohomology.

Simplices are encoded with the combinatorial number system: a simplex with
vertices v_0 > v_1 > ... > v_q has index sum_i C(v_i, q + 1 - i). Within a
dimension, the filtration order is (diameter, index) ascending. Cohomology is
computed by reducing coboundary columns in reverse filtration order; the pivot
of a column is its earliest coface. Pivots of dimension q are used to clear
columns of dimension q + 1.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def binomial_table(n, k):
    table = np.zeros((n + 2, k + 1), dtype=np.int64)
    for i in range(n + 2):
        table[i, 0] = 1
        for j in range(1, min(i, k) + 1):
            table[i, j] = table[i - 1, j - 1] + table[i - 1, j]
    return table


@nb.njit(cache=True)
def _mod_inverse(c, p):
    r = 1
    base = c % p
    e = p - 2
    while e > 0:
        if e & 1:
            r = (r * base) % p
        base = (base * base) % p
        e >>= 1
    return r


@nb.njit(cache=True)
def decode(idx, q, n, binom, out):
    """Write the q+1 vertices (descending) of simplex ``idx`` into ``out``."""
    top = n - 1
    for pos in range(q + 1):
        k = q + 1 - pos
        lo = k - 1
        hi = top
        # largest v in [lo, hi] with C(v, k) <= idx
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if binom[mid, k] <= idx:
                lo = mid
            else:
                hi = mid - 1
        out[pos] = lo
        idx -= binom[lo, k]
        top = lo - 1


@nb.njit(cache=True)
def simplex_diameter(verts, q, dist):
    d = 0.0
    for a in range(q + 1):
        for b in range(a + 1, q + 1):
            x = dist[verts[a], verts[b]]
            if x > d:
                d = x
    return d


# ---------------------------------------------------------------- hash table


@nb.njit(cache=True)
def _slot(key, mask):
    h = (key * np.int64(-7046029254386353131)) ^ (key >> 29)
    return h & mask


@nb.njit(cache=True)
def table_get(keys, vals, key):
    mask = keys.shape[0] - 1
    s = _slot(key, mask)
    while True:
        k = keys[s]
        if k == key:
            return vals[s]
        if k == -1:
            return -1
        s = (s + 1) & mask


@nb.njit(cache=True)
def table_put(keys, vals, key, val):
    mask = keys.shape[0] - 1
    s = _slot(key, mask)
    while keys[s] != -1 and keys[s] != key:
        s = (s + 1) & mask
    keys[s] = key
    vals[s] = val


# ---------------------------------------------------------------- heap


@nb.njit(cache=True)
def _less(d1, i1, d2, i2):
    return d1 < d2 or (d1 == d2 and i1 < i2)


@nb.njit(cache=True)
def heap_push(hd, hi, hc, size, d, i, c):
    pos = size
    hd[pos] = d
    hi[pos] = i
    hc[pos] = c
    while pos > 0:
        parent = (pos - 1) >> 1
        if _less(hd[pos], hi[pos], hd[parent], hi[parent]):
            hd[pos], hd[parent] = hd[parent], hd[pos]
            hi[pos], hi[parent] = hi[parent], hi[pos]
            hc[pos], hc[parent] = hc[parent], hc[pos]
            pos = parent
        else:
            break
    return size + 1


@nb.njit(cache=True)
def heap_pop(hd, hi, hc, size):
    size -= 1
    hd[0] = hd[size]
    hi[0] = hi[size]
    hc[0] = hc[size]
    pos = 0
    while True:
        left = 2 * pos + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and _less(hd[right], hi[right], hd[left], hi[left]):
            best = right
        if _less(hd[best], hi[best], hd[pos], hi[pos]):
            hd[pos], hd[best] = hd[best], hd[pos]
            hi[pos], hi[best] = hi[best], hi[pos]
            hc[pos], hc[best] = hc[best], hc[pos]
            pos = best
        else:
            break
    return size


@nb.njit(cache=True)
def heap_pivot(hd, hi, hc, size, p):
    """Pop cancelled entries until the top is a nonzero coefficient.

    Returns (new_size, found). The pivot stays on top of the heap.
    """
    while size > 0:
        d = hd[0]
        i = hi[0]
        c = hc[0]
        size = heap_pop(hd, hi, hc, size)
        while size > 0 and hi[0] == i:
            c = (c + hc[0]) % p
            size = heap_pop(hd, hi, hc, size)
        if c != 0:
            size = heap_push(hd, hi, hc, size, d, i, c)
            return size, True
    return size, False


# ---------------------------------------------------------------- cofacets


@nb.njit(cache=True)
def _prepare(idx, q, n, binom, verts, prefix, suffix, dist):
    decode(idx, q, n, binom, verts)
    prefix[0] = 0
    for j in range(q + 1):
        prefix[j + 1] = prefix[j] + binom[verts[j], q + 2 - j]
    suffix[q + 1] = 0
    for j in range(q, -1, -1):
        suffix[j] = suffix[j + 1] + binom[verts[j], q + 1 - j]
    return simplex_diameter(verts, q, dist)


@nb.njit(cache=True)
def min_cofacet(idx, q, n, binom, dist, thr, verts, prefix, suffix):
    """Earliest coface of a q-simplex: (diam, index, coefficient sign)."""
    sdiam = _prepare(idx, q, n, binom, verts, prefix, suffix, dist)
    best_d = np.inf
    best_v = -1
    best_j = 0
    # cofacet indices increase with the added vertex, so the first cofacet of
    # equal diameter met in ascending order is the pivot
    j = q + 1
    for v in range(n):
        if j > 0 and verts[j - 1] == v:
            j -= 1
            continue
        d = sdiam
        for a in range(q + 1):
            x = dist[v, verts[a]]
            if x > d:
                d = x
        if d < best_d and d <= thr:
            best_d = d
            best_v = v
            best_j = j
            if d == sdiam:
                break
    if best_v < 0:
        return sdiam, best_d, np.int64(-1), 1
    ci = prefix[best_j] + binom[best_v, q + 2 - best_j] + suffix[best_j]
    sign = 1 if best_j % 2 == 0 else -1
    return sdiam, best_d, ci, sign


@nb.njit(cache=True)
def push_coboundary(idx, coef, q, n, binom, dist, thr, p, verts, prefix,
                    suffix, hd, hi, hc, size):
    sdiam = _prepare(idx, q, n, binom, verts, prefix, suffix, dist)
    j = 0
    for v in range(n - 1, -1, -1):
        if j <= q and verts[j] == v:
            j += 1
            continue
        d = sdiam
        for a in range(q + 1):
            x = dist[v, verts[a]]
            if x > d:
                d = x
        if d > thr:
            continue
        ci = prefix[j] + binom[v, q + 2 - j] + suffix[j]
        c = coef if j % 2 == 0 else (p - coef) % p
        size = heap_push(hd, hi, hc, size, d, ci, c)
    return size


# ---------------------------------------------------------------- reduction


@nb.njit(cache=True)
def reduce_dimension(cols, q, n, dist, thr, p, binom, table_bits,
                     record_pivots):
    """Reduce the coboundary columns ``cols`` (q-simplices, already sorted in
    reverse filtration order and cleared).

    Returns finite pairs (birth, death), essential births, and the pivot
    indices (the (q+1)-simplices that became pivots) when requested.
    """
    ncols = cols.shape[0]
    cap = np.int64(1) << table_bits
    keys = np.full(cap, -1, dtype=np.int64)
    vals = np.empty(cap, dtype=np.int32)

    # reduction matrix storage; vlen == 0 means the column is just its simplex
    vstart = np.zeros(ncols, dtype=np.int64)
    vlen = np.zeros(ncols, dtype=np.int32)
    pcoef = np.ones(ncols, dtype=np.int8)
    vidx = np.empty(1024, dtype=np.int64)
    vcoef = np.empty(1024, dtype=np.int64)
    vtop = 0

    births = np.empty(ncols, dtype=np.float64)
    deaths = np.empty(ncols, dtype=np.float64)
    npairs = 0
    ess = np.empty(ncols, dtype=np.float64)
    ness = 0
    pivots = np.empty(ncols if record_pivots else 0, dtype=np.int64)
    npiv = 0

    verts = np.empty(q + 2, dtype=np.int64)
    prefix = np.empty(q + 2, dtype=np.int64)
    suffix = np.empty(q + 2, dtype=np.int64)

    hcap = 4 * n + 16
    hd = np.empty(hcap, dtype=np.float64)
    hi = np.empty(hcap, dtype=np.int64)
    hc = np.empty(hcap, dtype=np.int64)

    ridx = np.empty(64, dtype=np.int64)
    rcoef = np.empty(64, dtype=np.int64)

    for col in range(ncols):
        sigma = cols[col]
        sdiam, cd, ci, sign = min_cofacet(sigma, q, n, binom, dist, thr,
                                          verts, prefix, suffix)
        if ci < 0:
            ess[ness] = sdiam
            ness += 1
            continue
        other = table_get(keys, vals, ci)
        if other < 0:
            table_put(keys, vals, ci, col)
            pcoef[col] = 1 if sign > 0 else p - 1
            if record_pivots:
                pivots[npiv] = ci
                npiv += 1
            if cd > sdiam:
                births[npairs] = sdiam
                deaths[npairs] = cd
                npairs += 1
            continue

        # full reduction with a heap-backed working column
        size = 0
        size = push_coboundary(sigma, 1, q, n, binom, dist, thr, p, verts,
                               prefix, suffix, hd, hi, hc, size)
        rlen = 1
        ridx[0] = sigma
        rcoef[0] = 1
        found = False
        while True:
            size, ok = heap_pivot(hd, hi, hc, size, p)
            if not ok:
                break
            pd_ = hd[0]
            pi_ = hi[0]
            pc_ = hc[0]
            other = table_get(keys, vals, pi_)
            if other < 0:
                found = True
                break
            factor = (p - (pc_ * _mod_inverse(pcoef[other], p)) % p) % p
            # add factor * coboundary(V[other])
            m = vlen[other]
            if m == 0:
                m = 1
            if size + m * n + 8 > hcap:
                newcap = 2 * (size + m * n + 8)
                hd2 = np.empty(newcap, dtype=np.float64)
                hi2 = np.empty(newcap, dtype=np.int64)
                hc2 = np.empty(newcap, dtype=np.int64)
                hd2[:size] = hd[:size]
                hi2[:size] = hi[:size]
                hc2[:size] = hc[:size]
                hd = hd2
                hi = hi2
                hc = hc2
                hcap = newcap
            if rlen + m > ridx.shape[0]:
                newcap = 2 * (rlen + m)
                r2 = np.empty(newcap, dtype=np.int64)
                c2 = np.empty(newcap, dtype=np.int64)
                r2[:rlen] = ridx[:rlen]
                c2[:rlen] = rcoef[:rlen]
                ridx = r2
                rcoef = c2
            if vlen[other] == 0:
                s_idx = cols[other]
                size = push_coboundary(s_idx, factor, q, n, binom, dist, thr,
                                       p, verts, prefix, suffix, hd, hi, hc,
                                       size)
                ridx[rlen] = s_idx
                rcoef[rlen] = factor
                rlen += 1
            else:
                for t in range(vstart[other], vstart[other] + vlen[other]):
                    c = (vcoef[t] * factor) % p
                    size = push_coboundary(vidx[t], c, q, n, binom, dist, thr,
                                           p, verts, prefix, suffix, hd, hi,
                                           hc, size)
                    ridx[rlen] = vidx[t]
                    rcoef[rlen] = c
                    rlen += 1

        if not found:
            ess[ness] = sdiam
            ness += 1
            continue

        # compact the reduction column: merge duplicate simplices mod p
        order = np.argsort(ridx[:rlen])
        if vtop + rlen > vidx.shape[0]:
            newcap = 2 * (vtop + rlen)
            a2 = np.empty(newcap, dtype=np.int64)
            b2 = np.empty(newcap, dtype=np.int64)
            a2[:vtop] = vidx[:vtop]
            b2[:vtop] = vcoef[:vtop]
            vidx = a2
            vcoef = b2
        start = vtop
        t = 0
        while t < rlen:
            s_idx = ridx[order[t]]
            c = 0
            while t < rlen and ridx[order[t]] == s_idx:
                c = (c + rcoef[order[t]]) % p
                t += 1
            if c != 0:
                vidx[vtop] = s_idx
                vcoef[vtop] = c
                vtop += 1
        vstart[col] = start
        vlen[col] = vtop - start
        pcoef[col] = pc_
        table_put(keys, vals, pi_, col)
        if record_pivots:
            pivots[npiv] = pi_
            npiv += 1
        if pd_ > sdiam:
            births[npairs] = sdiam
            deaths[npairs] = pd_
            npairs += 1

    return births[:npairs], deaths[:npairs], ess[:ness], pivots[:npiv]


# ---------------------------------------------------------------- enumeration


@nb.njit(cache=True)
def enumerate_edges(dist, thr):
    n = dist.shape[0]
    total = n * (n - 1) // 2
    idx = np.empty(total, dtype=np.int64)
    diam = np.empty(total, dtype=np.float64)
    c = 0
    for a in range(1, n):
        base = a * (a - 1) // 2
        for b in range(a):
            d = dist[a, b]
            if d <= thr:
                idx[c] = base + b
                diam[c] = d
                c += 1
    return idx[:c], diam[:c]


@nb.njit(cache=True)
def enumerate_triangles(dist, thr, binom, cleared):
    n = dist.shape[0]
    count = 0
    for a in range(2, n):
        for b in range(1, a):
            dab = dist[a, b]
            if dab > thr:
                continue
            for c in range(b):
                if dist[a, c] <= thr and dist[b, c] <= thr:
                    count += 1
    idx = np.empty(count, dtype=np.int64)
    diam = np.empty(count, dtype=np.float64)
    k = 0
    for a in range(2, n):
        ca = binom[a, 3]
        for b in range(1, a):
            dab = dist[a, b]
            if dab > thr:
                continue
            cb = ca + binom[b, 2]
            for c in range(b):
                dac = dist[a, c]
                dbc = dist[b, c]
                if dac <= thr and dbc <= thr:
                    t = cb + c
                    if cleared[t]:
                        continue
                    d = dab
                    if dac > d:
                        d = dac
                    if dbc > d:
                        d = dbc
                    idx[k] = t
                    diam[k] = d
                    k += 1
    return idx[:k], diam[:k]


@nb.njit(cache=True)
def union_find_h0(n, edge_idx, edge_diam, binom):
    """Kruskal on edges sorted ascending. Returns death values and the merging
    (MST) edge indices."""
    parent = np.arange(n)
    deaths = np.empty(n, dtype=np.float64)
    mst = np.empty(n, dtype=np.int64)
    nd = 0
    verts = np.empty(2, dtype=np.int64)
    for e in range(edge_idx.shape[0]):
        decode(edge_idx[e], 1, n, binom, verts)
        a = verts[0]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = verts[1]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            deaths[nd] = edge_diam[e]
            mst[nd] = edge_idx[e]
            nd += 1
    return deaths[:nd], mst[:nd]
