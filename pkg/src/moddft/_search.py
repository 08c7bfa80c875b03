"""Bounded integer feasibility search.

Finds integer vectors ``x`` with ``lo <= x <= hi`` and ``||M x - c||_2 <= tol``.
The search is a depth-first branch-and-bound whose interval at each level is
the intersection of slab constraints ``|u.(c - M x)| <= h(u) + tol``: ``u``
ranges over a small set of directions chosen per level and ``h(u)`` is the
support of the zonotope spanned by the still-free columns.  When the free
part of the problem is large, the last variables are handled by a sorted
lookup table (a meet-in-the-middle split) instead of being branched.

A prepared :class:`BoxSearch` depends only on ``(M, lo, hi)``, so it can be
reused across many right-hand sides ``c``.
"""
from __future__ import annotations

import itertools
from math import comb

import numba as nb
import numpy as np

_RANK_RTOL = 1e-10


@nb.njit(cache=True)
def _lookup(r, tol, tkeys, tvecs, tcodes, tdir, radix_lo, radix_n, x, h, sols, nsol, max_sol):
    k = r.shape[0]
    key = 0.0
    for q in range(k):
        key += tdir[q] * r[q]
    i = np.searchsorted(tkeys, key - tol)
    nt = radix_n.shape[0]
    tol2 = tol * tol
    while i < tkeys.shape[0] and tkeys[i] <= key + tol:
        s = 0.0
        for q in range(k):
            d = r[q] - tvecs[i, q]
            s += d * d
        if s <= tol2:
            code = tcodes[i]
            for q in range(nt):
                x[h + q] = radix_lo[q] + code % radix_n[q]
                code //= radix_n[q]
            sols[nsol] = x
            nsol += 1
            if nsol >= max_sol:
                return nsol
        i += 1
    return nsol


@nb.njit(cache=True)
def _dfs(cols, c, lo, hi, U, off, cU, hU, aU, tol, range_lim, max_nodes, max_sol, sols,
         tkeys, tvecs, tcodes, tdir, radix_lo, radix_n):
    n, k = cols.shape
    nt = radix_n.shape[0]
    h = n - nt
    x = np.zeros(n, np.int64)
    nodes = 0
    nsol = 0
    if h == 0:
        nsol = _lookup(c, tol, tkeys, tvecs, tcodes, tdir, radix_lo, radix_n, x, 0, sols, nsol, max_sol)
        return nsol, 1, 0
    width = 1
    for j in range(h):
        if hi[j] - lo[j] + 1 > width:
            width = hi[j] - lo[j] + 1
    resid = np.zeros((h + 1, k))
    resid[0] = c
    cand = np.zeros((h, width), np.int64)
    ncand = np.zeros(h, np.int64)
    pos = np.zeros(h, np.int64)
    runmin = np.zeros(h + 1, np.int64)
    runmax = np.zeros(h + 1, np.int64)
    runmin[0] = 1 << 40
    runmax[0] = -(1 << 40)
    tol2 = tol * tol
    j = 0
    entering = True
    while True:
        if entering:
            nodes += 1
            if nodes > max_nodes:
                return nsol, nodes, 1
            lw = float(lo[j])
            up = float(hi[j])
            if range_lim >= 0 and j > 0:
                lw = max(lw, float(runmax[j] - range_lim))
                up = min(up, float(runmin[j] + range_lim))
            ok = lw <= up
            if ok:
                for t in range(off[j], off[j + 1]):
                    p = -cU[t]
                    for q in range(k):
                        p += U[t, q] * resid[j, q]
                    w = hU[t] + tol
                    a = aU[t]
                    if abs(a) < 1e-12:
                        if abs(p) > w:
                            ok = False
                            break
                        continue
                    t1 = (p - w) / a
                    t2 = (p + w) / a
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > lw:
                        lw = t1
                    if t2 < up:
                        up = t2
                    if lw > up + 1e-9:
                        ok = False
                        break
            m = 0
            if ok:
                il = int(np.ceil(lw - 1e-9))
                ih = int(np.floor(up + 1e-9))
                if il <= ih:
                    # zig-zag outwards from the centre of the feasible interval
                    cen = 0.5 * (lw + up)
                    v0 = int(np.floor(cen + 0.5))
                    v0 = min(max(v0, il), ih)
                    cand[j, 0] = v0
                    m = 1
                    total = ih - il + 1
                    d = 1
                    while m < total:
                        a1 = v0 + d
                        a2 = v0 - d
                        if (a1 - cen) <= (cen - a2):
                            if a1 <= ih:
                                cand[j, m] = a1
                                m += 1
                            if a2 >= il and m < total:
                                cand[j, m] = a2
                                m += 1
                        else:
                            if a2 >= il:
                                cand[j, m] = a2
                                m += 1
                            if a1 <= ih and m < total:
                                cand[j, m] = a1
                                m += 1
                        d += 1
            ncand[j] = m
            pos[j] = 0
            entering = False
        if pos[j] < ncand[j]:
            v = cand[j, pos[j]]
            pos[j] += 1
            x[j] = v
            for q in range(k):
                resid[j + 1, q] = resid[j, q] - cols[j, q] * v
            runmin[j + 1] = min(runmin[j], v)
            runmax[j + 1] = max(runmax[j], v)
            if j == h - 1:
                if nt > 0:
                    nsol = _lookup(resid[h], tol, tkeys, tvecs, tcodes, tdir, radix_lo, radix_n,
                                   x, h, sols, nsol, max_sol)
                else:
                    s = 0.0
                    for q in range(k):
                        s += resid[h, q] * resid[h, q]
                    if s <= tol2:
                        sols[nsol] = x
                        nsol += 1
                if nsol >= max_sol:
                    return nsol, nodes, 0
            else:
                j += 1
                entering = True
        else:
            if j == 0:
                return nsol, nodes, 0
            j -= 1


def _orth(A):
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((A.shape[0], 0))
    return U[:, s > _RANK_RTOL * s[0]]


def _left_null(A, dim):
    """Orthonormal basis of ``{u : u^T A = 0}``."""
    if A.shape[1] == 0:
        return np.eye(dim)
    U, s, _ = np.linalg.svd(A, full_matrices=True)
    rk = int((s > _RANK_RTOL * max(s[0], 1e-300)).sum()) if s.size else 0
    return U[:, rk:]


def greedy_order(M):
    """Variable order for the search.

    The order is built back to front: the tail repeatedly takes the column
    with the smallest component outside the span of the columns already in
    it, so the head of the order fixes the directions that the remaining
    columns can least compensate for.
    """
    n = M.shape[1]
    rem = list(range(n))
    tail = []
    Q = np.zeros((M.shape[0], 0))
    while rem:
        best = None
        for ci in rem:
            v = M[:, ci] - Q @ (Q.T @ M[:, ci])
            # rounding keeps float noise from deciding ties between equal columns
            key = (round(float(np.linalg.norm(v)), 6), ci)
            if best is None or key < best[0]:
                best = (key, ci, v)
        _, ci, v = best
        rem.remove(ci)
        tail.append(ci)
        nv = np.linalg.norm(v)
        if nv > 1e-9:
            Q = np.column_stack([Q, v / nv])
    return tail[::-1]


def _level_normals(R, k, nfacets, rng):
    normals = [u for u in _left_null(R, k).T]
    Qr = _orth(R)
    kr = Qr.shape[1]
    m = R.shape[1]
    if kr == 0:
        return normals
    # rows of the inverse of the last kr free columns: one slab per column
    G = Qr.T @ R[:, m - kr:]
    if abs(np.linalg.det(G)) > 1e-12:
        for row in np.linalg.inv(G):
            u = Qr @ row
            normals.append(u / np.linalg.norm(u))
    # zonotope facet normals: orthogonal to kr-1 of the free generators
    if comb(m, kr - 1) <= nfacets:
        subsets = itertools.combinations(range(m), kr - 1)
    else:
        subsets = (tuple(rng.choice(m, kr - 1, replace=False)) for _ in range(nfacets))
    for S in subsets:
        if kr == 1:
            u = Qr[:, 0]
        else:
            nn = _left_null(Qr.T @ R[:, list(S)], kr)
            if nn.shape[1] != 1:
                continue
            u = Qr @ nn[:, 0]
        normals.append(u / np.linalg.norm(u))
    return normals


class BoxSearch:
    """Prepared integer search for ``||M x - c|| <= tol`` over a box.

    Parameters
    ----------
    M : ndarray, shape (m, n)
        Real constraint matrix.
    lo, hi : array_like of int
        Inclusive per-variable bounds.
    order : sequence of int, optional
        Branching order; :func:`greedy_order` when omitted.
    range_lim : int, optional
        If given, additionally require ``max(x) - min(x) <= range_lim``.
    nfacets : int
        Random facet directions tried per level.
    table_limit : int
        Maximum number of entries in the tail lookup table.
    table_min_free : int
        The tail table is only built when ``n - rank(M)`` reaches this value.
    seed : int
        Seed for the facet sampler; the search itself is deterministic.
    """

    def __init__(self, M, lo, hi, *, order=None, range_lim=None, nfacets=48, table_limit=1 << 21,
                 table_min_free=12, seed=0):
        M = np.asarray(M, dtype=float)
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        if M.ndim != 2 or lo.shape != (M.shape[1],) or hi.shape != (M.shape[1],):
            raise ValueError("shape mismatch between M and bounds")
        if np.any(lo > hi):
            raise ValueError("empty box")
        self.n = M.shape[1]
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        r = int((s > _RANK_RTOL * max(s[0], 1e-300)).sum()) if s.size else 0
        self.rank = r
        self._Q = U[:, :r]
        Mc = s[:r, None] * Vt[:r]
        if order is None:
            order = greedy_order(Mc) if r else list(range(self.n))
        elif sorted(order) != list(range(self.n)):
            raise ValueError("order must be a permutation of the variables")
        self.order = np.array(order, dtype=np.int64)
        Mo = Mc[:, self.order]
        self._lo = lo[self.order]
        self._hi = hi[self.order]
        self._range = -1 if range_lim is None else int(range_lim)

        nt = 0
        if range_lim is None and self.n - r >= table_min_free and r > 0:
            size = 1
            for j in range(self.n - 1, -1, -1):
                width = int(self._hi[j] - self._lo[j] + 1)
                if size * width > table_limit or (size * width) * r > (1 << 25):
                    break
                size *= width
                nt += 1
        h = self.n - nt
        self.table_size = 0

        rng = np.random.default_rng(seed)
        mid = 0.5 * (self._lo + self._hi)
        half = 0.5 * (self._hi - self._lo)
        Us, cs, hs, as_, off = [], [], [], [], [0]
        for j in range(h):
            R = Mo[:, j + 1:]
            normals = _level_normals(R, r, nfacets, rng) if r else []
            Uj = np.array(normals).reshape(-1, r)
            Us.append(Uj)
            cs.append(Uj @ (R @ mid[j + 1:]))
            hs.append((np.abs(Uj @ R) * half[j + 1:]).sum(axis=1))
            as_.append(Uj @ Mo[:, j])
            off.append(off[-1] + len(Uj))
        cat = lambda parts: np.concatenate(parts) if parts else np.zeros(0)
        self._U = np.vstack(Us) if Us else np.zeros((0, r))
        self._cU = cat(cs)
        self._hU = cat(hs)
        self._aU = cat(as_)
        self._off = np.array(off, dtype=np.int64)
        self._cols = np.ascontiguousarray(Mo.T)

        # tail lookup table over the last nt variables
        radix_lo = self._lo[h:].copy()
        radix_n = (self._hi[h:] - self._lo[h:] + 1).astype(np.int64)
        tdir = rng.standard_normal(r)
        tdir /= np.linalg.norm(tdir) if r else 1.0
        if nt:
            vecs = np.zeros((1, r))
            for q in range(nt - 1, -1, -1):
                vals = np.arange(radix_lo[q], radix_lo[q] + radix_n[q])
                vecs = (vals[None, :, None] * Mo[:, h + q][None, None, :] + vecs[:, None, :]).reshape(-1, r)
            # row index equals the mixed-radix code with variable h as least significant digit
            keys = vecs @ tdir
            srt = np.argsort(keys, kind="stable")
            self._tkeys = keys[srt]
            self._tvecs = np.ascontiguousarray(vecs[srt])
            self._tcodes = srt.astype(np.int64)
            self.table_size = len(keys)
        else:
            self._tkeys = np.zeros(0)
            self._tvecs = np.zeros((0, r))
            self._tcodes = np.zeros(0, np.int64)
        self._tdir = tdir
        self._radix_lo = radix_lo
        self._radix_n = radix_n

    def run(self, c, tol, *, max_nodes=10**7, max_sol=2):
        """Search for solutions.

        Returns
        -------
        sols : list of ndarray
            Solutions in the original variable order, in discovery order.
        nodes : int
            Search nodes expanded.
        exhausted : bool
            True if ``max_nodes`` was hit before the search completed.
        """
        c = np.asarray(c, dtype=float)
        cc = self._Q.T @ c
        outside = float(c @ c - cc @ cc)
        if outside > tol * tol:
            if outside - tol * tol > 1e-12 * max(1.0, float(c @ c)):
                return [], 0, False
            outside = tol * tol
        teff = float(np.sqrt(tol * tol - max(outside, 0.0)))
        max_sol = max(1, int(max_sol))
        buf = np.zeros((max_sol, self.n), np.int64)
        ns, nodes, st = _dfs(self._cols, cc, self._lo, self._hi, self._U, self._off, self._cU,
                             self._hU, self._aU, teff, self._range, int(max_nodes), max_sol, buf,
                             self._tkeys, self._tvecs, self._tcodes, self._tdir,
                             self._radix_lo, self._radix_n)
        out = []
        for row in buf[:ns]:
            x = np.empty(self.n, np.int64)
            x[self.order] = row
            out.append(x)
        return out, int(nodes), bool(st)
