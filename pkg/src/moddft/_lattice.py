"""Lattice-reduced enumeration for bounded integer feasibility.

Solves the same problem as :mod:`moddft._search`: find integer ``x`` with
``lo <= x <= hi`` and ``||M x - c|| <= tol``.  Every feasible ``x`` satisfies

    ||x - m||^2 + K^2 ||G x - g||^2 <= sum(half^2) + K^2 tol^2

where ``m`` and ``half`` are the box centre and half-widths and ``G`` is the
row-compressed ``M``.  The left side is the squared distance from a lattice
point ``[x; K G x]`` to a fixed target, so all candidates lie in a ball that
a depth-first enumeration (Schnorr-Euchner order, pruned by the partial
distance) can list completely.  An LLL-reduced basis makes the enumeration
tree small.  Leaves are checked against the exact box and residual.

The reduced basis depends only on ``(M, box)`` and is reused across
right-hand sides.
"""
from __future__ import annotations

import numba as nb
import numpy as np

_RANK_RTOL = 1e-10
_K_MAX = 1e8


@nb.njit(cache=True)
def _gso(Bm):
    d, n = Bm.shape
    Bs = np.zeros((d, n))
    mu = np.zeros((n, n))
    Bn = np.zeros(n)
    for i in range(n):
        v = Bm[:, i].copy()
        for j in range(i):
            s = 0.0
            for r in range(d):
                s += Bm[r, i] * Bs[r, j]
            mu[i, j] = s / Bn[j]
            for r in range(d):
                v[r] -= mu[i, j] * Bs[r, j]
        Bs[:, i] = v
        Bn[i] = v @ v
    return mu, Bn


@nb.njit(cache=True)
def lll_reduce(Bm, delta=0.99, max_rounds=50):
    """LLL-reduce the columns of ``Bm``.

    Returns the reduced basis and the integer transform ``U`` (as floats)
    with ``reduced = Bm @ U``.  Gram-Schmidt data are recomputed from
    scratch between rounds to contain floating-point drift; the loop stops
    when a full round makes no swap.
    """
    Bm = Bm.copy()
    d, n = Bm.shape
    U = np.eye(n)
    for _ in range(max_rounds):
        mu, Bn = _gso(Bm)
        k = 1
        swaps = 0
        while k < n:
            for j in range(k - 1, -1, -1):
                q = np.floor(mu[k, j] + 0.5)
                if q != 0.0:
                    for r in range(d):
                        Bm[r, k] -= q * Bm[r, j]
                    for r in range(n):
                        U[r, k] -= q * U[r, j]
                    for i in range(j):
                        mu[k, i] -= q * mu[j, i]
                    mu[k, j] -= q
            if Bn[k] >= (delta - mu[k, k - 1] ** 2) * Bn[k - 1]:
                k += 1
                continue
            swaps += 1
            for r in range(d):
                t = Bm[r, k]
                Bm[r, k] = Bm[r, k - 1]
                Bm[r, k - 1] = t
            for r in range(n):
                t = U[r, k]
                U[r, k] = U[r, k - 1]
                U[r, k - 1] = t
            m_ = mu[k, k - 1]
            B_ = Bn[k] + m_ * m_ * Bn[k - 1]
            mu[k, k - 1] = m_ * Bn[k - 1] / B_
            Bn[k] = Bn[k - 1] * Bn[k] / B_
            Bn[k - 1] = B_
            for j in range(k - 1):
                t = mu[k - 1, j]
                mu[k - 1, j] = mu[k, j]
                mu[k, j] = t
            for i in range(k + 1, n):
                t = mu[i, k]
                mu[i, k] = mu[i, k - 1] - m_ * t
                mu[i, k - 1] = t + mu[k, k - 1] * mu[i, k]
            k = max(k - 1, 1)
        if swaps == 0:
            break
    return Bm, U


@nb.njit(cache=True)
def _enumerate(R, y, rad2, U, M, c, lo, hi, tol, shift_canon, max_nodes, max_sol, sols):
    n = R.shape[0]
    m = M.shape[0]
    w = np.zeros(n)
    ctr = np.zeros(n)
    dist = np.zeros(n + 1)
    step = np.zeros(n, np.int64)
    dirn = np.zeros(n)
    x = np.zeros(n, np.int64)
    tol2 = tol * tol
    nodes = 0
    nsol = 0
    k = n - 1
    ctr[k] = y[k] / R[k, k]
    w[k] = np.floor(ctr[k] + 0.5)
    dirn[k] = 1.0 if ctr[k] >= w[k] else -1.0
    while True:
        nodes += 1
        if nodes > max_nodes:
            return nsol, nodes, 1
        diff = ctr[k] - w[k]
        dk = dist[k + 1] + (R[k, k] * diff) ** 2
        descend = dk <= rad2
        if descend and k == 0:
            # leaf: map back to the original coordinates and test exactly
            inside = True
            for i in range(n):
                s = 0.0
                for j in range(n):
                    s += U[i, j] * w[j]
                x[i] = int(np.floor(s + 0.5))
                if x[i] < lo[i] or x[i] > hi[i]:
                    inside = False
                    break
            if inside:
                res = 0.0
                for r in range(m):
                    s = c[r]
                    for i in range(n):
                        s -= M[r, i] * x[i]
                    res += s * s
                if res <= tol2:
                    if shift_canon:
                        x0 = x[0]
                        for i in range(n):
                            x[i] -= x0
                    dup = False
                    for q in range(nsol):
                        same = True
                        for i in range(n):
                            if sols[q, i] != x[i]:
                                same = False
                                break
                        if same:
                            dup = True
                            break
                    if not dup:
                        sols[nsol] = x
                        nsol += 1
                        if nsol >= max_sol:
                            return nsol, nodes, 0
            descend = False
            # fall through to the next sibling at level 0
            step[k] += 1
            w0 = np.floor(ctr[k] + 0.5)
            if step[k] % 2 == 1:
                w[k] = w0 + dirn[k] * ((step[k] + 1) // 2)
            else:
                w[k] = w0 - dirn[k] * (step[k] // 2)
            continue
        if descend:
            dist[k] = dk
            k -= 1
            s = y[k]
            for j in range(k + 1, n):
                s -= R[k, j] * w[j]
            ctr[k] = s / R[k, k]
            w[k] = np.floor(ctr[k] + 0.5)
            step[k] = 0
            dirn[k] = 1.0 if ctr[k] >= w[k] else -1.0
        else:
            k += 1
            if k == n:
                return nsol, nodes, 0
            step[k] += 1
            w0 = np.floor(ctr[k] + 0.5)
            if step[k] % 2 == 1:
                w[k] = w0 + dirn[k] * ((step[k] + 1) // 2)
            else:
                w[k] = w0 - dirn[k] * (step[k] // 2)


class LatticeSearch:
    """Prepared lattice enumeration for ``||M x - c|| <= tol`` over a box.

    Parameters
    ----------
    M : ndarray, shape (m, n)
    lo, hi : array_like of int
        Inclusive bounds.
    tol_hint : float
        Expected residual tolerance; sets the embedding weight ``K = 1/tol``
        (capped at 1e8).  Any tolerance can be used in :meth:`run`; a
        mismatch only changes the amount of work.
    shift_canon : bool
        Report solutions modulo the all-ones vector (``x - x[0]``) and merge
        shifted duplicates.  Only meaningful when ``M @ ones == 0``.
    """

    def __init__(self, M, lo, hi, *, tol_hint=1e-6, shift_canon=False):
        M = np.ascontiguousarray(M, dtype=float)
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        if M.ndim != 2 or lo.shape != (M.shape[1],) or hi.shape != (M.shape[1],):
            raise ValueError("shape mismatch between M and bounds")
        if np.any(lo > hi):
            raise ValueError("empty box")
        n = M.shape[1]
        self.n = n
        Uq, s, Vt = np.linalg.svd(M, full_matrices=False)
        r = int((s > _RANK_RTOL * max(s[0], 1e-300)).sum()) if s.size else 0
        self.rank = r
        self._Q = Uq[:, :r]
        self._G = s[:r, None] * Vt[:r]
        self.K = float(min(1.0 / tol_hint, _K_MAX))
        basis = np.vstack([np.eye(n), self.K * self._G])
        _, Uf = lll_reduce(basis)
        Ui = np.rint(Uf)
        if abs(abs(np.linalg.det(Ui)) - 1.0) > 1e-6:
            raise ArithmeticError("lattice reduction lost unimodularity")
        reduced = basis @ Ui
        self._Qb, self._R = np.linalg.qr(reduced)
        # keep the diagonal positive so partial distances are well defined
        sign = np.where(np.diag(self._R) < 0, -1.0, 1.0)
        self._R = np.ascontiguousarray(self._R * sign[:, None])
        self._Qb = self._Qb * sign[None, :]
        self._U = np.ascontiguousarray(Ui)
        self._M = M
        self._lo, self._hi = lo, hi
        self._mid = 0.5 * (lo + hi)
        self._half2 = float(np.sum((0.5 * (hi - lo)) ** 2))
        self.shift_canon = bool(shift_canon)

    def run(self, c, tol, *, max_nodes=10**7, max_sol=2):
        """Enumerate solutions; same return convention as ``BoxSearch.run``."""
        c = np.asarray(c, dtype=float)
        cc = self._Q.T @ c
        outside = float(c @ c - cc @ cc)
        if outside > tol * tol and outside - tol * tol > 1e-12 * max(1.0, float(c @ c)):
            return [], 0, False
        target = np.concatenate([self._mid, self.K * cc])
        yq = self._Qb.T @ target
        perp = float(target @ target - yq @ yq)
        rad2 = self._half2 + (self.K * tol) ** 2 - max(perp, 0.0) + 1e-9 * (1.0 + self._half2)
        max_sol = max(1, int(max_sol))
        buf = np.zeros((max_sol, self.n), np.int64)
        if rad2 < 0:
            return [], 0, False
        ns, nodes, st = _enumerate(self._R, yq, rad2, self._U, self._M, c, self._lo, self._hi,
                                   float(tol), self.shift_canon, int(max_nodes), max_sol, buf)
        return [buf[i].copy() for i in range(ns)], int(nodes), bool(st)
