"""Exact cyclotomic arithmetic and root-class partitions of ``x^N - 1``.

Everything here is integer arithmetic; no floating-point roots of unity are
used.  Polynomials are tuples of Python ints in ascending degree.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import DomainError

__all__ = [
    "CyclotomicPoly",
    "FactorPartition",
    "divisors",
    "euler_phi",
    "poly_mul",
    "poly_divmod",
    "cyclotomic_poly",
    "partition_rational",
    "partition_gaussian",
    "h_of",
    "H_of",
]


def divisors(N):
    """Ascending list of the positive divisors of ``N``."""
    N = int(N)
    if N < 1:
        raise DomainError("N must be positive")
    small, large = [], []
    d = 1
    while d * d <= N:
        if N % d == 0:
            small.append(d)
            if d * d != N:
                large.append(N // d)
        d += 1
    return small + large[::-1]


def euler_phi(n):
    n = int(n)
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return tuple(_trim(out))


def poly_divmod(a, b):
    """Exact division of integer polynomials by a monic divisor ``b``.

    Returns
    -------
    (quotient, remainder) : tuple of tuple of int
    """
    a = _trim(a)
    b = _trim(b)
    if b[-1] != 1:
        raise DomainError("divisor must be monic")
    rem = list(a)
    db = len(b) - 1
    if len(rem) - 1 < db:
        return (0,), tuple(rem)
    q = [0] * (len(rem) - db)
    for i in range(len(rem) - 1, db - 1, -1):
        coef = rem[i]
        if coef:
            q[i - db] = coef
            for j in range(db + 1):
                rem[i - db + j] -= coef * b[j]
    return tuple(_trim(q)), tuple(_trim(rem[:db] or [0]))


@dataclass(frozen=True)
class CyclotomicPoly:
    """The ``d``-th cyclotomic polynomial with exact integer coefficients."""

    d: int
    coeffs: tuple

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __str__(self):
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            mag = abs(c)
            body = str(mag) if (mag != 1 or k == 0) else ""
            if mono and body:
                body += "*"
            terms.append(("-" if c < 0 else "+", body + mono))
        if not terms:
            return "0"
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, t in terms[1:]:
            s += f" {sign} {t}"
        return s


_PHI_MEMO: dict[int, tuple] = {}
_PHI_LOCK = threading.Lock()


def cyclotomic_poly(d):
    """Return ``Phi_d`` computed as ``(x^d - 1) / prod_{e | d, e < d} Phi_e``.

    Results are memoized in a lock-protected table.

    Examples
    --------
    >>> cyclotomic_poly(4).coeffs
    (1, 0, 1)
    """
    d = int(d)
    if d < 1:
        raise DomainError("d must be positive")
    with _PHI_LOCK:
        hit = _PHI_MEMO.get(d)
    if hit is None:
        num = (-1,) + (0,) * (d - 1) + (1,)
        for e in divisors(d)[:-1]:
            num, r = poly_divmod(num, cyclotomic_poly(e).coeffs)
            if any(r):
                raise ArithmeticError(f"inexact division while building Phi_{d}")
        hit = num
        with _PHI_LOCK:
            _PHI_MEMO.setdefault(d, hit)
    return CyclotomicPoly(d, hit)


@dataclass(frozen=True)
class FactorPartition:
    """Partition of ``{0..N-1}`` by the irreducible factor owning each root.

    Attributes
    ----------
    N : int
    field : {'rational', 'gaussian_rational'}
    classes : tuple of tuple of int
        Sorted index classes; ``classes[k]`` holds the exponents ``n`` such
        that ``exp(2j pi n / N)`` is a root of the k-th factor.
    divisor_of : tuple of int
        The divisor ``d`` (order of the roots) for each class.
    """

    N: int
    field: str
    classes: tuple
    divisor_of: tuple

    @property
    def K(self):
        return len(self.classes)

    def class_of(self, n):
        for k, c in enumerate(self.classes):
            if n in c:
                return k
        raise DomainError(f"{n} not in 0..{self.N - 1}")

    def as_sets(self):
        return [set(c) for c in self.classes]


def _rational_classes(N):
    out = []
    for d in divisors(N):
        g = N // d
        out.append((d, tuple(n for n in range(N) if gcd(n, N) == g)))
    return out


def partition_rational(N):
    """Classes ``S_d = {n : gcd(n, N) = N/d}``, one per divisor ``d``."""
    N = int(N)
    pairs = _rational_classes(N)
    return FactorPartition(N, "rational", tuple(c for _, c in pairs), tuple(d for d, _ in pairs))


def partition_gaussian(N):
    """Root classes of the irreducible factors of ``x^N - 1`` over ``Q[j]``.

    A rational class of order ``d`` with ``4 | d`` splits in two according to
    ``(n d / N) mod 4``; other classes stay whole.

    Examples
    --------
    >>> partition_gaussian(6).classes
    ((0,), (3,), (2, 4), (1, 5))
    """
    N = int(N)
    classes, ds = [], []
    for d, cls in _rational_classes(N):
        if d % 4 == 0:
            step = N // d
            for r in (1, 3):
                classes.append(tuple(n for n in cls if (n // step) % 4 == r))
                ds.append(d)
        else:
            classes.append(cls)
            ds.append(d)
    return FactorPartition(N, "gaussian_rational", tuple(classes), tuple(ds))


def h_of(d):
    """Threshold function ``h(d)`` as an exact fraction.

    Examples
    --------
    >>> h_of(5), h_of(12)
    (Fraction(5, 2), Fraction(12, 5))
    """
    d = int(d)
    if d < 2:
        raise DomainError("h(d) is defined for d >= 2")
    if d % 2 == 1:
        return 2 + Fraction(2, d - 1)
    if d == 2:
        return Fraction(2)
    if d % 4 == 2:
        return 2 + Fraction(8, d - 4)
    return 2 + Fraction(4, d - 2)


def H_of(N):
    """``N / max{h(d) : d | N, d > 1}`` as an exact fraction."""
    N = int(N)
    if N < 2:
        raise DomainError("H(N) is defined for N >= 2")
    return Fraction(N) / max(h_of(d) for d in divisors(N)[1:])
