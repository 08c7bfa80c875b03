"""Identifiability predicates for folded DFT, Vandermonde and PBL models."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from numbers import Rational
from typing import Iterable

import numpy as np

from .cyclotomic import H_of, divisors, partition_gaussian, partition_rational
from .errors import DomainError

__all__ = [
    "IdentVerdict",
    "PBLConfig",
    "identifiable_full",
    "identifiable_tail",
    "gaussian_rational_indices",
    "vandermonde_necessary",
    "pbl_band",
    "pbl_identifiable_roots",
    "pbl_identifiable_HN",
    "oversampling_sufficient",
]

CONDITIONS = (
    "thm1_full",
    "coro1_tail",
    "thm3_roots",
    "thm4_HN",
    "vandermonde_necessary",
    "oversampling_sufficient",
)


@dataclass(frozen=True)
class IdentVerdict:
    """Outcome of an identifiability check.

    Attributes
    ----------
    identifiable : bool
    failing_classes : tuple of tuple of int
        Root classes missed by the zero-index set (empty when identifiable).
    condition_used : str
        One of ``CONDITIONS``.
    reason : str
        Short machine-readable note, e.g. ``"n_le_2p_plus_1"``.
    """

    identifiable: bool
    failing_classes: tuple = ()
    condition_used: str = "thm1_full"
    reason: str = ""

    def __bool__(self):
        return self.identifiable

    def to_dict(self):
        return {
            "identifiable": self.identifiable,
            "failing_classes": [list(c) for c in self.failing_classes],
            "condition_used": self.condition_used,
            "reason": self.reason,
        }


def _check_V(N, V):
    N = int(N)
    if N < 1:
        raise DomainError("N must be positive")
    Vs = frozenset(int(v) for v in V)
    if any(v < 0 or v >= N for v in Vs):
        raise DomainError(f"V must be a subset of 0..{N - 1}")
    return N, Vs


def identifiable_full(N, V: Iterable[int]):
    """True iff ``V`` meets every root class of ``x^N - 1`` over ``Q[j]``.

    Examples
    --------
    >>> identifiable_full(16, {0, 1, 3, 4, 8, 12}).failing_classes
    ((2, 10),)
    """
    N, Vs = _check_V(N, V)
    miss = tuple(c for c in partition_gaussian(N).classes if Vs.isdisjoint(c))
    return IdentVerdict(not miss, miss, "thm1_full")


def identifiable_tail(N, V: Iterable[int]):
    """Like :func:`identifiable_full` but ignoring the class ``{0}``.

    A true verdict means ``s_1..s_{N-1}`` are determined by the folded data.
    """
    N, Vs = _check_V(N, V)
    miss = tuple(c for c in partition_gaussian(N).classes if c != (0,) and Vs.isdisjoint(c))
    return IdentVerdict(not miss, miss, "coro1_tail")


def _is_exact_gaussian_rational(a):
    if isinstance(a, Rational):
        return True
    if isinstance(a, tuple) and len(a) == 2 and all(isinstance(p, Rational) for p in a):
        return True
    return None


def gaussian_rational_indices(nodes, rational_tol=1e-12, max_den=10**4):
    """Indices of nodes whose real and imaginary parts are rational.

    Exact inputs (``int``, ``Fraction`` or a ``(re, im)`` tuple of those) are
    accepted as rational without inspection.  Floating-point parts are
    reconstructed by continued fractions with denominator at most ``max_den``
    and accepted when the reconstruction is within ``rational_tol``.  With
    the defaults an irrational part sits at least about ``1/(3 max_den^2)``,
    roughly 3e-9, from every admissible fraction, far outside the tolerance.
    """
    out = []
    for i, a in enumerate(nodes):
        exact = _is_exact_gaussian_rational(a)
        if exact:
            out.append(i)
            continue
        a = complex(a)
        ok = True
        for part in (a.real, a.imag):
            if not np.isfinite(part):
                ok = False
                break
            f = Fraction(part).limit_denominator(max_den)
            if abs(float(f) - part) > rational_tol:
                ok = False
                break
        if ok:
            out.append(i)
    return out


def vandermonde_necessary(nodes, V: Iterable[int], rational_tol=1e-12, max_den=10**4):
    """Necessary condition ``V_r ⊆ V`` for a Vandermonde sensing matrix.

    ``V_r`` holds the indices of Gaussian-rational nodes.  A false verdict
    proves the model unidentifiable; a true verdict proves nothing.
    """
    nodes = list(nodes)
    N, Vs = _check_V(len(nodes), V)
    Vr = gaussian_rational_indices(nodes, rational_tol, max_den)
    miss = tuple((i,) for i in Vr if i not in Vs)
    return IdentVerdict(not miss, miss, "vandermonde_necessary", "necessary_only")


def pbl_band(N, P):
    """Zero-index band ``{P+1, ..., N-P-1}`` of a PBL model."""
    return list(range(P + 1, N - P))


def _pbl_args(N, P):
    N, P = int(N), int(P)
    if P < 1 or N < 1:
        raise DomainError("need N >= 1 and P >= 1")
    return N, P


def pbl_identifiable_roots(N, P):
    """PBL identifiability by scanning primitive roots in the zero band.

    For each divisor ``d > 1`` of ``N`` the band must contain an ``n`` with
    ``exp(2j pi n / N)`` a primitive ``d``-th root of unity, i.e. ``n`` in the
    rational class ``S_d``.  ``N <= 2P + 1`` is reported as unidentifiable
    with reason ``"n_le_2p_plus_1"``.
    """
    N, P = _pbl_args(N, P)
    if N <= 2 * P + 1:
        return IdentVerdict(False, (), "thm3_roots", "n_le_2p_plus_1")
    band = range(P + 1, N - P)
    miss = []
    for d in divisors(N)[1:]:
        step = N // d
        hit = any(n % step == 0 and gcd(d, n // step) == 1 for n in band)
        if not hit:
            miss.append(tuple(n for n in range(N) if gcd(n, N) == step))
    return IdentVerdict(not miss, tuple(miss), "thm3_roots")


def pbl_identifiable_HN(N, P):
    """PBL identifiability via the exact comparison ``H(N) >= P + 1``.

    Failing classes are the rational classes ``S_d`` with ``N / h(d) < P + 1``.
    """
    from .cyclotomic import h_of

    N, P = _pbl_args(N, P)
    if N <= 2 * P + 1:
        return IdentVerdict(False, (), "thm4_HN", "n_le_2p_plus_1")
    ok = H_of(N) >= P + 1
    miss = ()
    if not ok:
        part = partition_rational(N)
        miss = tuple(c for c, d in zip(part.classes, part.divisor_of)
                     if d > 1 and Fraction(N) / h_of(d) < P + 1)
    return IdentVerdict(ok, miss, "thm4_HN")


def oversampling_sufficient(N, P):
    """True iff ``N / (2P) >= 3 (1 + 1/P)``, i.e. ``N >= 6 (P + 1)``."""
    N, P = _pbl_args(N, P)
    return N >= 6 * (P + 1)


@dataclass(frozen=True)
class PBLConfig:
    """Periodic bandlimited signal sampled ``N`` times per period.

    Parameters
    ----------
    P : int
        Number of positive harmonics.
    N : int
        Samples per period.
    coeffs : ndarray of complex, shape (2P+1,)
        Fourier coefficients ``c_{-P}, ..., c_P`` with ``c_{-p} = conj(c_p)``.
    f0 : float
        Fundamental frequency in hertz (metadata only).
    """

    P: int
    N: int
    coeffs: np.ndarray = field(repr=False)
    f0: float = 1.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if self.P < 1 or self.N < 1:
            raise DomainError("need N >= 1 and P >= 1")
        if c.shape != (2 * self.P + 1,):
            raise DomainError(f"need {2 * self.P + 1} coefficients")
        if not np.array_equal(c[::-1], c.conj()):
            raise DomainError("coefficients must be conjugate symmetric")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_positive(cls, P, N, c_pos, c0=0.0, f0=1.0):
        """Build from ``c_1..c_P`` and a real ``c_0``."""
        c_pos = np.asarray(c_pos, dtype=complex).ravel()
        full = np.concatenate([c_pos[::-1].conj(), [complex(float(np.real(c0)), 0.0)], c_pos])
        return cls(P, N, full, f0)

    @property
    def gamma(self):
        """Oversampling factor ``N / (2P)``."""
        return Fraction(self.N, 2 * self.P)

    def samples(self):
        """Real samples ``y_n = sum_p c_p exp(2j pi p n / N)``, n = 0..N-1."""
        n = np.arange(self.N)
        p = np.arange(-self.P, self.P + 1)
        ang = 2.0 * np.pi * (np.outer(n, p) % self.N) / self.N
        y = (np.cos(ang) + 1j * np.sin(ang)) @ self.coeffs
        return y.real

    def spectrum(self):
        """Length-``N`` vector ``s`` with ``y = F s`` (zero outside the band).

        Requires ``N > 2P``.
        """
        if self.N <= 2 * self.P:
            raise DomainError("spectrum layout needs N > 2P")
        s = np.zeros(self.N, dtype=complex)
        root = np.sqrt(self.N)
        for p in range(-self.P, self.P + 1):
            # y_n = sum_k s_k exp(-2j pi k n / N) / sqrt(N): harmonic p sits at k = -p mod N
            s[(-p) % self.N] = root * self.coeffs[p + self.P]
        return s
