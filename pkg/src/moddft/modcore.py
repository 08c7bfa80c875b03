"""Modulo operators and the folded DFT / Vandermonde forward models.

A folded measurement is ``z = C(A s)`` where ``C`` is the centered modulo
map into ``[-1/2, 1/2)`` applied to real and imaginary parts separately.
Equivalently ``z = A s + eps`` with ``eps`` a Gaussian integer vector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ConstraintError, DecompositionError, DomainError

__all__ = [
    "GaussianIntegerVector",
    "SensingConfig",
    "centered_mod",
    "complex_mod",
    "dft_matrix",
    "dft_apply",
    "adjoint_dft",
    "vandermonde_matrix",
    "sensing_matrix",
    "forward",
    "fold_decompose",
]


def _finite(a, name="input"):
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite entries")
    return a


def centered_mod(t, scale=1.0):
    """Fold real values into ``[-scale/2, scale/2)``.

    Parameters
    ----------
    t : array_like of float
        Values to fold.
    scale : float, optional
        Dynamic range ``lambda``; the result is ``lambda * C(t / lambda)``.

    Returns
    -------
    ndarray
        ``t - scale * floor(t / scale + 1/2)``.

    Examples
    --------
    >>> centered_mod([0.5, -0.5, 3.25]).tolist()
    [-0.5, -0.5, 0.25]
    """
    t = _finite(np.asarray(t, dtype=float))
    if not scale > 0:
        raise DomainError("scale must be positive")
    u = t / scale
    out = u - np.floor(u + 0.5)
    # u just below +1/2 can round up to exactly 0.5 in floating point
    out = np.where(out >= 0.5, out - 1.0, out)
    return scale * out


def complex_mod(u, scale=1.0):
    """Apply :func:`centered_mod` to real and imaginary parts."""
    u = _finite(np.asarray(u, dtype=complex))
    return centered_mod(u.real, scale) + 1j * centered_mod(u.imag, scale)


@dataclass(frozen=True)
class GaussianIntegerVector:
    """Vector with exact integer real and imaginary parts.

    Attributes
    ----------
    re, im : ndarray of int64
        Real and imaginary parts, equal length.
    """

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        re = np.array(self.re, dtype=np.int64).ravel()
        im = np.array(self.im, dtype=np.int64).ravel()
        if re.shape != im.shape:
            raise DomainError("real and imaginary parts differ in length")
        re.setflags(write=False)
        im.setflags(write=False)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n, np.int64), np.zeros(n, np.int64))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[int]]):
        arr = np.array(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def __len__(self):
        return self.re.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GaussianIntegerVector):
            return NotImplemented
        return np.array_equal(self.re, other.re) and np.array_equal(self.im, other.im)

    def __hash__(self):
        return hash((self.re.tobytes(), self.im.tobytes()))

    def __add__(self, other):
        return GaussianIntegerVector(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return GaussianIntegerVector(self.re - other.re, self.im - other.im)

    def to_complex(self):
        return self.re.astype(float) + 1j * self.im.astype(float)

    def to_pairs(self):
        return [[int(a), int(b)] for a, b in zip(self.re, self.im)]

    def sort_key(self):
        """Lexicographic key: real parts first, then imaginary parts."""
        return tuple(self.re.tolist()) + tuple(self.im.tolist())

    def __repr__(self):
        body = ", ".join(f"{a}{b:+d}j" for a, b in zip(self.re, self.im))
        return f"GaussianIntegerVector([{body}])"


@lru_cache(maxsize=64)
def _dft_cached(N):
    k = np.arange(N)
    # reduce the exponent mod N before evaluating trig functions
    ang = -2.0 * np.pi * (np.outer(k, k) % N) / N
    F = (np.cos(ang) + 1j * np.sin(ang)) / np.sqrt(N)
    F.setflags(write=False)
    return F


def dft_matrix(N):
    """Unitary DFT matrix with entries ``exp(-2j pi n1 n2 / N) / sqrt(N)``.

    The returned array is read-only and shared between callers.
    """
    N = int(N)
    if N < 1:
        raise DomainError("N must be positive")
    return _dft_cached(N)


def dft_apply(s):
    """Return ``F s`` for the unitary DFT matrix ``F``."""
    s = _finite(np.asarray(s, dtype=complex), "s")
    return dft_matrix(s.shape[0]) @ s


def adjoint_dft(y):
    """Return ``F^H y``; inverse of :func:`dft_apply`."""
    y = _finite(np.asarray(y, dtype=complex), "y")
    return dft_matrix(y.shape[0]).conj().T @ y


def vandermonde_matrix(nodes):
    """Vandermonde matrix ``W[i, j] = nodes[j] ** i``."""
    a = np.asarray(nodes, dtype=complex)
    return a[None, :] ** np.arange(a.shape[0])[:, None]


@dataclass(frozen=True)
class SensingConfig:
    """Sensing model: size, zero-index set and matrix kind.

    Parameters
    ----------
    N : int
        Number of measurements.
    V : iterable of int
        Indices where the signal is known to be zero.
    matrix_kind : {'dft', 'vandermonde'}
    nodes : sequence of complex, optional
        Vandermonde nodes, required when ``matrix_kind='vandermonde'``.
    """

    N: int
    V: frozenset = field(default_factory=frozenset)
    matrix_kind: str = "dft"
    nodes: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "V", frozenset(int(v) for v in self.V))
        if self.N < 1:
            raise DomainError("N must be positive")
        if any(v < 0 or v >= self.N for v in self.V):
            raise DomainError(f"V must be a subset of 0..{self.N - 1}")
        if self.matrix_kind == "vandermonde":
            if self.nodes is None or len(self.nodes) != self.N:
                raise DomainError("vandermonde model needs exactly N nodes")
            object.__setattr__(self, "nodes", tuple(complex(a) for a in self.nodes))
        elif self.matrix_kind != "dft":
            raise DomainError(f"unknown matrix kind {self.matrix_kind!r}")

    @property
    def V_sorted(self):
        return sorted(self.V)


def sensing_matrix(cfg: SensingConfig):
    if cfg.matrix_kind == "dft":
        return dft_matrix(cfg.N)
    return vandermonde_matrix(cfg.nodes)


def forward(s, cfg: SensingConfig, scale=1.0):
    """Folded measurements ``z = C(A s)``.

    Raises
    ------
    ConstraintError
        If ``s`` is nonzero at an index of ``cfg.V``.
    """
    s = _finite(np.asarray(s, dtype=complex), "s")
    if s.shape != (cfg.N,):
        raise DomainError(f"s must have length {cfg.N}")
    bad = [v for v in cfg.V_sorted if s[v] != 0]
    if bad:
        raise ConstraintError(f"s is nonzero at zero-indices {bad}")
    return complex_mod(sensing_matrix(cfg) @ s, scale)


def fold_decompose(z, y, tol=1e-9):
    """Extract the Gaussian integer vector ``eps = z - y``.

    Parameters
    ----------
    z, y : array_like of complex
        Folded and unfolded measurements of equal length.
    tol : float
        Allowed infinity-norm distance of ``z - y`` from the rounded vector.

    Returns
    -------
    GaussianIntegerVector
    """
    z = _finite(np.asarray(z, dtype=complex), "z")
    y = _finite(np.asarray(y, dtype=complex), "y")
    if z.shape != y.shape:
        raise DomainError("z and y differ in length")
    d = z - y
    re = np.rint(d.real)
    im = np.rint(d.imag)
    err = float(np.max(np.abs(np.concatenate([d.real - re, d.imag - im])))) if d.size else 0.0
    if err > tol:
        raise DecompositionError(f"z - y is {err:.3g} away from a Gaussian integer vector (tol {tol:g})")
    return GaussianIntegerVector(re.astype(np.int64), im.astype(np.int64))
