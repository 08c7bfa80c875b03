"""Exception types shared across the package."""


class ModDFTError(Exception):
    """Base class for all errors raised by :mod:`moddft`."""


class DomainError(ModDFTError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConstraintError(DomainError):
    """A signal violates the zero-support constraint of its sensing model."""


class DecompositionError(DomainError):
    """``z - y`` is not a Gaussian integer vector within tolerance."""


class EmptySupportError(DomainError):
    """The zero-index set is empty, so every fold vector is feasible."""
