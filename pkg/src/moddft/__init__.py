"""Identifiability and recovery for modulo-folded DFT measurements.

Submodules
----------
modcore
    Modulo operators and forward models.
cyclotomic
    Exact cyclotomic polynomials, root-class partitions, ``h(d)`` and ``H(N)``.
ident
    Identifiability predicates.
recover
    Bounded integer search for fold vectors and signal recovery.
harness
    Monte Carlo experiments, exact probabilities and region maps.
cli
    Command-line entry point (``moddft``).
"""
from .cyclotomic import H_of, cyclotomic_poly, divisors, h_of, partition_gaussian, partition_rational
from .errors import ConstraintError, DecompositionError, DomainError, EmptySupportError, ModDFTError
from .ident import (IdentVerdict, PBLConfig, identifiable_full, identifiable_tail, oversampling_sufficient,
                    pbl_identifiable_HN, pbl_identifiable_roots, vandermonde_necessary)
from .modcore import (GaussianIntegerVector, SensingConfig, adjoint_dft, centered_mod, complex_mod,
                      dft_apply, fold_decompose, forward)
from .recover import (RecoveryResult, SolverConfig, enumerate_solutions, pbl_recover, recover_signal,
                      solve_integer_equations)

__version__ = "0.1.0"
