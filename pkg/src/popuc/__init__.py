"""Zeros of paraorthogonal polynomials on the unit circle as eigenvalues of
unitary Hessenberg matrices, and certificates for their monotone motion."""

from .errors import (
    ConstructionFault,
    ConvergenceError,
    FamilyError,
    NotPositiveDefiniteError,
    ParameterError,
    PopucError,
    SingularMatrixError,
    SpectrumCollisionError,
    TrackingError,
)
from .schur import (
    SchurParameters,
    build_hessenberg,
    popuc_zeros,
    random_parameters,
    recover_parameters,
)
from .tridiag import BetaSequence, DissipativeSystem, assemble_system, beta_from_charpoly, system_for
from .monotone import (
    classify_beta_point,
    classify_matrix_point,
    derivatives,
    motion_certificate,
    scan_intervals,
    track_eigenangles,
)
from .families import HypergeometricFamily, Table1Family, chain_sequence_check

__version__ = "0.1.0"
