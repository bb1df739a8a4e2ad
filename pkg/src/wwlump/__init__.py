"""Localized gravity-capillary water waves from KP-I lumps on a periodic box.

Modules: ``spectral`` (grids, fields, dealiased products), ``symbols``
(Fourier multipliers), ``lump`` (KP-I lump on the torus), ``dno``
(Dirichlet-Neumann operator and its expansion), ``linear`` (the linearised
operator, its solver and spectrum), ``nonlinear`` (the two-level fixed
point) and ``cli`` (the ``wwlump`` command).
"""

from .errors import (ConfigurationError, InvariantFailure, IterationError, NumericError,
                     OracleFailure, PreconditionError, SolverFailure, WWLumpError)
from .spectral import GridSpec, Parity, RealField

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "Parity", "RealField", "WWLumpError", "ConfigurationError", "PreconditionError",
    "NumericError", "InvariantFailure", "IterationError", "SolverFailure", "OracleFailure",
]
