"""Exactly solvable effective-mass models from paired ladder operators.

The package builds partner Hamiltonians for a position-dependent mass,
derives their full spectra algebraically, and checks every prediction
against an independent finite-difference eigensolver.
"""

from __future__ import annotations

from .domain import (
    AlgebraicMass,
    Branch,
    Classification,
    ConstantMass,
    Grid,
    GridFunction,
    HyperbolicMass,
    MassProfile,
    OrderingParams,
    ReductionType,
    SIParams,
    SingularityReport,
    SpectrumEntry,
    WLabel,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraicMass",
    "Branch",
    "Classification",
    "ConstantMass",
    "Grid",
    "GridFunction",
    "HyperbolicMass",
    "MassProfile",
    "OrderingParams",
    "ReductionType",
    "SIParams",
    "SingularityReport",
    "SpectrumEntry",
    "WLabel",
    "validate",
    "__version__",
]
