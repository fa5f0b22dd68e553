"""Small exact MIP engine: bounded dual simplex plus branch-and-bound with lazy cuts."""

from .bnb import CallbackError, solve_bnb
from .model import (
    BINARY,
    CONTINUOUS,
    EQ,
    GE,
    LE,
    LinearCut,
    LinearModel,
    ModelError,
    SolveOutcome,
    Variable,
)
from .simplex import Basis, LPResult, NumericalError, solve_arrays, solve_lp

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "EQ",
    "GE",
    "LE",
    "CallbackError",
    "Basis",
    "LPResult",
    "LinearCut",
    "LinearModel",
    "ModelError",
    "NumericalError",
    "SolveOutcome",
    "Variable",
    "solve_arrays",
    "solve_bnb",
    "solve_lp",
]
