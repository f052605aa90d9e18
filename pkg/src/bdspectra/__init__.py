"""Spectra, eigenvalue derivatives and monotonicity sets of time-dependent
birth-death and random-walk matrices."""

from .dsl import CoeffExpr, Dual, eval_dual, parse_expr
from .eigen_tri import eigenvalues_bisect, eigenvector_q, interlacing_check, sign_changes, spectrum
from . import errors
from .errors import *  # noqa: F401,F403
from .model import (
    BirthDeathSpec, RandomWalkSpec, TriGeneral, TriSym, assemble_A, assemble_B, assemble_S,
    golub_kahan_reduce, load_problem, rw_to_bd_hat,
)
from .monotonicity import ALL_CRITERIA, classify, scan
from .spectral_calculus import aux_sequences, bounds, lambda_prime

__all__ = [
    "CoeffExpr", "Dual", "eval_dual", "parse_expr",
    "eigenvalues_bisect", "eigenvector_q", "interlacing_check", "sign_changes", "spectrum",
    "BirthDeathSpec", "RandomWalkSpec", "TriGeneral", "TriSym", "assemble_A", "assemble_B",
    "assemble_S", "golub_kahan_reduce", "load_problem", "rw_to_bd_hat",
    "ALL_CRITERIA", "classify", "scan", "aux_sequences", "bounds", "lambda_prime",
    *errors.__all__,
]

__version__ = "0.1.0"
