"""Entanglement of the supersymmetric ground state of the anti-ferromagnetic LMG model."""

__version__ = "0.1.0"

from .entanglement import (
    OrderingPolicy,
    amplitude_matrix,
    analyze,
    entropy_bits,
    entropy_curve,
    gaussian_estimate,
    geometric_entanglement,
    lambda_max,
    maximize_overlap,
    schmidt,
)
from .hamiltonian import build_lmg, susy_report
from .jacobi import ConvergenceError, jacobi_eigh
from .specfun import Spin
from .state import CouplingParams, build_susy_state

__all__ = [
    "ConvergenceError",
    "CouplingParams",
    "OrderingPolicy",
    "Spin",
    "amplitude_matrix",
    "analyze",
    "build_lmg",
    "build_susy_state",
    "entropy_bits",
    "entropy_curve",
    "gaussian_estimate",
    "geometric_entanglement",
    "jacobi_eigh",
    "lambda_max",
    "maximize_overlap",
    "schmidt",
    "susy_report",
]
