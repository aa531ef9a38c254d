"""Numerical laboratory for weak instability of Hamiltonian equilibria."""

from weakstab.core import CATALOG, GFunction, HamiltonianSystem, PhaseState, catalog_build, eval_hamiltonian, vector_field
from weakstab.integrate import IntegratorConfig, Trajectory, integrate
from weakstab.linalg import classify, eigenstructure, jacobian_at

__all__ = [
    "CATALOG",
    "GFunction",
    "HamiltonianSystem",
    "IntegratorConfig",
    "PhaseState",
    "Trajectory",
    "catalog_build",
    "classify",
    "eigenstructure",
    "eval_hamiltonian",
    "integrate",
    "jacobian_at",
    "vector_field",
]

__version__ = "0.1.0"
