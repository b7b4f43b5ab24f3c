"""
dynamics — Conformally Symplectic Flows for ConformalMaslov

This package contains:
- hamiltonians: analytic coefficient-table and finite-difference Hamiltonians
- systems: ConformalSystem, the vector field and builtin systems
- flow: RK4 trajectories, linearized flow and flow-generated Lagrangian paths
"""

from .hamiltonians import FiniteDifferenceHamiltonian, PolyTrigHamiltonian, Term
from .systems import (
    BUILTINS,
    ConformalSystem,
    build_system,
    damped_pendulum,
    discounted_tonelli,
    free,
    harmonic,
    linear,
    polynomial,
    torus_coupled,
    vector_field,
)
from .flow import (
    TangentBlocks,
    TangentFlowResult,
    Trajectory,
    flow,
    lagrangian_path,
    tangent_flow,
    time_grid,
    transport_frame,
)

__all__ = [
    "BUILTINS",
    "ConformalSystem",
    "FiniteDifferenceHamiltonian",
    "PolyTrigHamiltonian",
    "TangentBlocks",
    "TangentFlowResult",
    "Term",
    "Trajectory",
    "build_system",
    "damped_pendulum",
    "discounted_tonelli",
    "flow",
    "free",
    "harmonic",
    "lagrangian_path",
    "linear",
    "polynomial",
    "tangent_flow",
    "time_grid",
    "torus_coupled",
    "transport_frame",
    "vector_field",
]
