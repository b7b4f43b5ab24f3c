"""
symplectic — Linear Symplectic Geometry for ConformalMaslov

This package contains the exact-convention linear algebra the index
computations are built on:
- linalg: Lagrangian frames, heights, signatures, coisotropic reduction
- angles: unitary representatives, angle spectra and the Δ map
"""

from .linalg import (
    CoisotropicData,
    LagrangianFrame,
    SymmetricForm,
    complex_structure,
    height,
    intersection_dim,
    is_lagrangian,
    linear_reduce,
    omega_matrix,
    orthonormalize,
    random_lagrangian,
    random_symplectic,
    signature,
    vertical_intersection_dim,
    vertical_shear,
)
from .angles import AngleSpectrum, DeltaValue, angles, delta, souriau, unitary_frame

__all__ = [
    "AngleSpectrum",
    "CoisotropicData",
    "DeltaValue",
    "LagrangianFrame",
    "SymmetricForm",
    "angles",
    "complex_structure",
    "delta",
    "height",
    "intersection_dim",
    "is_lagrangian",
    "linear_reduce",
    "omega_matrix",
    "orthonormalize",
    "random_lagrangian",
    "random_symplectic",
    "signature",
    "souriau",
    "unitary_frame",
    "vertical_intersection_dim",
    "vertical_shear",
]
