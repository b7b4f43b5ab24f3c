"""
linalg.py — Symplectic Linear Algebra

Frames of Lagrangian subspaces of (R^2d, ω), isotropy and transversality
tests, height quadratic forms, signatures and linear coisotropic reduction.

Conventions (fixed across the whole package):
- Vectors are written in (q, p) block coordinates, q-components first.
- ω(u, v) = u^T Ω v with Ω = [[0, I], [-I, 0]], so ω(e_q, e_p) = 1.
- The compatible complex structure is J = [[0, -I], [I, 0]] (J e_q = e_p),
  and g = ω(·, J·) is the Euclidean metric.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, null_space, qr as pivoted_qr

from config import DEFAULT_TOLERANCES, SYMMETRY_TOL, Tolerances
from utils.errors import FrameError, TransversalityError
from utils.logger import get_logger
from utils.validators import as_real_matrix, check_frame_shape, check_symmetric

logger = get_logger(__name__)


def omega_matrix(d: int) -> np.ndarray:
    """Matrix Ω of the symplectic form on R^2d."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


def complex_structure(d: int) -> np.ndarray:
    """Standard complex structure J with J e_q = e_p."""
    return -omega_matrix(d)


def orthonormalize(F: np.ndarray) -> np.ndarray:
    """
    Thin QR with a positive R diagonal, i.e. Gram-Schmidt of the given columns.

    Accepts a single 2d x d matrix or a stack (..., 2d, d).
    """
    Q, R = np.linalg.qr(F, mode="reduced")
    signs = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return Q * signs[..., None, :]


def _smallest_singular_ratio(F: np.ndarray) -> float:
    s = np.linalg.svd(F, compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


# ══════════════════════════════════════════════════════════════════════════════
# Lagrangian frames
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    """
    A frame (2d x d matrix) whose column span is a Lagrangian subspace.

    The subspace is the datum: columns are canonicalized to an orthonormal
    frame on construction, so two frames of the same subspace differ by a
    right orthogonal factor only.

    Raises:
        FrameError: on dimension mismatch, rank deficiency or non-isotropy
    """

    columns: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        F = as_real_matrix(self.columns, "Lagrangian frame")
        check_frame_shape(F, "Lagrangian frame")
        if _smallest_singular_ratio(F) <= self.tol.rank_tol:
            raise FrameError("Lagrangian frame is rank deficient")
        Q = orthonormalize(F)
        d = Q.shape[1]
        iso = float(np.max(np.abs(Q.T @ omega_matrix(d) @ Q)))
        if iso > self.tol.iso_tol:
            raise FrameError(f"Frame is not isotropic: max|F^T Ω F| = {iso:.3e}")
        Q.setflags(write=False)
        object.__setattr__(self, "columns", Q)

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    @property
    def q_block(self) -> np.ndarray:
        return self.columns[: self.dim]

    @property
    def p_block(self) -> np.ndarray:
        return self.columns[self.dim:]

    @classmethod
    def horizontal(cls, d: int) -> "LagrangianFrame":
        """The zero-section tangent {p = 0}."""
        return cls(np.vstack([np.eye(d), np.zeros((d, d))]))

    @classmethod
    def vertical(cls, d: int) -> "LagrangianFrame":
        """The vertical V = {q = 0}."""
        return cls(np.vstack([np.zeros((d, d)), np.eye(d)]))

    @classmethod
    def graph(cls, S) -> "LagrangianFrame":
        """Graph {p = S q} of a symmetric matrix S."""
        S = check_symmetric(np.atleast_2d(np.asarray(S, dtype=float)), SYMMETRY_TOL, "graph matrix")
        d = S.shape[0]
        return cls(np.vstack([np.eye(d), S]))

    def transformed(self, M: np.ndarray) -> "LagrangianFrame":
        """Image M·L of the subspace under a (conformally) symplectic matrix."""
        return LagrangianFrame(np.asarray(M, dtype=float) @ self.columns, self.tol)

    def same_subspace(self, other: "LagrangianFrame", tol: float = 1e-9) -> bool:
        """True when both frames span the same subspace."""
        P1 = self.columns @ self.columns.T
        P2 = other.columns @ other.columns.T
        return bool(np.max(np.abs(P1 - P2)) <= tol)


def is_lagrangian(F, tol: float = DEFAULT_TOLERANCES.iso_tol) -> bool:
    """
    Check whether the columns of F span a Lagrangian subspace.

    Args:
        F: 2d x d real matrix
        tol: isotropy tolerance on the orthonormalized frame

    Returns:
        True iff rank F = d and max|F^T Ω F| <= tol

    Raises:
        FrameError: if F does not have twice as many rows as columns
    """
    F = as_real_matrix(F, "frame")
    d = check_frame_shape(F)
    if _smallest_singular_ratio(F) <= DEFAULT_TOLERANCES.rank_tol:
        return False
    Q = orthonormalize(F)
    return bool(np.max(np.abs(Q.T @ omega_matrix(d) @ Q)) <= tol)


def intersection_dim(A: np.ndarray, B: np.ndarray, tol: float = DEFAULT_TOLERANCES.rank_tol) -> int:
    """Dimension of span A ∩ span B for orthonormal frames A and B."""
    if A.shape[1] == 0 or B.shape[1] == 0:
        return 0
    s = np.linalg.svd(np.hstack([A, B]), compute_uv=False)
    full = A.shape[1] + B.shape[1]
    return int(full - np.count_nonzero(s > tol))


def vertical_intersection_dim(L: LagrangianFrame, tol: float = DEFAULT_TOLERANCES.rank_tol) -> int:
    """
    Dimension of L ∩ V, V the vertical.

    Counted as the number of singular values of the q-block of the
    orthonormal frame that fall below tol.
    """
    s = np.linalg.svd(L.q_block, compute_uv=False)
    return int(np.count_nonzero(s < tol))


# ══════════════════════════════════════════════════════════════════════════════
# Quadratic forms
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class SymmetricForm:
    """Real symmetric matrix together with its index and nullity."""

    matrix: np.ndarray
    index: int
    nullity: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def positive(self) -> int:
        return self.dim - self.index - self.nullity

    @classmethod
    def from_matrix(cls, S, sig_tol: float | None = None) -> "SymmetricForm":
        S = check_symmetric(S, SYMMETRY_TOL, "quadratic form")
        index, nullity = signature(S, sig_tol)
        return cls(S, index, nullity)


def signature(S, sig_tol: float | None = None) -> tuple[int, int]:
    """
    Index (negative eigenvalues) and nullity of a symmetric matrix.

    Args:
        S: real symmetric matrix
        sig_tol: absolute eigenvalue threshold; defaults to SIG_TOL * ||S||

    Returns:
        (index, nullity)

    Raises:
        SymmetryError: if max|S - S^T| exceeds round-off
    """
    S = check_symmetric(S, SYMMETRY_TOL, "signature argument")
    if S.size == 0:
        return 0, 0
    eig = np.linalg.eigvalsh(S)
    if sig_tol is None:
        sig_tol = DEFAULT_TOLERANCES.sig_tol * float(np.max(np.abs(eig)))
    index = int(np.count_nonzero(eig < -sig_tol))
    nullity = int(np.count_nonzero(np.abs(eig) <= sig_tol))
    return index, nullity


def _lift_through(Vref: np.ndarray, L: np.ndarray, C: np.ndarray, name: str, tol: float) -> np.ndarray:
    """Lift the complement basis C to L along Vref: returns Λ with Λ - C ∈ Vref."""
    system = np.hstack([L, -Vref])
    if _smallest_singular_ratio(system) <= tol:
        raise TransversalityError(f"{name} is not transverse to the reference subspace")
    coeffs = np.linalg.solve(system, C)
    return L @ coeffs[: L.shape[1]]


def height(
    Vref: LagrangianFrame,
    L1: LagrangianFrame,
    L2: LagrangianFrame,
    sig_tol: float | None = None,
) -> SymmetricForm:
    """
    Height of L2 above L1 relative to Vref.

    The form lives on E/Vref, written in the basis Ω·Vref of the
    g-orthogonal complement of Vref: for v in that basis, lift v to l1 ∈ L1
    and l2 ∈ L2 along Vref and evaluate ω(l1, l2). Its kernel is L1 ∩ L2.

    Raises:
        TransversalityError: if L1 or L2 meets Vref
    """
    d = Vref.dim
    if L1.dim != d or L2.dim != d:
        raise FrameError("height requires frames of equal dimension")
    omega = omega_matrix(d)
    C = omega @ Vref.columns
    rank_tol = Vref.tol.rank_tol
    lift1 = _lift_through(Vref.columns, L1.columns, C, "L1", rank_tol)
    lift2 = _lift_through(Vref.columns, L2.columns, C, "L2", rank_tol)
    B = lift1.T @ omega @ lift2
    return SymmetricForm.from_matrix(0.5 * (B + B.T), sig_tol)


# ══════════════════════════════════════════════════════════════════════════════
# Coisotropic reduction
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class CoisotropicData:
    """
    A coisotropic subspace W ⊇ W⊥ with a fixed symplectic basis of W/W⊥.

    Fields e_basis and f_basis (2d x m, m = k - d) are representatives in W of
    a symplectic basis of the quotient: ω(e_i, f_j) = δ_ij, all other pairs 0.
    """

    dim: int
    W: np.ndarray
    Wperp: np.ndarray
    e_basis: np.ndarray = field(init=False, repr=False)
    f_basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        W = as_real_matrix(self.W, "coisotropic frame")
        d, k = self.dim, W.shape[1]
        if W.shape[0] != 2 * d or not d <= k <= 2 * d:
            raise FrameError(f"coisotropic frame must be 2d x k with d <= k <= 2d, got {W.shape}")
        if _smallest_singular_ratio(W) <= DEFAULT_TOLERANCES.rank_tol:
            raise FrameError("coisotropic frame is rank deficient")
        Wperp = np.asarray(self.Wperp, dtype=float).reshape(2 * d, -1)
        if Wperp.shape[1] != 2 * d - k:
            raise FrameError(f"W⊥ must have {2 * d - k} columns, got {Wperp.shape[1]}")
        Qw = orthonormalize(W)
        if Wperp.size and np.max(np.abs(Wperp - Qw @ (Qw.T @ Wperp))) > 1e-8:
            raise FrameError("subspace is not coisotropic: W⊥ is not contained in W")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "Wperp", Wperp)
        e_basis, f_basis = _quotient_basis(W, Wperp, d, k - d)
        object.__setattr__(self, "e_basis", e_basis)
        object.__setattr__(self, "f_basis", f_basis)

    @classmethod
    def from_frame(cls, W) -> "CoisotropicData":
        """Compute W⊥ = {v : ω(w, v) = 0 for all w ∈ W} from a frame of W."""
        W = as_real_matrix(W, "coisotropic frame")
        if W.shape[0] % 2:
            raise FrameError(f"coisotropic frame needs an even number of rows, got {W.shape[0]}")
        d = W.shape[0] // 2
        Wperp = null_space(W.T @ omega_matrix(d), rcond=DEFAULT_TOLERANCES.rank_tol)
        return cls(d, W, Wperp)

    @property
    def reduced_dim(self) -> int:
        """Dimension 2k - 2d of W/W⊥."""
        return 2 * self.e_basis.shape[1]

    def reduce_vectors(self, vectors: np.ndarray) -> np.ndarray:
        """Coordinates in W/W⊥ (q-block then p-block) of vectors lying in W."""
        omega = omega_matrix(self.dim)
        x = (omega @ self.f_basis).T @ vectors
        y = self.e_basis.T @ omega @ vectors
        return np.vstack([x, y])


def _vertical_adapted_basis(
    W_off: np.ndarray, V_off: np.ndarray, omega: np.ndarray, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    Symplectic basis of W/W⊥ whose f-vectors span (V ∩ W)/W⊥.

    The reduced vertical {x = 0} is then the image of V.
    """
    _, _, pivots = pivoted_qr(V_off, mode="economic", pivoting=True)
    F = orthonormalize(V_off[:, np.sort(pivots[:m])])
    G, _, _ = np.linalg.svd(W_off, full_matrices=False)
    G = G[:, : 2 * m]
    E = G @ np.linalg.pinv(G.T @ omega @ F).T
    # shift along F to make span E isotropic; ω(E, F) = I is unchanged
    E = E - 0.5 * F @ (E.T @ omega @ E)
    return E, F


def _quotient_basis(W: np.ndarray, Wperp: np.ndarray, d: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Symplectic basis of W/W⊥, represented in W off W⊥.

    When W contains the vertical the basis is adapted to it; otherwise a
    symplectic Gram-Schmidt runs on the columns of W.
    """
    omega = omega_matrix(d)
    if Wperp.size:
        Qp = orthonormalize(Wperp)
        W_off = W - Qp @ (Qp.T @ W)
    else:
        Qp = np.zeros((2 * d, 0))
        W_off = W
    if m:
        Qw = orthonormalize(W)
        V = np.vstack([np.zeros((d, d)), np.eye(d)])
        if np.max(np.abs(V - Qw @ (Qw.T @ V))) <= 1e-8:
            return _vertical_adapted_basis(W_off, V - Qp @ (Qp.T @ V), omega, m)
    remaining = [v for v in W_off.T]
    scale = max(float(np.max(np.abs(W))), 1.0)
    e_list, f_list = [], []
    while len(e_list) < m:
        norms = [np.linalg.norm(v) for v in remaining]
        i = int(np.argmax(norms))
        if norms[i] <= DEFAULT_TOLERANCES.rank_tol * scale:
            raise FrameError("quotient W/W⊥ is degenerate")
        e = remaining[i] / norms[i]
        pairings = [e @ omega @ u for u in remaining]
        j = int(np.argmax(np.abs(pairings)))
        if abs(pairings[j]) <= DEFAULT_TOLERANCES.rank_tol:
            raise FrameError("ω is degenerate on the quotient; W is not coisotropic")
        f = remaining[j] / pairings[j]
        remaining = [
            w - (w @ omega @ f) * e + (w @ omega @ e) * f
            for n, w in enumerate(remaining) if n not in (i, j)
        ]
        e_list.append(e)
        f_list.append(f)
    if not e_list:
        return np.zeros((2 * d, 0)), np.zeros((2 * d, 0))
    return np.column_stack(e_list), np.column_stack(f_list)


def linear_reduce(
    W: CoisotropicData,
    L: LagrangianFrame,
    require_transverse: bool = True,
) -> LagrangianFrame:
    """
    Reduce a Lagrangian L to the Lagrangian (L ∩ W + W⊥)/W⊥ of W/W⊥.

    Args:
        W: coisotropic data with its quotient basis
        L: Lagrangian frame in the ambient space
        require_transverse: enforce L ∩ W⊥ = {0}, the condition under
            which reduction preserves Maslov indices of paths

    Returns:
        Frame of the reduced Lagrangian in the symplectic coordinates of W/W⊥

    Raises:
        TransversalityError: if require_transverse and L meets W⊥
        FrameError: if the quotient is trivial (W Lagrangian)
    """
    m = W.reduced_dim // 2
    if m == 0:
        raise FrameError("W is Lagrangian; the reduced space is trivial")
    tol = L.tol.rank_tol
    if require_transverse and W.Wperp.size:
        if intersection_dim(L.columns, orthonormalize(W.Wperp), tol) > 0:
            raise TransversalityError("L meets W⊥ nontrivially")
    Qw = orthonormalize(W.W)
    kernel = null_space(np.hstack([L.columns, -Qw]), rcond=tol)
    inside = L.columns @ kernel[: L.dim]
    reduced = W.reduce_vectors(inside)
    U, s, _ = np.linalg.svd(reduced, full_matrices=False)
    if len(s) < m or s[m - 1] <= tol * max(s[0], 1.0):
        raise FrameError("reduced image has deficient rank")
    return LagrangianFrame(U[:, :m], L.tol)


# ══════════════════════════════════════════════════════════════════════════════
# Generators and special matrices
# ══════════════════════════════════════════════════════════════════════════════

def random_symplectic(d: int, seed: int, scale: float | None = None) -> np.ndarray:
    """
    Random symplectic matrix exp(Ω S), S symmetric Gaussian.

    expm is a scaling-and-squaring Padé evaluation. The scale is itself
    drawn from the seed unless given, so outputs range from near-identity to
    strongly rotating maps.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((2 * d, 2 * d))
    if scale is None:
        scale = rng.uniform(0.05, 1.5)
    S = 0.5 * (A + A.T) * scale
    return expm(omega_matrix(d) @ S)


def random_lagrangian(d: int, seed: int) -> LagrangianFrame:
    """Image of the horizontal under random_symplectic(d, seed); deterministic in seed."""
    return LagrangianFrame.horizontal(d).transformed(random_symplectic(d, seed))


def vertical_shear(S) -> np.ndarray:
    """
    Differential [[I, 0], [S, I]] of the vertical translation p ↦ p + dη,
    with S = Hess η symmetric. It fixes every vertical vector.
    """
    S = check_symmetric(np.atleast_2d(np.asarray(S, dtype=float)), SYMMETRY_TOL, "shear matrix")
    d = S.shape[0]
    return np.block([[np.eye(d), np.zeros((d, d))], [S, np.eye(d)]])
