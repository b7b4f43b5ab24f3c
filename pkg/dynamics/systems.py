"""
systems.py — Conformally Symplectic Systems and Builtin Constructors

A ConformalSystem couples a Hamiltonian H(t, q, p) with a conformal rate
a(t). Its vector field solves i_X ω = dH - a λ with λ = p dq:

    q' =  ∂H/∂p
    p' = -∂H/∂q - a(t) p

Builtins are expressed as coefficient tables of PolyTrigHamiltonian so every
one of them has closed-form first and second partials.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from utils.errors import ConfigError, NumericalError
from utils.logger import get_logger
from .hamiltonians import FiniteDifferenceHamiltonian, Hamiltonian, PolyTrigHamiltonian, Term

logger = get_logger(__name__)

# How user coefficient tables are differentiated
DERIVATIVE_MODES = ("analytic", "finite-difference")


@dataclass(frozen=True, eq=False)
class ConformalSystem:
    """
    Hamiltonian plus conformal rate on R^2d (or a torus chart).

    Attributes:
        hamiltonian: object with value(t, x) and derivatives(t, x)
        rate: constant rate a, or a callable a(t)
        angle_coords: per-coordinate flag, True for angle-valued q_i (period 2π)
        name: label used in logs and reports
        params: constructor parameters, echoed into reports
    """

    hamiltonian: Hamiltonian
    rate: float | Callable[[float], float] = 0.0
    angle_coords: tuple[bool, ...] = ()
    name: str = "custom"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.angle_coords:
            object.__setattr__(self, "angle_coords", (False,) * self.dim)
        if len(self.angle_coords) != self.dim:
            raise ConfigError(
                f"angle_coords has {len(self.angle_coords)} flags for dimension {self.dim}"
            )

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    @property
    def constant_rate(self) -> bool:
        return not callable(self.rate)

    @property
    def autonomous(self) -> bool:
        return bool(self.hamiltonian.autonomous) and self.constant_rate

    def rate_at(self, t: float) -> float:
        return float(self.rate(t)) if callable(self.rate) else float(self.rate)

    def energy(self, t: float, x: np.ndarray) -> float:
        return self.hamiltonian.value(t, np.asarray(x, dtype=float))

    def field_and_jacobian(self, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Vector field X(t, x) and its Jacobian DX(t, x).

        DX = [[H_pq, H_pp], [-H_qq, -H_qp - a I]] in (q, p) blocks.

        Raises:
            NumericalError: if the Hamiltonian cannot be evaluated at (t, x)
        """
        d = self.dim
        try:
            grad, hess = self.hamiltonian.derivatives(t, x)
        except (ArithmeticError, ValueError, TypeError) as e:
            raise NumericalError(f"Hamiltonian evaluation failed at t = {t:.6g}, x = {x}: {e}") from e
        a = self.rate_at(t)
        X = np.concatenate([grad[d:], -grad[:d] - a * x[d:]])
        DX = np.empty((2 * d, 2 * d))
        DX[:d, :d] = hess[d:, :d]
        DX[:d, d:] = hess[d:, d:]
        DX[d:, :d] = -hess[:d, :d]
        DX[d:, d:] = -hess[:d, d:] - a * np.eye(d)
        return X, DX

    def field(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.field_and_jacobian(t, x)[0]

    def jacobian(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.field_and_jacobian(t, x)[1]

    def wrap(self, states: np.ndarray) -> np.ndarray:
        """Reduce angle-valued q coordinates to [0, 2π); other coordinates untouched."""
        out = np.array(states, dtype=float, copy=True)
        for i, is_angle in enumerate(self.angle_coords):
            if is_angle:
                out[..., i] = np.mod(out[..., i], 2.0 * np.pi)
        return out

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, "dim": self.dim, "params": dict(self.params)}


def vector_field(sys: ConformalSystem, t: float, q, p) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate (q', p') at time t.

    Args:
        sys: The conformal system
        t: Time
        q: Position (length d)
        p: Momentum (length d)

    Returns:
        Tuple of (q', p') arrays
    """
    x = np.concatenate([np.atleast_1d(np.asarray(q, dtype=float)),
                        np.atleast_1d(np.asarray(p, dtype=float))])
    if len(x) != 2 * sys.dim:
        raise ConfigError(f"State has {len(x)} entries, expected {2 * sys.dim}")
    X = sys.field(t, x)
    return X[: sys.dim], X[sys.dim:]


# ══════════════════════════════════════════════════════════════════════════════
# Coefficient-table helpers
# ══════════════════════════════════════════════════════════════════════════════

def _unit(dim: int, i: int, power: int = 1) -> tuple[int, ...]:
    return tuple(power if j == i else 0 for j in range(dim))


def _kinetic_terms(dim: int) -> list[Term]:
    """½ |p|^2"""
    zeros = (0,) * dim
    return [Term(0.5, zeros, _unit(dim, i, 2)) for i in range(dim)]


def _quadratic_terms(S: np.ndarray) -> list[Term]:
    """½ x^T S x over x = (q, p)."""
    n = S.shape[0]
    d = n // 2
    terms = []
    for i in range(n):
        for j in range(i, n):
            coef = 0.5 * S[i, i] if i == j else S[i, j]
            if coef == 0.0:
                continue
            powers = [0] * n
            powers[i] += 1
            powers[j] += 1
            terms.append(Term(float(coef), tuple(powers[:d]), tuple(powers[d:])))
    return terms


def _potential_terms(dim: int, potential: Sequence[Mapping[str, Any]]) -> list[Term]:
    terms = [Term.from_dict(raw, dim) for raw in potential]
    for term in terms:
        if any(term.p_powers):
            raise ConfigError("Potential terms must not depend on p")
    return terms


# ══════════════════════════════════════════════════════════════════════════════
# Builtin systems
# ══════════════════════════════════════════════════════════════════════════════

def harmonic(dim: int = 1, rate: float = 0.0) -> ConformalSystem:
    """H = (|q|^2 + |p|^2) / 2."""
    zeros = (0,) * dim
    terms = [Term(0.5, _unit(dim, i, 2), zeros) for i in range(dim)] + _kinetic_terms(dim)
    return ConformalSystem(PolyTrigHamiltonian(dim, terms), rate, name="harmonic",
                           params={"dim": dim, "rate": rate})


def free(dim: int = 1, rate: float = 0.0) -> ConformalSystem:
    """H = |p|^2 / 2."""
    return ConformalSystem(PolyTrigHamiltonian(dim, _kinetic_terms(dim)), rate, name="free",
                           params={"dim": dim, "rate": rate})


def damped_pendulum(rate: float = 0.1) -> ConformalSystem:
    """H = p^2/2 - cos q with conformal rate a; q is an angle."""
    terms = _kinetic_terms(1) + [Term(-1.0, (0,), (0,), "cos", (1.0,))]
    return ConformalSystem(PolyTrigHamiltonian(1, terms), rate, (True,), name="damped_pendulum",
                           params={"rate": rate})


def discounted_tonelli(
    potential: Sequence[Mapping[str, Any]],
    rate: float = 0.1,
    dim: int = 1,
    angle_coords: Sequence[bool] | None = None,
) -> ConformalSystem:
    """
    H = |p|^2/2 + V(q) with V given as a list of q-only terms.

    Args:
        potential: Term dictionaries ({coef, q_powers, trig, k})
        rate: Conformal rate a
        dim: Dimension d
        angle_coords: Optional per-coordinate angle flags
    """
    if not potential:
        raise ConfigError("discounted_tonelli needs at least one potential term")
    terms = _kinetic_terms(dim) + _potential_terms(dim, potential)
    flags = tuple(bool(f) for f in angle_coords) if angle_coords is not None else ()
    return ConformalSystem(PolyTrigHamiltonian(dim, terms), rate, flags, name="discounted_tonelli",
                           params={"potential": [dict(p) for p in potential], "rate": rate,
                                   "dim": dim})


def linear(S, rate: float = 0.0) -> ConformalSystem:
    """H = ½ x^T S x for a symmetric 2d x 2d matrix S."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise ConfigError(f"linear system needs a 2d x 2d matrix, got shape {S.shape}")
    if np.max(np.abs(S - S.T)) > 1e-12 * max(1.0, float(np.max(np.abs(S)))):
        raise ConfigError("linear system matrix must be symmetric")
    terms = _quadratic_terms(0.5 * (S + S.T))
    d = S.shape[0] // 2
    if not terms:
        terms = [Term(0.0, (0,) * d, (0,) * d)]
    return ConformalSystem(PolyTrigHamiltonian(d, terms), rate, name="linear",
                           params={"S": S.tolist(), "rate": rate})


def torus_coupled(eps: float = 0.1, rate: float = 0.0) -> ConformalSystem:
    """H = ½|p|^2 - cos q1 - ε cos(q1 - q2) on T*T^2."""
    terms = _kinetic_terms(2) + [
        Term(-1.0, (0, 0), (0, 0), "cos", (1.0, 0.0)),
        Term(-float(eps), (0, 0), (0, 0), "cos", (1.0, -1.0)),
    ]
    return ConformalSystem(PolyTrigHamiltonian(2, terms), rate, (True, True), name="torus_coupled",
                           params={"eps": eps, "rate": rate})


def polynomial(
    dim: int,
    terms: Sequence[Mapping[str, Any]],
    rate: float = 0.0,
    angle_coords: Sequence[bool] | None = None,
    derivatives: str = "analytic",
) -> ConformalSystem:
    """
    System from a user coefficient table.

    derivatives="finite-difference" differentiates the table by central
    differences (Python stepper) instead of in closed form.
    """
    if derivatives not in DERIVATIVE_MODES:
        raise ConfigError(f"derivatives must be one of {DERIVATIVE_MODES}, got {derivatives!r}")
    table = PolyTrigHamiltonian.from_dicts(dim, terms)
    ham: Hamiltonian = table
    if derivatives == "finite-difference":
        ham = FiniteDifferenceHamiltonian.from_table(table)
    flags = tuple(bool(f) for f in angle_coords) if angle_coords is not None else ()
    return ConformalSystem(ham, rate, flags, name="hamiltonian",
                           params={"dim": dim, "terms": [t.to_dict() for t in table.terms],
                                   "rate": rate, "derivatives": derivatives})


BUILTINS: dict[str, Callable[..., ConformalSystem]] = {
    "harmonic": harmonic,
    "free": free,
    "damped_pendulum": damped_pendulum,
    "discounted_tonelli": discounted_tonelli,
    "linear": linear,
    "torus_coupled": torus_coupled,
}

# Default half-dimension of each builtin (used by schema validation)
BUILTIN_DIMS: dict[str, int] = {
    "harmonic": 1,
    "free": 1,
    "damped_pendulum": 1,
    "discounted_tonelli": 1,
    "linear": 1,
    "torus_coupled": 2,
}


def builtin_dim(name: str, params: Mapping[str, Any]) -> int:
    """Half-dimension a builtin will have for the given parameters."""
    if name == "linear" and "S" in params:
        return len(params["S"]) // 2
    if "dim" in params:
        return int(params["dim"])
    return BUILTIN_DIMS[name]


def build_system(section: Mapping[str, Any]) -> ConformalSystem:
    """
    Build a ConformalSystem from the `system` section of a run configuration.

    Raises:
        ConfigError: for unknown builtins or parameters the constructor rejects
    """
    if "builtin" in section:
        name = section["builtin"]
        if name not in BUILTINS:
            raise ConfigError(f"Unknown builtin system '{name}'")
        params = dict(section.get("params") or {})
        try:
            system = BUILTINS[name](**params)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Bad parameters for builtin '{name}': {e}") from e
    else:
        ham = section["hamiltonian"]
        system = polynomial(ham["dim"], ham["terms"], float(section.get("rate", 0.0)),
                            ham.get("angle_coords"), ham.get("derivatives", "analytic"))
    rate = system.params.get("rate", "custom")
    logger.info(f"Built system '{system.name}' (d = {system.dim}, rate = {rate})")
    return system
