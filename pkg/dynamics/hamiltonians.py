"""
hamiltonians.py — Hamiltonian Functions with First and Second Partials

Two implementations share one interface (value / gradient / hessian over
x = (q, p)):
- PolyTrigHamiltonian: sums of coef · Π q_i^a_i · Π p_i^b_i · T(k·q) with
  T ∈ {1, cos, sin}, differentiated analytically.
- FiniteDifferenceHamiltonian: any Python callable H(t, q, p), differentiated
  by central differences with step h = fd_step · (1 + |x_i|).
"""

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Protocol, Sequence

import numpy as np

from config import FD_STEP
from utils.errors import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)

_TRIG_CODES = {None: 0, "cos": 1, "sin": 2}


class Hamiltonian(Protocol):
    dim: int
    autonomous: bool

    def value(self, t: float, x: np.ndarray) -> float: ...

    def derivatives(self, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


@dataclass(frozen=True)
class Term:
    """One monomial-times-trigonometric term of a Hamiltonian."""

    coef: float
    q_powers: tuple[int, ...]
    p_powers: tuple[int, ...]
    trig: str | None = None
    k: tuple[float, ...] = ()

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any], dim: int) -> "Term":
        try:
            q_powers = tuple(int(v) for v in raw.get("q_powers", [0] * dim))
            p_powers = tuple(int(v) for v in raw.get("p_powers", [0] * dim))
            k = tuple(float(v) for v in raw.get("k", [0.0] * dim))
            term = cls(float(raw["coef"]), q_powers, p_powers, raw.get("trig"), k)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed Hamiltonian term {raw!r}: {e}") from e
        if len(q_powers) != dim or len(p_powers) != dim or len(k) != dim:
            raise ConfigError(f"Hamiltonian term {raw!r} does not match dimension {dim}")
        if term.trig not in _TRIG_CODES:
            raise ConfigError(f"Unknown trig kind {term.trig!r}")
        return term

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "coef": self.coef,
            "q_powers": list(self.q_powers),
            "p_powers": list(self.p_powers),
        }
        if self.trig is not None:
            out["trig"] = self.trig
            out["k"] = list(self.k)
        return out


def _power_table(x: np.ndarray, n: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """x**n and its first two derivatives, entrywise for exponents n (m, D)."""
    val = x ** n
    d1 = np.where(n >= 1, n * x ** np.maximum(n - 1, 0), 0.0)
    d2 = np.where(n >= 2, n * (n - 1) * x ** np.maximum(n - 2, 0), 0.0)
    return val, d1, d2


class PolyTrigHamiltonian:
    """
    Analytic Hamiltonian H(q, p) = Σ coef · q^a · p^b · T(k·q).

    Terms are stored as arrays so one evaluation returns the gradient and the
    Hessian of every term at once.
    """

    autonomous = True

    def __init__(self, dim: int, terms: Sequence[Term]):
        if dim < 1:
            raise ConfigError(f"Hamiltonian dimension must be positive, got {dim}")
        if not terms:
            raise ConfigError("Hamiltonian needs at least one term")
        self.dim = dim
        self.terms = tuple(terms)
        self._coef = np.array([t.coef for t in terms], dtype=float)
        self._powers = np.array([t.q_powers + t.p_powers for t in terms], dtype=float)
        self._trig = np.array([_TRIG_CODES[t.trig] for t in terms])
        k = np.array([t.k if t.k else (0.0,) * dim for t in terms], dtype=float)
        self._kfull = np.hstack([k, np.zeros_like(k)])
        # coordinates carrying a power in at least one term
        self._active = np.flatnonzero(np.any(self._powers > 0, axis=0))

    @classmethod
    def from_dicts(cls, dim: int, raw_terms: Sequence[Mapping[str, Any]]) -> "PolyTrigHamiltonian":
        return cls(dim, [Term.from_dict(raw, dim) for raw in raw_terms])

    def coefficient_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(coef, integer powers, trig codes, wave vectors over x) for the compiled kernels."""
        return (
            self._coef,
            self._powers.astype(np.int64),
            self._trig.astype(np.int64),
            np.ascontiguousarray(self._kfull),
        )

    def _trig_factors(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = self._kfull @ x
        T = np.ones_like(s)
        T1 = np.zeros_like(s)
        T2 = np.zeros_like(s)
        cos_mask = self._trig == 1
        sin_mask = self._trig == 2
        T[cos_mask] = np.cos(s[cos_mask])
        T1[cos_mask] = -np.sin(s[cos_mask])
        T2[cos_mask] = -np.cos(s[cos_mask])
        T[sin_mask] = np.sin(s[sin_mask])
        T1[sin_mask] = np.cos(s[sin_mask])
        T2[sin_mask] = -np.sin(s[sin_mask])
        return T, T1, T2

    def value(self, t: float, x: np.ndarray) -> float:
        val, _, _ = _power_table(x, self._powers)
        T, _, _ = self._trig_factors(x)
        return float(np.sum(self._coef * np.prod(val, axis=1) * T))

    def derivatives(self, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Gradient (2d,) and Hessian (2d, 2d) at x."""
        m, D = self._powers.shape
        val, d1, d2 = _power_table(x, self._powers)
        mono = np.prod(val, axis=1)
        grad_mono = np.zeros((m, D))
        hess_mono = np.zeros((m, D, D))
        for i in self._active:
            rest_i = np.delete(val, i, axis=1)
            grad_mono[:, i] = d1[:, i] * np.prod(rest_i, axis=1)
            hess_mono[:, i, i] = d2[:, i] * np.prod(rest_i, axis=1)
            for j in self._active:
                if j <= i:
                    continue
                rest_ij = np.prod(np.delete(val, [i, j], axis=1), axis=1)
                hess_mono[:, i, j] = hess_mono[:, j, i] = d1[:, i] * d1[:, j] * rest_ij

        T, T1, T2 = self._trig_factors(x)
        grad_T = T1[:, None] * self._kfull
        hess_T = T2[:, None, None] * self._kfull[:, :, None] * self._kfull[:, None, :]

        c = self._coef
        grad = np.einsum("m,mi->i", c * T, grad_mono) + np.einsum("m,mi->i", c * mono, grad_T)
        cross = np.einsum("m,mi,mj->ij", c, grad_mono, grad_T)
        hess = (
            np.einsum("m,mij->ij", c * T, hess_mono)
            + cross
            + cross.T
            + np.einsum("m,mij->ij", c * mono, hess_T)
        )
        return grad, hess

    def gradient(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.derivatives(t, x)[0]

    def hessian(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.derivatives(t, x)[1]


class FiniteDifferenceHamiltonian:
    """
    Wraps a callable H(t, q, p) and differentiates it by central differences.

    The Hessian uses the symmetric four-point stencil, so it is symmetric by
    construction; its accuracy is about fd_step^2 (truncation) plus
    eps / fd_step^2 (round-off).
    """

    def __init__(
        self,
        func: Callable[[float, np.ndarray, np.ndarray], float],
        dim: int,
        fd_step: float = FD_STEP,
        autonomous: bool = False,
    ):
        self.func = func
        self.dim = dim
        self.fd_step = fd_step
        self.autonomous = autonomous

    @classmethod
    def from_table(
        cls, table: PolyTrigHamiltonian, fd_step: float = FD_STEP
    ) -> "FiniteDifferenceHamiltonian":
        """Differentiate a coefficient table numerically instead of analytically."""
        def func(t: float, q: np.ndarray, p: np.ndarray) -> float:
            return table.value(t, np.concatenate([q, p]))

        return cls(func, table.dim, fd_step, autonomous=True)

    def value(self, t: float, x: np.ndarray) -> float:
        return float(self.func(t, x[: self.dim], x[self.dim:]))

    def _steps(self, x: np.ndarray) -> np.ndarray:
        return self.fd_step * (1.0 + np.abs(x))

    def gradient(self, t: float, x: np.ndarray) -> np.ndarray:
        h = self._steps(x)
        grad = np.empty_like(x, dtype=float)
        for i in range(len(x)):
            e = np.zeros_like(x, dtype=float)
            e[i] = h[i]
            grad[i] = (self.value(t, x + e) - self.value(t, x - e)) / (2.0 * h[i])
        return grad

    def hessian(self, t: float, x: np.ndarray) -> np.ndarray:
        h = self._steps(x)
        n = len(x)
        f0 = self.value(t, x)
        hess = np.empty((n, n))
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h[i]
            hess[i, i] = (self.value(t, x + ei) - 2.0 * f0 + self.value(t, x - ei)) / h[i] ** 2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h[j]
                hess[i, j] = hess[j, i] = (
                    self.value(t, x + ei + ej)
                    - self.value(t, x + ei - ej)
                    - self.value(t, x - ei + ej)
                    + self.value(t, x - ei - ej)
                ) / (4.0 * h[i] * h[j])
        return hess

    def derivatives(self, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.gradient(t, x), self.hessian(t, x)
