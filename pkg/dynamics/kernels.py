"""
kernels.py — Compiled RK4 Kernels for Coefficient-Table Hamiltonians

The fixed-step loop of the tangent flow, compiled with numba. The term table
of a PolyTrigHamiltonian is passed as flat arrays (coef, powers, trig, k) and
every stage evaluates the field and its Jacobian term by term.

The tangent block Z = [M | Y] is advanced by the same stages as the state;
only the trailing frame columns are re-orthonormalized after each step.
Kernels release the GIL, so a thread pool runs independent trajectories
side by side.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _monomial(powers, r, x, i, j):
    """∂_i ∂_j of Π x_l^n_l for term r; i or j = -1 skips that derivative."""
    coef = 1.0
    if i >= 0:
        coef *= powers[r, i]
    if j >= 0:
        coef *= powers[r, j] - (1 if j == i else 0)
    if coef == 0.0:
        return 0.0
    value = coef
    for l in range(x.shape[0]):
        n = powers[r, l]
        if l == i:
            n -= 1
        if l == j:
            n -= 1
        if n > 0:
            value *= x[l] ** n
    return value


@njit(cache=True, nogil=True)
def field_jacobian(coef, powers, trig, kvec, a, x, X, A):
    """
    Fill X with the vector field and A with its Jacobian at x.

    trig codes: 0 none, 1 cos, 2 sin. A = [[H_pq, H_pp], [-H_qq, -H_qp - a I]].
    """
    D = x.shape[0]
    d = D // 2
    grad = np.zeros(D)
    hess = np.zeros((D, D))
    dmono = np.empty(D)
    for r in range(coef.shape[0]):
        s = 0.0
        for i in range(D):
            s += kvec[r, i] * x[i]
        if trig[r] == 1:
            T, T1, T2 = math.cos(s), -math.sin(s), -math.cos(s)
        elif trig[r] == 2:
            T, T1, T2 = math.sin(s), math.cos(s), -math.sin(s)
        else:
            T, T1, T2 = 1.0, 0.0, 0.0
        c = coef[r]
        mono = _monomial(powers, r, x, -1, -1)
        for i in range(D):
            dmono[i] = _monomial(powers, r, x, i, -1)
        for i in range(D):
            grad[i] += c * (T * dmono[i] + mono * T1 * kvec[r, i])
            for j in range(i, D):
                v = c * (
                    T * _monomial(powers, r, x, i, j)
                    + T1 * (dmono[i] * kvec[r, j] + dmono[j] * kvec[r, i])
                    + T2 * mono * kvec[r, i] * kvec[r, j]
                )
                hess[i, j] += v
                if j != i:
                    hess[j, i] += v
    for i in range(d):
        X[i] = grad[d + i]
        X[d + i] = -grad[i] - a * x[d + i]
        for j in range(d):
            A[i, j] = hess[d + i, j]
            A[i, d + j] = hess[d + i, d + j]
            A[d + i, j] = -hess[i, j]
            A[d + i, d + j] = -hess[i, d + j]
        A[d + i, d + i] -= a


@njit(cache=True, nogil=True)
def _orthonormalize_tail(Z, first):
    """Modified Gram-Schmidt on columns first.. of Z (positive R diagonal, like QR)."""
    D, cols = Z.shape
    for j in range(first, cols):
        for i in range(first, j):
            dot = 0.0
            for r in range(D):
                dot += Z[r, i] * Z[r, j]
            for r in range(D):
                Z[r, j] -= dot * Z[r, i]
        norm = 0.0
        for r in range(D):
            norm += Z[r, j] * Z[r, j]
        norm = math.sqrt(norm)
        if norm > 0.0:
            for r in range(D):
                Z[r, j] /= norm


@njit(cache=True, nogil=True)
def _all_finite(x, Z):
    for v in x.ravel():
        if not math.isfinite(v):
            return False
    for v in Z.ravel():
        if not math.isfinite(v):
            return False
    return True


@njit(cache=True, nogil=True)
def rk4_table(coef, powers, trig, kvec, grid, rates, x0, Z0, frame_start, pinned,
              states, tangents):
    """
    Integrate x and Z over grid, writing every sample.

    Args:
        rates: (n - 1, 3) conformal rate at t_k, t_k + h/2 and t_{k+1}
        Z0: initial tangent block (2d, c); columns frame_start.. are a frame
        pinned: hold x fixed and reuse the Jacobian at x0
        states, tangents: outputs of shape (n, 2d) and (n, 2d, c)

    Returns:
        Index of the first non-finite sample, or -1
    """
    n = grid.shape[0]
    D = x0.shape[0]
    cols = Z0.shape[1]
    x = x0.copy()
    Z = Z0.copy()
    xs = np.empty(D)
    zs = np.empty((D, cols))
    kx = np.zeros((4, D))
    kz = np.empty((4, D, cols))
    X = np.empty(D)
    A = np.empty((D, D))
    states[0] = x
    tangents[0] = Z
    if pinned and n > 1:
        field_jacobian(coef, powers, trig, kvec, rates[0, 0], x, X, A)
    for k in range(n - 1):
        h = grid[k + 1] - grid[k]
        for stage in range(4):
            if stage == 0:
                xs[:] = x
                zs[:, :] = Z
            else:
                step = h if stage == 3 else 0.5 * h
                for r in range(D):
                    xs[r] = x[r] + step * kx[stage - 1, r]
                    for c in range(cols):
                        zs[r, c] = Z[r, c] + step * kz[stage - 1, r, c]
            if not pinned:
                field_jacobian(coef, powers, trig, kvec, rates[k, (stage + 1) // 2], xs, X, A)
                kx[stage] = X
            for r in range(D):
                for c in range(cols):
                    acc = 0.0
                    for m in range(D):
                        acc += A[r, m] * zs[m, c]
                    kz[stage, r, c] = acc
        sixth = h / 6.0
        for r in range(D):
            x[r] += sixth * (kx[0, r] + 2.0 * kx[1, r] + 2.0 * kx[2, r] + kx[3, r])
            for c in range(cols):
                Z[r, c] += sixth * (kz[0, r, c] + 2.0 * kz[1, r, c] + 2.0 * kz[2, r, c]
                                    + kz[3, r, c])
        _orthonormalize_tail(Z, frame_start)
        if not _all_finite(x, Z):
            return k + 1
        states[k + 1] = x
        tangents[k + 1] = Z
    return -1
