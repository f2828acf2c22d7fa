"""Finite-difference bending operator for a free-free beam.

The fourth derivative is written as a second difference of second
differences.  At each end the two ghost nodes are eliminated through the
centred discretisations of ``u_xx = 0`` and ``u_xxx = 0``, which amounts to
setting the end second difference to zero and mirroring the next one:

    D2[0] = 0,   D2[-1] = D2[1]          (left end)

Working in second differences keeps constants in the kernel bit-exactly and
linear functions to roundoff.  With trapezoidal node weights
``w = (1/2, 1, ..., 1, 1/2)`` the operator is self-adjoint, and ``-M`` is the
gradient of the bending energy ``mu/2 * h * sum(D2[i]**2 / h**4)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class BeamParams:
    rho: float = 1.0
    mu: float = 1.0
    length: float = 1.0

    def __post_init__(self):
        for name in ("rho", "mu", "length"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")

    def to_dict(self) -> dict:
        return {"rho": self.rho, "mu": self.mu, "length": self.length}


@dataclass(frozen=True)
class Grid:
    n_points: int
    length: float = 1.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 5:
            raise ValueError(f"n_points must be an integer >= 5, got {self.n_points!r}")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @classmethod
    def for_beam(cls, params: BeamParams, n_points: int) -> "Grid":
        return cls(int(n_points), params.length)

    @property
    def h(self) -> float:
        return self.length / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights (already multiplied by ``h``)."""
        w = np.full(self.n_points, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


@dataclass
class BeamState:
    time: float
    displacement: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        self.displacement = np.array(self.displacement, dtype=float)
        self.velocity = np.array(self.velocity, dtype=float)
        if self.displacement.shape != self.velocity.shape or self.displacement.ndim != 1:
            raise ValueError("displacement and velocity must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.displacement)) and np.all(np.isfinite(self.velocity))):
            raise ValueError("state contains non-finite entries")
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    @classmethod
    def uniform(cls, grid: Grid, u0: float, v0: float, time: float = 0.0) -> "BeamState":
        n = grid.n_points
        return cls(time, np.full(n, float(u0)), np.full(n, float(v0)))

    def copy(self) -> "BeamState":
        return BeamState(self.time, self.displacement.copy(), self.velocity.copy())


def second_difference(u: np.ndarray) -> np.ndarray:
    """Undivided second differences with the free-edge closure (zero at both ends).

    Works along the last axis, so a stack of states is handled in one call.
    """
    u = np.asarray(u, dtype=float)
    d2 = np.zeros_like(u)
    d2[..., 1:-1] = (u[..., 2:] - u[..., 1:-1]) - (u[..., 1:-1] - u[..., :-2])
    return d2


@njit(cache=True)
def _biharmonic_into(u, out, scale):
    # out = -scale * D4 u; d2 buffer lives in out's tail-free pass
    n = u.shape[0]
    d2_prev = 0.0  # D2[0]
    d2_cur = (u[2] - u[1]) - (u[1] - u[0])  # D2[1]
    out[0] = -scale * (2.0 * d2_cur)
    for i in range(1, n - 1):
        if i + 1 < n - 1:
            d2_next = (u[i + 2] - u[i + 1]) - (u[i + 1] - u[i])
        else:
            d2_next = 0.0  # D2[n-1]
        out[i] = -scale * ((d2_next - d2_cur) - (d2_cur - d2_prev))
        d2_prev = d2_cur
        d2_cur = d2_next
    # d2_prev now holds D2[n-2]
    out[n - 1] = -scale * (2.0 * d2_prev)


def apply_biharmonic(params: BeamParams, grid: Grid, displacement) -> np.ndarray:
    """Discrete ``-mu * u_xxxx`` with free-edge ghost closure."""
    u = np.asarray(displacement, dtype=float)
    if u.shape != (grid.n_points,):
        raise ValueError(f"expected displacement of length {grid.n_points}, got shape {u.shape}")
    out = np.empty_like(u)
    _biharmonic_into(u, out, params.mu / grid.h**4)
    return out


def operator_matrix(params: BeamParams, grid: Grid) -> np.ndarray:
    """Dense matrix of :func:`apply_biharmonic` (for tests and spectra)."""
    n = grid.n_points
    eye = np.eye(n)
    return np.column_stack([apply_biharmonic(params, grid, eye[:, j]) for j in range(n)])


def discrete_frequencies(params: BeamParams, grid: Grid) -> np.ndarray:
    """Angular frequencies of the semi-discrete free-free beam, ascending.

    ``-M/rho`` is similar to a symmetric matrix through the trapezoidal
    weights, so the eigenproblem is solved in symmetric form.
    """
    m = -operator_matrix(params, grid) / params.rho
    s = np.sqrt(grid.weights)
    sym = s[:, None] * m / s[None, :]
    sym = 0.5 * (sym + sym.T)
    lam = np.linalg.eigvalsh(sym)
    return np.sqrt(np.clip(lam, 0.0, None))


def weighted_pairing(grid: Grid, v, w) -> float:
    """Quadrature inner product ``sum_i w_i v_i w_i``."""
    return float(np.dot(grid.weights * np.asarray(v, dtype=float), np.asarray(w, dtype=float)))
