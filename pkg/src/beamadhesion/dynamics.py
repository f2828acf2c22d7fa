"""Velocity-Verlet time stepping, energy accounting and the dissipation audit.

The semi-discrete system is ``rho * u'' = -mu * D4 u - h(u)`` with a lumped
(trapezoidal) mass, so with a smooth potential it is Hamiltonian and Verlet
keeps the discrete energy within an O(dt**2) band.  The exact capped law is
stepped with the force selection applied directly inside the kick.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .beam_operator import BeamParams, BeamState, Grid, second_difference
from .potential import KIND_EXACT, KIND_NONE, KIND_SMOOTHED, PotentialSpec, eval_phi

log = logging.getLogger(__name__)

SAFETY = 0.9
DISSIPATION_TOL = 1e-3


class StabilityError(ValueError):
    """Time step exceeds the explicit stability limit."""

    def __init__(self, dt: float, limit: float):
        self.dt = dt
        self.limit = limit
        super().__init__(f"dt={dt:.6g} exceeds the stability limit {limit:.6g}")


class NumericalFailure(RuntimeError):
    """Non-finite state produced during stepping."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"non-finite state detected at t={time:.17g}")


@dataclass
class EnergyBreakdown:
    kinetic: float
    bending: float
    adhesion: float

    @property
    def total(self) -> float:
        return self.kinetic + self.bending + self.adhesion

    def to_dict(self) -> dict:
        return {"kinetic": self.kinetic, "bending": self.bending,
                "adhesion": self.adhesion, "total": self.total}


@dataclass
class Trajectory:
    """Recorded states of one run; ``u[k]`` and ``v[k]`` belong to ``t[k]``."""

    grid: Grid
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    dt: float
    record_stride: int
    kinetic: np.ndarray = field(default=None)
    bending: np.ndarray = field(default=None)
    adhesion: np.ndarray = field(default=None)
    contact_fraction: np.ndarray = field(default=None)
    report: dict = field(default=None)

    @property
    def total_energy(self) -> np.ndarray:
        return self.kinetic + self.bending + self.adhesion

    @property
    def states(self) -> list[BeamState]:
        return [BeamState(float(t), u, v) for t, u, v in zip(self.t, self.u, self.v)]

    @property
    def final(self) -> BeamState:
        return BeamState(float(self.t[-1]), self.u[-1], self.v[-1])

    def energies(self) -> list[EnergyBreakdown]:
        return [EnergyBreakdown(float(k), float(b), float(a))
                for k, b, a in zip(self.kinetic, self.bending, self.adhesion)]

    def dissipation_report(self) -> dict:
        e = self.total_energy
        e0 = e[0]
        excess = e - e0
        if e0 > 0:
            rel = excess / e0
            return {"initial_energy": float(e0), "max_relative_excess": float(rel.max()),
                    "max_relative_drift": float(np.abs(rel).max()), "relative": True}
        return {"initial_energy": float(e0), "max_relative_excess": float(excess.max()),
                "max_relative_drift": float(np.abs(excess).max()), "relative": False}


def stability_limit(params: BeamParams, grid: Grid) -> float:
    """Largest admissible Verlet step, with safety factor 0.9.

    The interior stencil has spectral radius 16/h**4, so
    ``omega_max = 4 sqrt(mu/rho) / h**2`` and Verlet needs ``dt*omega_max <= 2``.
    """
    return SAFETY * grid.h**2 / 2.0 * math.sqrt(params.rho / params.mu)


def _as_state_arrays(states_u, states_v):
    return np.atleast_2d(np.asarray(states_u, float)), np.atleast_2d(np.asarray(states_v, float))


def energy_arrays(params: BeamParams, grid: Grid, spec: PotentialSpec | None, u, v):
    """Vectorised energy parts for a stack of states (rows)."""
    u, v = _as_state_arrays(u, v)
    w = grid.weights
    kinetic = 0.5 * params.rho * (v * v) @ w
    d2 = second_difference(u)
    # end rows of d2 are zero by the free-edge closure
    bending = 0.5 * params.mu * grid.h * np.sum(d2 * d2, axis=-1) / grid.h**4
    adhesion = np.zeros(u.shape[0]) if spec is None else eval_phi(spec, u) @ w
    return kinetic, bending, adhesion


def energy(params: BeamParams, grid: Grid, spec: PotentialSpec | None, state: BeamState) -> EnergyBreakdown:
    """Trapezoidal discretisation of kinetic + bending + adhesion energy."""
    if state.displacement.shape != (grid.n_points,):
        raise ValueError("state does not match grid")
    k, b, a = energy_arrays(params, grid, spec, state.displacement, state.velocity)
    return EnergyBreakdown(float(k[0]), float(b[0]), float(a[0]))


@njit(cache=True)
def _accel(u, d2, acc, bend_scale, inv_rho, code, eps, sel):
    # separate passes so each loop vectorises; the force branch is hoisted
    n = u.shape[0]
    for i in range(1, n - 1):
        d2[i] = (u[i + 1] - u[i]) - (u[i] - u[i - 1])
    acc[0] = -bend_scale * 2.0 * d2[1]
    acc[n - 1] = -bend_scale * 2.0 * d2[n - 2]
    for i in range(1, n - 1):
        acc[i] = -bend_scale * ((d2[i + 1] - d2[i]) - (d2[i] - d2[i - 1]))
    if code == KIND_SMOOTHED:
        c = (2.0 - eps) / eps
        for i in range(n):
            a = abs(u[i])
            f = math.copysign(min((2.0 - eps) * a, c * max(1.0 + eps - a, 0.0)), u[i])
            acc[i] = (acc[i] - f) * inv_rho
    elif code == KIND_EXACT:
        for i in range(n):
            a = abs(u[i])
            if a < 1.0:
                f = 2.0 * u[i]
            elif a > 1.0:
                f = 0.0
            else:
                f = math.copysign(sel, u[i])
            acc[i] = (acc[i] - f) * inv_rho
    else:
        for i in range(n):
            acc[i] *= inv_rho


@njit(cache=True)
def _verlet(u, v, t0, dt, n_steps, stride, bend_scale, inv_rho, code, eps, sel,
            rec_t, rec_u, rec_v):
    """Advance in place, recording every ``stride`` steps and the last one.

    Returns the number of records written, or ``-(k+1)`` if step ``k``
    produced a non-finite state.
    """
    n = u.shape[0]
    acc = np.empty(n)
    d2 = np.zeros(n)
    _accel(u, d2, acc, bend_scale, inv_rho, code, eps, sel)
    half = 0.5 * dt
    rec_t[0] = t0
    rec_u[0, :] = u
    rec_v[0, :] = v
    r = 1
    for k in range(1, n_steps + 1):
        for i in range(n):
            v[i] += half * acc[i]
            u[i] += dt * v[i]
        _accel(u, d2, acc, bend_scale, inv_rho, code, eps, sel)
        for i in range(n):
            v[i] += half * acc[i]
        if k % stride == 0 or k == n_steps:
            ok = True
            for i in range(n):
                if not (math.isfinite(u[i]) and math.isfinite(v[i])):
                    ok = False
                    break
            if not ok:
                return -(k + 1)
            rec_t[r] = t0 + k * dt
            rec_u[r, :] = u
            rec_v[r, :] = v
            r += 1
    return r


def _spec_args(spec: PotentialSpec | None):
    if spec is None:
        return KIND_NONE, 0.0, 0.0
    return spec.code, float(spec.eps), float(spec.selection_at_one)


def integrate(params: BeamParams, grid: Grid, spec: PotentialSpec | None, state: BeamState,
              dt: float, n_steps: int, record_stride: int = 1, *,
              check_limit: bool = True, with_energy: bool = True) -> Trajectory:
    """Run ``n_steps`` Verlet steps from ``state``; ``spec=None`` drops the adhesion force.

    ``check_limit=False`` skips the stability guard (used by the blow-up probe).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if check_limit:
        limit = stability_limit(params, grid)
        if dt > limit:
            raise StabilityError(dt, limit)
    if n_steps < 0 or record_stride < 1:
        raise ValueError("n_steps must be >= 0 and record_stride >= 1")
    if state.displacement.shape != (grid.n_points,):
        raise ValueError("state does not match grid")
    n_rec = n_steps // record_stride + 2
    rec_t = np.empty(n_rec)
    rec_u = np.empty((n_rec, grid.n_points))
    rec_v = np.empty((n_rec, grid.n_points))
    u = state.displacement.copy()
    v = state.velocity.copy()
    code, eps, sel = _spec_args(spec)
    r = _verlet(u, v, float(state.time), float(dt), int(n_steps), int(record_stride),
                params.mu / grid.h**4, 1.0 / params.rho, code, eps, sel, rec_t, rec_u, rec_v)
    if r < 0:
        k = -r - 1
        raise NumericalFailure(state.time + k * dt)
    traj = Trajectory(grid, rec_t[:r].copy(), rec_u[:r].copy(), rec_v[:r].copy(), dt, record_stride)
    if with_energy:
        traj.kinetic, traj.bending, traj.adhesion = energy_arrays(params, grid, spec, traj.u, traj.v)
    traj.contact_fraction = np.mean(np.abs(traj.u) < 1.0, axis=1)
    return traj


def step(params: BeamParams, grid: Grid, spec: PotentialSpec | None, state: BeamState, dt: float) -> BeamState:
    """One velocity-Verlet step."""
    traj = integrate(params, grid, spec, state, dt, 1, 1, with_energy=False)
    return traj.final


def plan_steps(horizon: float, dt_max: float) -> tuple[float, int]:
    """Step count reaching ``horizon`` exactly with a step no larger than ``dt_max``."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    n = max(1, math.ceil(horizon / dt_max * (1 - 1e-12)))
    return horizon / n, n


def resolve_dt(params: BeamParams, grid: Grid, dt) -> float:
    """``"auto"`` means half the stability limit."""
    if dt is None or dt == "auto":
        return 0.5 * stability_limit(params, grid)
    return float(dt)


def simulate(params: BeamParams, grid: Grid, spec: PotentialSpec | None, state: BeamState,
             horizon: float, dt="auto", record_stride: int | None = None,
             n_records: int = 2000, *, audit: bool | None = None) -> Trajectory:
    """Run to ``horizon`` and attach a dissipation report.

    ``dt`` is shrunk slightly when needed so that ``horizon`` is hit exactly.
    Without an explicit ``record_stride`` about ``n_records`` states are kept.
    With ``audit`` on (the default for the exact law) an energy excess over
    ``E(0)`` beyond ``DISSIPATION_TOL`` raises :class:`DissipationViolation`.
    """
    dt, n_steps = plan_steps(horizon, resolve_dt(params, grid, dt))
    if record_stride is None:
        record_stride = max(1, n_steps // n_records)
    log.debug("simulate: n=%d dt=%.3e steps=%d stride=%d", grid.n_points, dt, n_steps, record_stride)
    traj = integrate(params, grid, spec, state, dt, n_steps, record_stride)
    traj.report = traj.dissipation_report()
    if audit is None:
        audit = spec is not None and spec.kind.value == "exact"
    if audit and traj.report["max_relative_excess"] > DISSIPATION_TOL:
        raise DissipationViolation(traj.report)
    return traj


class DissipationViolation(RuntimeError):
    """Energy rose above its initial value beyond tolerance for the exact law."""

    def __init__(self, report: dict):
        self.report = report
        super().__init__(f"energy excess {report['max_relative_excess']:.3e} exceeds {DISSIPATION_TOL}")


def acceleration(params: BeamParams, grid: Grid, spec: PotentialSpec | None, displacement) -> np.ndarray:
    """Acceleration the stepping kernel uses for ``displacement``."""
    u = np.array(displacement, dtype=float)
    if u.shape != (grid.n_points,):
        raise ValueError("displacement does not match grid")
    acc = np.empty_like(u)
    code, eps, sel = _spec_args(spec)
    _accel(u, np.zeros_like(u), acc, params.mu / grid.h**4, 1.0 / params.rho, code, eps, sel)
    return acc
