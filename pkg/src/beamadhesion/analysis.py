"""Experiment harnesses built on :func:`beamadhesion.dynamics.simulate`.

adhesion threshold
    With ``sup|u0| < 1`` and initial energy below ``4 kappa mu / max(3, 2 kappa)``
    the beam should never leave the adhesion zone.
long-time probe
    A finite-window proxy for the affine late-time state: time-average the
    displacement, fit ``a x + b`` and classify it as zero, ``>= 1`` or
    ``<= -1``.
linearization
    Nonlinear and purely elastic runs from the same vanishing data; their
    energy-norm gap should vanish, and it is bounded by a Gronwall envelope.
regularization
    Smoothed-law runs for a decreasing list of ``eps`` compared with the
    exact-law run and with optional closed forms.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .beam_operator import BeamParams, BeamState, Grid, second_difference
from .dynamics import Trajectory, energy, resolve_dt, simulate
from .potential import PotentialSpec, select_h

log = logging.getLogger(__name__)


def adhesion_threshold(kappa: float, mu: float) -> float:
    return 4.0 * kappa * mu / max(3.0, 2.0 * kappa)


@dataclass
class AdhesionVerdict:
    sup_norm_u0: float
    initial_energy: float
    threshold: float
    hypothesis_met: bool
    conclusion_checked: bool | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def adhesion_check(params: BeamParams, grid: Grid, spec: PotentialSpec, u0, u1) -> AdhesionVerdict:
    """Evaluate the no-detachment hypothesis on initial data (both inequalities strict)."""
    state = BeamState(0.0, u0, u1)
    sup = float(np.max(np.abs(state.displacement)))
    e0 = energy(params, grid, spec, state).total
    thr = adhesion_threshold(spec.kappa, params.mu)
    return AdhesionVerdict(sup, e0, thr, bool(sup < 1.0 and e0 < thr))


def verify_no_detachment(traj: Trajectory) -> bool:
    return bool(np.max(np.abs(traj.u)) < 1.0)


def l2_norm(grid: Grid, f) -> np.ndarray:
    """Trapezoidal L2 norm along the last axis."""
    f = np.asarray(f, dtype=float)
    return np.sqrt((f * f) @ grid.weights)


def curvature_norm(grid: Grid, u) -> np.ndarray:
    """L2 norm of the discrete second derivative used by the bending energy."""
    d2 = second_difference(u) / grid.h**2
    return np.sqrt(grid.h * np.sum(d2 * d2, axis=-1))


# ---------------------------------------------------------------------------
# random data inside the adhesion regime


def random_adhesion_data(params: BeamParams, grid: Grid, spec: PotentialSpec,
                         rng: np.random.Generator, sup_max: float = 0.8,
                         energy_max: float = 1.2, modes: int = 4):
    """Smooth random ``(u0, u1)`` with ``sup|u0| <= sup_max`` and ``E(0) <= energy_max``."""
    x = grid.x / params.length
    basis = np.array([np.cos(m * math.pi * x) for m in range(modes)])
    decay = 1.0 / (1.0 + np.arange(modes) ** 2)
    u0 = (rng.normal(size=modes) * decay) @ basis + rng.normal() * (x - 0.5)
    u1 = (rng.normal(size=modes) * decay) @ basis
    u0 *= rng.uniform(0.05, sup_max) / np.max(np.abs(u0))
    u1 *= rng.uniform(0.0, 1.0) / max(np.max(np.abs(u1)), 1e-300)
    e0 = energy(params, grid, spec, BeamState(0.0, u0, u1)).total
    if e0 > energy_max:
        # quadratic in the data while |u0| < 1
        s = math.sqrt(energy_max / e0) * (1 - 1e-9)
        u0, u1 = u0 * s, u1 * s
    return u0, u1


# ---------------------------------------------------------------------------
# long-time probe


class Classification(str, enum.Enum):
    TRIVIAL = "trivial"
    ATTACHEDLIKE_PLUS = "attachedlike_plus"
    ATTACHEDLIKE_MINUS = "attachedlike_minus"
    UNCLASSIFIED = "unclassified"


@dataclass
class AffineState:
    a: float
    b: float
    residual: float
    classification: Classification
    oscillation: float = 0.0

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "residual": self.residual,
                "classification": self.classification.value, "oscillation": self.oscillation}


def _affine_fit(grid: Grid, u):
    """Weighted least-squares ``a x + b`` for each row of ``u``."""
    w = grid.weights
    basis = np.stack([grid.x, np.ones(grid.n_points)])
    gram = (basis * w) @ basis.T
    rhs = np.atleast_2d(u) * w @ basis.T
    coef = np.linalg.solve(gram, rhs.T).T
    return coef[:, 0], coef[:, 1]


def long_time_probe(traj: Trajectory, window: tuple[float, float], *, tol_zero: float | None = None,
                    tol_one: float = 1e-3, tol_fit: float = 1e-2,
                    tol_settle: float | None = None) -> AffineState:
    """Classify the late-time affine state seen over ``window``.

    The rigid (affine) component of every recorded state is extracted and
    detrended linearly in time; if what remains still swings by more than
    ``tol_settle`` the window shows a persistent oscillation and the result is
    ``UNCLASSIFIED``.  Otherwise the time-averaged profile is fitted by
    ``a x + b`` and tested against the three admissible limits.
    """
    t0, t1 = window
    if not (traj.t[0] <= t0 < t1 <= traj.t[-1] + 1e-12):
        raise ValueError(f"window {window} outside recorded span [{traj.t[0]}, {traj.t[-1]}]")
    grid = traj.grid
    amp = max(1.0, float(np.max(np.abs(traj.u[0]))))
    tol_zero = 1e-3 * amp if tol_zero is None else tol_zero
    tol_settle = 1e-2 * amp if tol_settle is None else tol_settle
    sel = (traj.t >= t0) & (traj.t <= t1)
    ts, us = traj.t[sel], traj.u[sel]
    if len(ts) < 3:
        raise ValueError("window holds fewer than three recorded states")

    a_k, b_k = _affine_fit(grid, us)
    L = grid.length
    ends = np.stack([b_k, a_k * L + b_k], axis=1)
    trend = np.polynomial.polynomial.polyfit(ts - ts[0], ends, 1)
    fitted = trend[0] + np.outer(ts - ts[0], trend[1])
    oscillation = float(np.max(np.abs(ends - fitted)))

    span = ts[-1] - ts[0]
    mean_u = trapezoid(us, ts, axis=0) / span
    a, b = _affine_fit(grid, mean_u)
    a, b = float(a[0]), float(b[0])
    residual = float(l2_norm(grid, mean_u - (a * grid.x + b)))

    lo, hi = min(b, a * L + b), max(b, a * L + b)
    if oscillation > tol_settle or residual > tol_fit:
        cls = Classification.UNCLASSIFIED
    elif max(abs(lo), abs(hi)) <= tol_zero:
        cls = Classification.TRIVIAL
    elif lo >= 1.0 - tol_one:
        cls = Classification.ATTACHEDLIKE_PLUS
    elif hi <= -1.0 + tol_one:
        cls = Classification.ATTACHEDLIKE_MINUS
    else:
        cls = Classification.UNCLASSIFIED
    return AffineState(a, b, residual, cls, oscillation)


# ---------------------------------------------------------------------------
# linearization


@dataclass
class LinearizationReport:
    scale: int
    defect: float | None
    skipped: bool = False
    reason: str = ""
    initial_energy: float | None = None
    envelope_ok: bool | None = None
    max_envelope_ratio: float | None = None
    norm_bound_ok: bool | None = None
    max_norm_bound_ratio: float | None = None
    times: np.ndarray | None = field(default=None, repr=False)
    defect_series: np.ndarray | None = field(default=None, repr=False)
    envelope_series: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if not isinstance(v, np.ndarray)}


def gronwall_envelope(params: BeamParams, grid: Grid, spec: PotentialSpec, traj: Trajectory) -> np.ndarray:
    """``(1/2rho) int_0^t e^(t-s) ||h(u(s))||^2 ds`` at the recorded times (trapezoid in time)."""
    h = select_h(spec, traj.u)
    g = (h * h) @ grid.weights
    s = traj.t - traj.t[0]
    integral = cumulative_trapezoid(np.exp(-s) * g, s, initial=0.0)
    return np.exp(s) * integral / (2.0 * params.rho)


def scaled_data(grid: Grid, base_u0, base_u1, n: int, family: str = "scaled"):
    """Initial data of scale ``n``: ``base/n``, or an oscillating weakly-null family."""
    base_u0 = np.asarray(base_u0, float)
    base_u1 = np.asarray(base_u1, float)
    if family == "scaled":
        return base_u0 / n, base_u1 / n
    if family == "oscillating":
        c = np.cos(2.0 * math.pi * n * grid.x / grid.length)
        return np.max(np.abs(base_u0)) * c / n**2, np.max(np.abs(base_u1)) * c
    raise ValueError(f"unknown family {family!r}")


def linearization_experiment(params: BeamParams, grid: Grid, base_u0, base_u1, scales: Sequence[int],
                             horizon: float, spec: PotentialSpec | None = None, *, dt="auto",
                             n_records: int = 4000, family: str = "scaled") -> list[LinearizationReport]:
    """Gap between nonlinear and elastic runs from the scale-``n`` data.

    ``defect`` is ``max_t (||w_t|| + ||w_xx||)`` with ``w = u_n - v_n``.  Two
    bounds are checked at every recorded time: the energy of ``w`` against
    the Gronwall envelope, and ``(||w_t|| + ||w_xx||)**2 <= 2 env / min(rho, mu)``.
    """
    spec = spec or PotentialSpec.exact()
    reports = []
    for n in scales:
        u0, u1 = scaled_data(grid, base_u0, base_u1, n, family)
        verdict = adhesion_check(params, grid, spec, u0, u1)
        if not verdict.hypothesis_met:
            reports.append(LinearizationReport(n, None, True,
                                               f"hypothesis fails: sup|u0|={verdict.sup_norm_u0:.4g}, "
                                               f"E(0)={verdict.initial_energy:.4g} vs {verdict.threshold:.4g}",
                                               verdict.initial_energy))
            log.warning("scale %d skipped: %s", n, reports[-1].reason)
            continue
        state = BeamState(0.0, u0, u1)
        nonlin = simulate(params, grid, spec, state, horizon, dt, n_records=n_records)
        lin = simulate(params, grid, None, state, horizon, nonlin.dt, record_stride=nonlin.record_stride)
        w = nonlin.u - lin.u
        wt = nonlin.v - lin.v
        nt, nxx = l2_norm(grid, wt), curvature_norm(grid, w)
        series = nt + nxx
        e_w = 0.5 * (params.rho * nt**2 + params.mu * nxx**2)
        env = gronwall_envelope(params, grid, spec, nonlin)
        slack = 1e-12 * max(1.0, float(np.max(env)))
        env_ratio = np.where(env > 0, e_w / np.where(env > 0, env, 1.0), np.where(e_w > slack, np.inf, 0.0))
        bound = 2.0 * env / min(params.rho, params.mu)
        bound_ratio = np.where(bound > 0, series**2 / np.where(bound > 0, bound, 1.0),
                               np.where(series**2 > slack, np.inf, 0.0))
        reports.append(LinearizationReport(
            n, float(series.max()), False, "", verdict.initial_energy,
            bool(np.all(e_w <= env + slack)), float(env_ratio.max()),
            bool(np.all(series**2 <= bound + slack)), float(bound_ratio.max()),
            nonlin.t, series, env))
    return reports


# ---------------------------------------------------------------------------
# regularization and non-uniqueness


def _data_for(grid: Grid, d, eps):
    val = d(eps) if callable(d) else d
    return np.broadcast_to(np.asarray(val, dtype=float), (grid.n_points,)).copy()


def regularization_study(params: BeamParams, grid: Grid, u0, u1, eps_list: Sequence[float],
                         horizon: float, *, oracle: Callable | None = None, dt="auto",
                         n_records: int = 2000, selection_at_one: float = 0.0) -> list[dict]:
    """One row per ``eps``: distances of the smoothed run to the exact-law run and to ``oracle``.

    ``u0``/``u1`` may be arrays, scalars or callables of ``eps``.  ``oracle``
    maps ``(eps, t_array)`` to displacements (scalar per time for uniform data,
    or an array of shape ``(len(t), n_points)``).
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    rows = []
    for eps in eps_list:
        state = BeamState(0.0, _data_for(grid, u0, eps), _data_for(grid, u1, eps))
        smooth = simulate(params, grid, PotentialSpec.smoothed(eps), state, horizon, dt, n_records=n_records)
        exact = simulate(params, grid, PotentialSpec.exact(selection_at_one), state, horizon, smooth.dt,
                         record_stride=smooth.record_stride, audit=False)
        row = {"eps": eps,
               "distance_to_exact": float(np.max(l2_norm(grid, smooth.u - exact.u))),
               "distance_to_oracle": None,
               "final_time": float(smooth.t[-1]),
               "final_displacement_l2": float(l2_norm(grid, smooth.u[-1]))}
        if oracle is not None:
            ref = np.asarray(oracle(eps, smooth.t), dtype=float)
            if ref.ndim == 1:
                ref = ref[:, None]
            row["distance_to_oracle"] = float(np.max(l2_norm(grid, smooth.u - ref)))
        row["_trajectory"] = smooth
        rows.append(row)
    return rows


def nonuniqueness_witness(params: BeamParams, grid: Grid, eps_list: Sequence[float],
                          horizon: float, *, dt="auto") -> list[dict]:
    """Run both smoothed families from ``(1 -+ eps, 0)`` and report their terminal gap.

    As ``eps -> 0`` the two data sets merge at ``(1, 0)`` while the runs
    approach ``cos(sqrt(2) t)`` and the constant 1 respectively.
    """
    root2 = math.sqrt(2.0)
    u_rows = regularization_study(params, grid, lambda e: 1.0 - e, 0.0, eps_list, horizon,
                                  oracle=lambda e, t: np.cos(root2 * t), dt=dt)
    v_rows = regularization_study(params, grid, lambda e: 1.0 + e, 0.0, eps_list, horizon,
                                  oracle=lambda e, t: np.ones_like(t), dt=dt)
    out = []
    for ur, vr in zip(u_rows, v_rows):
        tu, tv = ur["_trajectory"], vr["_trajectory"]
        eps = ur["eps"]
        out.append({
            "eps": eps,
            "data_distance": float(l2_norm(grid, tu.u[0] - tv.u[0]) + l2_norm(grid, tu.v[0] - tv.v[0])),
            "terminal_gap": float(l2_norm(grid, tu.u[-1] - tv.u[-1])),
            "u_to_limit": ur["distance_to_oracle"],
            "v_to_limit": vr["distance_to_oracle"],
        })
    return out


def dt_self_convergence(params: BeamParams, grid: Grid, spec: PotentialSpec | None, state: BeamState,
                        horizon: float, dt="auto", levels: int = 3, n_records: int = 200) -> dict:
    """Differences between runs at ``dt, dt/2, dt/4, ...`` on a shared record grid."""
    n0 = math.ceil(horizon / resolve_dt(params, grid, dt))
    base_stride = max(1, n0 // n_records)
    runs = []
    for k in range(levels):
        runs.append(simulate(params, grid, spec, state, horizon, horizon / (n0 * 2**k),
                             record_stride=base_stride * 2**k, audit=False))
    diffs = [float(np.max(np.abs(a.u - b.u))) for a, b in zip(runs, runs[1:])]
    ratios = [d0 / d1 if d1 > 0 else math.inf for d0, d1 in zip(diffs, diffs[1:])]
    return {"dt": horizon / n0, "differences": diffs, "ratios": ratios}


def energy_drift_ratio(params: BeamParams, grid: Grid, spec: PotentialSpec | None, state: BeamState,
                       horizon: float, dt="auto", n_records: int = 5000) -> dict:
    """Max relative energy drift at ``dt`` and ``dt/2`` and their ratio."""
    n0 = math.ceil(horizon / resolve_dt(params, grid, dt))
    stride = max(1, n0 // n_records)
    d = []
    for k in (0, 1):
        traj = simulate(params, grid, spec, state, horizon, horizon / (n0 * 2**k),
                        record_stride=stride * 2**k, audit=False)
        d.append(traj.report["max_relative_drift"])
    return {"dt": horizon / n0, "drift": d[0], "drift_half": d[1], "ratio": d[0] / d[1]}


def kink_probe(t, u) -> tuple[float, np.ndarray]:
    """Locate the largest jump of ``u''`` in a recorded scalar series.

    ``u''`` is the three-point second difference at the interior record times
    (spacing may vary).  Returns the first time at which it has moved more than
    halfway across its largest jump, and the second-difference series.
    """
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    if t.shape != u.shape or len(t) < 4:
        raise ValueError("need matching 1-D series with at least four samples")
    d1, d2 = np.diff(t)[:-1], np.diff(t)[1:]
    acc = 2.0 * ((u[2:] - u[1:-1]) / d2 - (u[1:-1] - u[:-2]) / d1) / (d1 + d2)
    k = int(np.argmax(np.abs(np.diff(acc))))
    before, after = acc[max(k - 1, 0)], acc[min(k + 2, len(acc) - 1)]
    mid = 0.5 * (before + after)
    crossed = np.nonzero((acc[k:] - mid) * np.sign(after - before) >= 0)[0]
    return float(t[1:-1][k + int(crossed[0])]), acc
