"""Reference solutions that do not touch the PDE solver.

* Closed-form, spatially constant solutions of the adhesive beam problem
  (with ``rho = mu = 1``), together with their energies.
* A scalar ODE oracle: a spatially uniform state feels no bending, so the
  PDE collapses to ``rho * u'' = -h(u)``.  It is integrated branch by branch
  with the kinks located by bisection.
* Free-free beam frequencies from ``cos(bL) cosh(bL) = 1``.

Nothing here imports :mod:`beamadhesion.dynamics` or
:mod:`beamadhesion.beam_operator`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .potential import Kind, PotentialSpec, select_h

SQRT2 = math.sqrt(2.0)
KINK_TIME = math.pi / (4.0 * SQRT2)


class ExampleId(str, enum.Enum):
    EX71_U = "ex71_u"  # (1-eps) cos(sqrt(2-eps) t) under the smoothed law
    EX71_V = "ex71_v"  # 1+eps at rest under the smoothed law
    EX72_U = "ex72_u"  # eps t + 1 + eps, exact law, escapes
    EX72_V = "ex72_v"  # (1-eps) cos(sqrt 2 t), exact law
    EX73 = "ex73"      # sqrt2 sin(sqrt2 t), then linear after the kink


def eval_closed_form(example, eps: float, t):
    """Return ``(u, u_t)`` of the closed-form solution at times ``t``."""
    ex = ExampleId(example)
    t = np.asarray(t, dtype=float)
    if ex is not ExampleId.EX73 and not eps > 0:
        raise ValueError("eps must be positive")
    if ex is ExampleId.EX71_U:
        w = math.sqrt(2.0 - eps)
        u, ut = (1 - eps) * np.cos(w * t), -(1 - eps) * w * np.sin(w * t)
    elif ex is ExampleId.EX71_V:
        u, ut = np.full_like(t, 1 + eps), np.zeros_like(t)
    elif ex is ExampleId.EX72_U:
        u, ut = eps * t + 1 + eps, np.full_like(t, eps)
    elif ex is ExampleId.EX72_V:
        u, ut = (1 - eps) * np.cos(SQRT2 * t), -(1 - eps) * SQRT2 * np.sin(SQRT2 * t)
    else:
        before = t <= KINK_TIME
        u = np.where(before, SQRT2 * np.sin(SQRT2 * t), SQRT2 * t + 1 - math.pi / 4)
        ut = np.where(before, 2.0 * np.cos(SQRT2 * t), SQRT2)
    if u.ndim == 0:
        return float(u), float(ut)
    return u, ut


def closed_form_energy(example, eps: float, length: float) -> float:
    ex = ExampleId(example)
    if ex is ExampleId.EX71_U:
        return (2 - eps) * (1 - eps) ** 2 / 2 * length
    if ex is ExampleId.EX71_V:
        return (2 - eps) * (1 + eps) / 2 * length
    if ex is ExampleId.EX72_U:
        return (eps**2 + 2) / 2 * length
    if ex is ExampleId.EX72_V:
        return (1 - eps) ** 2 * length
    return 2.0 * length


@dataclass(frozen=True)
class ClosedFormSolution:
    id: ExampleId
    eps: float = 0.0

    def potential(self) -> PotentialSpec:
        if self.id in (ExampleId.EX71_U, ExampleId.EX71_V):
            return PotentialSpec.smoothed(self.eps)
        return PotentialSpec.exact(selection_at_one=0.0)

    def initial(self) -> tuple[float, float]:
        u, ut = eval_closed_form(self.id, self.eps, 0.0)
        return u, ut

    def __call__(self, t):
        return eval_closed_form(self.id, self.eps, t)

    def energy(self, length: float) -> float:
        return closed_form_energy(self.id, self.eps, length)

    @property
    def kinks(self) -> tuple[float, ...]:
        return (KINK_TIME,) if self.id is ExampleId.EX73 else ()


def all_examples(eps: float) -> list[ClosedFormSolution]:
    return [ClosedFormSolution(ex, 0.0 if ex is ExampleId.EX73 else eps) for ex in ExampleId]


# ---------------------------------------------------------------------------
# uniform ODE oracle


def _breakpoints(spec: PotentialSpec) -> list[float]:
    if spec.kind is Kind.EXACT:
        return [-1.0, 1.0]
    c = 1.0 + spec.eps
    return [-c, -1.0, 1.0, c]


def _branch_force(spec: PotentialSpec, mid: float) -> Callable[[float], float]:
    """Smooth extension of the force law on the branch containing ``mid``."""
    a = abs(mid)
    sgn = 1.0 if mid > 0 else -1.0
    if spec.kind is Kind.EXACT:
        return (lambda u: 2.0 * u) if a < 1.0 else (lambda u: 0.0)
    e = spec.eps
    if a < 1.0:
        return lambda u: (2.0 - e) * u
    if a < 1.0 + e:
        c = (2.0 - e) / e
        return lambda u: sgn * c * (1.0 + e - sgn * u)
    return lambda u: 0.0


@dataclass
class _Segment:
    t0: float
    t1: float
    sol: object  # OdeSolution or None when at rest
    state: tuple[float, float]

    def eval(self, t):
        if self.sol is None:
            return np.full_like(t, self.state[0]), np.full_like(t, self.state[1])
        y = self.sol(t)
        return y[0], y[1]


@dataclass
class UniformSeries:
    """Piecewise dense solution of the scalar ODE; call with times."""

    segments: list[_Segment]
    events: list[float]

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = np.empty_like(t)
        v = np.empty_like(t)
        starts = np.array([s.t0 for s in self.segments])
        idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.segments) - 1)
        for k in np.unique(idx):
            m = idx == k
            u[m], v[m] = self.segments[k].eval(t[m])
        return u, v


def _bisect_event(fun, lo: float, hi: float, xtol: float = 1e-13) -> float:
    glo = fun(lo)
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        gm = fun(mid)
        if (gm > 0) == (glo > 0) and gm != 0:
            lo, glo = mid, gm
        else:
            hi = mid
    return hi


def uniform_ode_oracle(spec: PotentialSpec, u0: float, v0: float, horizon: float,
                       tol: float = 1e-12, rho: float = 1.0) -> UniformSeries:
    """Integrate ``rho u'' = -h(u)`` on ``[0, horizon]`` branch by branch.

    Each smooth branch is solved with DOP853; crossings of the breakpoints
    of the force law are refined by bisection on the dense output.
    """
    if tol > 1e-10:
        raise ValueError("oracle tolerance must be <= 1e-10")
    bps = _breakpoints(spec)
    t, u, v = 0.0, float(u0), float(v0)
    segments, events = [], []
    while t < horizon:
        if u in bps:
            direction = np.sign(v)
            if direction == 0:
                direction = -np.sign(select_h(spec, u))
            if direction == 0:
                # equilibrium at a breakpoint with zero selected force
                segments.append(_Segment(t, horizon, None, (u, 0.0)))
                break
            probe = u + direction * 1e-9
        else:
            probe = u
        lower = max([b for b in bps if b < probe], default=-np.inf)
        upper = min([b for b in bps if b > probe], default=np.inf)
        force = _branch_force(spec, probe)

        def rhs(_t, y, force=force):
            return [y[1], -force(y[0]) / rho]

        evs = []
        if np.isfinite(lower):
            ev_lo = lambda _t, y, b=lower: y[0] - b
            ev_lo.terminal, ev_lo.direction = True, -1
            evs.append(ev_lo)
        if np.isfinite(upper):
            ev_hi = lambda _t, y, b=upper: y[0] - b
            ev_hi.terminal, ev_hi.direction = True, 1
            evs.append(ev_hi)
        sol = solve_ivp(rhs, (t, horizon), [u, v], method="DOP853", rtol=tol, atol=tol * 1e-2,
                        dense_output=True, events=evs)
        if not sol.success:
            raise RuntimeError(f"oracle integration failed: {sol.message}")
        hit = [te[0] for te in sol.t_events if len(te)]
        if not hit:
            segments.append(_Segment(t, horizon, sol.sol, (u, v)))
            break
        t_hit = min(hit)
        which = [b for b, te in zip([b for b in (lower, upper) if np.isfinite(b)], sol.t_events)
                 if len(te) and te[0] == t_hit][0]
        dense = sol.sol
        lo_t = max(t, t_hit - 1e-6)
        hi_t = min(sol.t[-1], t_hit + 1e-6)
        g = lambda s, b=which: dense(s)[0] - b
        if g(lo_t) * g(hi_t) < 0:
            t_hit = _bisect_event(g, lo_t, hi_t)
        segments.append(_Segment(t, t_hit, dense, (u, v)))
        events.append(t_hit)
        t, u, v = t_hit, which, float(dense(t_hit)[1])
    return UniformSeries(segments, events)


# ---------------------------------------------------------------------------
# free-free beam spectrum


def _char_scaled(x: float) -> float:
    # cos(x) cosh(x) = 1 divided through by cosh(x); same roots, O(1) slope
    return math.cos(x) - 1.0 / math.cosh(x)


def free_free_roots(count: int, xtol: float = 1e-13) -> list[float]:
    """First ``count`` positive roots of ``cos(x) cosh(x) = 1`` (excluding 0)."""
    if not 1 <= count <= 10:
        raise ValueError("count must be between 1 and 10")
    roots = []
    for k in range(1, count + 1):
        c = (k + 0.5) * math.pi
        lo, hi = c - 0.3, c + 0.3
        flo = _char_scaled(lo)
        if flo * _char_scaled(hi) > 0:
            raise RuntimeError(f"root {k} not bracketed")
        while hi - lo > xtol:
            mid = 0.5 * (lo + hi)
            fm = _char_scaled(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return roots


def free_free_frequencies(params, count: int) -> list[float]:
    """Angular frequencies ``(x_k / L)**2 sqrt(mu / rho)`` of the free-free beam."""
    scale = math.sqrt(params.mu / params.rho) / params.length**2
    return [x * x * scale for x in free_free_roots(count)]
