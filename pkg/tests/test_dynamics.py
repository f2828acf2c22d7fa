import math

import numpy as np
import pytest

from beamadhesion.beam_operator import BeamParams, BeamState, Grid, apply_biharmonic
from beamadhesion.dynamics import (
    DissipationViolation,
    NumericalFailure,
    StabilityError,
    acceleration,
    energy,
    integrate,
    plan_steps,
    simulate,
    stability_limit,
    step,
)
from beamadhesion.analysis import energy_drift_ratio
from beamadhesion.potential import PotentialSpec, select_h

EXACT = PotentialSpec.exact()


def test_energy_examples(unit_params):
    g = Grid(21)
    e = energy(unit_params, g, EXACT, BeamState.uniform(g, 0.0, 2.0))
    assert e.total == pytest.approx(2.0, rel=1e-14)
    eps = 0.1
    e = energy(unit_params, g, PotentialSpec.smoothed(eps), BeamState.uniform(g, 1 + eps, 0.0))
    assert e.total == pytest.approx((2 - eps) * (1 + eps) / 2, rel=1e-14)
    z = energy(unit_params, g, EXACT, BeamState.uniform(g, 0.0, 0.0))
    assert z.total == z.kinetic == z.bending == z.adhesion == 0.0


def test_bending_energy_of_quadratic(unit_params):
    # u = x**2: u_xx = 2 on the n-2 interior nodes, the end values are closed to zero
    g = Grid(201)
    e = energy(unit_params, g, None, BeamState(0.0, g.x**2, np.zeros(201)))
    assert e.bending == pytest.approx(0.5 * 4 * g.h * (g.n_points - 2), rel=1e-9)
    assert e.bending == pytest.approx(2.0, rel=1.01 * g.h)


def test_acceleration_matches_public_pieces(unit_params, rng):
    g = Grid(33)
    u = rng.uniform(-1.5, 1.5, 33)
    u[3], u[7] = 1.0, -1.0
    for spec in (PotentialSpec.exact(0.7), PotentialSpec.smoothed(0.2), None):
        h = 0.0 if spec is None else select_h(spec, u)
        ref = (apply_biharmonic(unit_params, g, u) - h) / unit_params.rho
        np.testing.assert_allclose(acceleration(unit_params, g, spec, u), ref, rtol=1e-13, atol=1e-6)


def test_stability_limit_values(unit_params):
    assert stability_limit(unit_params, Grid(11)) == pytest.approx(0.0045, rel=1e-14)
    assert stability_limit(unit_params, Grid(6)) == pytest.approx(4 * stability_limit(unit_params, Grid(11)))
    stiff = BeamParams(1.0, 4.0, 1.0)
    assert stability_limit(stiff, Grid(11)) == pytest.approx(0.5 * stability_limit(unit_params, Grid(11)))


def test_step_refuses_unstable_dt(unit_params):
    g = Grid(11)
    lim = stability_limit(unit_params, g)
    with pytest.raises(StabilityError) as info:
        step(unit_params, g, EXACT, BeamState.uniform(g, 0, 0), 1.01 * lim)
    assert info.value.limit == lim


def test_stable_at_limit_unstable_past_verlet_bound(unit_params, rng):
    g = Grid(21)
    state = BeamState(0.0, rng.normal(scale=1e-3, size=21), np.zeros(21))
    lim = stability_limit(unit_params, g)
    traj = integrate(unit_params, g, None, state, lim, 10_000, 100)
    assert np.max(np.abs(traj.u)) < 1e-2
    # the 0.9 safety factor leaves ~11% headroom; 5% past the bare Verlet bound diverges
    with pytest.raises(NumericalFailure):
        integrate(unit_params, g, None, state, 1.05 * lim / 0.9, 10_000, 100, check_limit=False)


def test_uniform_state_stays_uniform(unit_params):
    g = Grid(41)
    traj = simulate(unit_params, g, PotentialSpec.smoothed(0.1), BeamState.uniform(g, 0.9, 0.3), 1.0)
    assert np.all(traj.u == traj.u[:, :1])
    assert np.all(traj.bending == 0.0)


def test_zero_data_stays_zero(unit_params):
    g = Grid(21)
    traj = simulate(unit_params, g, EXACT, BeamState.uniform(g, 0, 0), 1.0)
    assert np.all(traj.u == 0) and np.all(traj.total_energy == 0)
    assert traj.report["max_relative_excess"] == 0.0 and traj.report["relative"] is False


def test_ex71_tracking_second_order(unit_params):
    g = Grid(11)
    eps = 0.1
    spec = PotentialSpec.smoothed(eps)
    state = BeamState.uniform(g, 1 - eps, 0.0)
    w = math.sqrt(2 - eps)
    errs = []
    for dt in (1e-3, 5e-4):
        traj = simulate(unit_params, g, spec, state, 10.0, dt)
        errs.append(np.max(np.abs(traj.u[:, 0] - (1 - eps) * np.cos(w * traj.t))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_ex72_escape_exact(unit_params):
    g = Grid(11)
    eps = 0.1
    traj = simulate(unit_params, g, EXACT, BeamState.uniform(g, 1 + eps, eps), 10.0, 1e-3)
    assert np.all(traj.v == eps)
    n_steps = round(10.0 / traj.dt)
    assert np.max(np.abs(traj.u - (eps * traj.t + 1 + eps)[:, None])) <= n_steps * 2.3e-16 * 2.1


def test_ex73_crosses_kink(unit_params):
    g = Grid(11)
    traj = simulate(unit_params, g, EXACT, BeamState.uniform(g, 0.0, 2.0), 2.0, 1e-4)
    t = traj.t
    ts = math.pi / (4 * math.sqrt(2))
    ref = np.where(t <= ts, math.sqrt(2) * np.sin(math.sqrt(2) * t), math.sqrt(2) * t + 1 - math.pi / 4)
    assert np.max(np.abs(traj.u[:, 0] - ref)) < 1e-3
    assert np.max(np.abs(traj.total_energy - 2.0)) < 2e-3


def test_time_reversal(unit_params):
    g = Grid(41)
    x = g.x
    state = BeamState(0.0, 0.6 * np.cos(2 * np.pi * x) + 0.5, 0.3 * np.sin(np.pi * x))
    spec = PotentialSpec.smoothed(0.1)
    dt = 0.5 * stability_limit(unit_params, g)
    fwd = integrate(unit_params, g, spec, state, dt, 20_000, 20_000, with_energy=False).final
    back = integrate(unit_params, g, spec, BeamState(0.0, fwd.displacement, -fwd.velocity), dt,
                     20_000, 20_000, with_energy=False).final
    assert np.max(np.abs(back.displacement - state.displacement)) <= 1e-8 * np.max(np.abs(state.displacement))
    assert np.max(np.abs(-back.velocity - state.velocity)) <= 1e-8 * np.max(np.abs(state.velocity))


def test_drift_ratio_smoothed(unit_params):
    g = Grid(41)
    state = BeamState(0.0, 0.5 * np.cos(2 * np.pi * g.x), np.zeros(41))
    r = energy_drift_ratio(unit_params, g, PotentialSpec.smoothed(0.1), state, 1.0,
                           0.5 * stability_limit(unit_params, g))
    assert 3.5 <= r["ratio"] <= 4.5


def test_smoothed_drift_small_at_reference(unit_params):
    g = Grid(401)
    state = BeamState.uniform(g, 0.95, 0.2)
    traj = simulate(unit_params, g, PotentialSpec.smoothed(0.1), state, 1.0)
    assert traj.report["max_relative_drift"] <= 1e-3


def test_exact_law_dissipation_audit(unit_params):
    g = Grid(41)
    state = BeamState(0.0, 1.2 * np.cos(2 * np.pi * g.x), np.zeros(41))
    traj = simulate(unit_params, g, EXACT, state, 5.0)
    assert traj.report["max_relative_excess"] <= 1e-3


def test_audit_raises_on_energy_gain(unit_params, monkeypatch):
    import beamadhesion.dynamics as dyn

    monkeypatch.setattr(dyn, "DISSIPATION_TOL", -1.0)
    g = Grid(11)
    with pytest.raises(DissipationViolation):
        simulate(unit_params, g, EXACT, BeamState.uniform(g, 0.5, 0.0), 0.1)


def test_trajectory_records(unit_params):
    g = Grid(11)
    traj = simulate(unit_params, g, EXACT, BeamState.uniform(g, 0.2, 0.0), 1.0, 1e-3, record_stride=7)
    assert traj.t[-1] == pytest.approx(1.0)
    assert np.all(np.diff(traj.t) > 0)
    assert len(traj.energies()) == len(traj.t) == len(traj.contact_fraction)
    assert np.all(traj.contact_fraction == 1.0)


def test_plan_steps_hits_horizon():
    dt, n = plan_steps(1.0, 0.3)
    assert n == 4 and dt * n == pytest.approx(1.0)
    with pytest.raises(ValueError):
        plan_steps(0.0, 0.1)
