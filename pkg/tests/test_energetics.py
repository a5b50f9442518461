import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampwave.energetics import (
    HYPOTHESIS_DEPENDENT,
    MONITORED,
    FunctionalParams,
    Snapshot,
    corrected_energy,
    cumulative_integral,
    energy,
    functional_flow_derivative,
    higher_energy,
    last_quarter_growth,
    ledger,
    lyapunov_functional,
    time_integral_field,
    zero_state_functionals,
)
from dampwave.errors import BlowUpError, ParameterError
from dampwave.grid import DerivativeTree, Field, Grid, multi_indices
from dampwave.model import DampingSpec, random_tensor
from dampwave.sampling import sample_profile
from dampwave.solver import InitialData, RunConfig, State, Trajectory, base_order, normalized, simulate


def small_run(T=20.0, lam=0.5, L=5, sample_every=4, n=401, X=40.0, target=1e-4, cfl=0.5):
    g = Grid(1, n, X)
    cfg = RunConfig(g, DampingSpec(1.0, 2.0, r0=1.0), random_tensor(1, 7, 0.1), lam=lam,
                    T_final=T, sample_every=sample_every, L=L, cfl_safety=cfl)
    data = normalized(InitialData(u1=sample_profile(0, "odd_bump", 6.0, 1)), g, 3, target)
    return cfg, simulate(cfg, data)


def test_constants():
    p = FunctionalParams(d=1, L=5, L0=3, lam=0.25, b0=1.0, R=2.0)
    assert p.C0 == 64.0
    assert p.weight == 256.0
    with pytest.raises(ParameterError):
        FunctionalParams(d=1, L=5, L0=3, lam=0.25, b0=1.0, R=2.0, C1=0.1)
    # the first term takes over for wide dead zones in three dimensions
    q = FunctionalParams(d=3, L=4, L0=4, lam=1.0, b0=0.1, R=1.0, C1=10.0)
    assert q.C0 == pytest.approx((0.1 * 9 + 10 * 0.1 * 5 / 2) * 4)


def test_from_config_needs_damping():
    cfg = RunConfig(Grid(1, 101, 5.0))
    with pytest.raises(ParameterError):
        FunctionalParams.from_config(cfg)


def test_zero_state_functionals_vanish():
    cfg = RunConfig(Grid(1, 101, 5.0), DampingSpec(1.0, 2.0), random_tensor(1, 0, 0.1), L=4)
    vals = zero_state_functionals(cfg.grid, cfg, FunctionalParams.from_config(cfg))
    assert all(v == 0 for v in vals.values())


def test_energy_of_plane_profile():
    g = Grid(1, 401, 10.0)
    x = g.coords[0]
    u = Field(g, np.exp(-x**2)[None])
    # |u'|^2 = int 4x^2 exp(-2x^2) = sqrt(pi/2)
    e = energy(State(u, g.zeros(), 0.0))
    assert e == pytest.approx(0.5 * math.sqrt(math.pi / 2), rel=2e-5)


def test_higher_energy_is_sum_of_base_energies():
    g = Grid(2, 31, 4.0)
    rng = np.random.default_rng(0)
    u = Field(g, rng.standard_normal((2, *g.shape)) * np.exp(-g.radius**2))
    v = Field(g, rng.standard_normal((2, *g.shape)) * np.exp(-g.radius**2))
    tu, tv = DerivativeTree(u.data, g), DerivativeTree(v.data, g)
    expected = sum(energy(State(Field(g, tu[a]), Field(g, tv[a]), 0.0))
                   for a in multi_indices(2, 2))
    assert higher_energy(State(u, v, 0.0), 3) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ParameterError):
        higher_energy(State(u, v, 0.0), 3, mu=1)


def test_lyapunov_parts_add_up():
    cfg, traj = small_run(T=2.0)
    params = FunctionalParams.from_config(cfg)
    state = traj.state(len(traj) - 1)
    G, parts = lyapunov_functional(state, 5, 0, cfg, params)
    assert G == pytest.approx(sum(parts))
    assert parts[0] == pytest.approx(params.weight * corrected_energy(state, 5, 0, cfg))


def test_corrected_energy_equals_energy_without_tensor():
    g = Grid(1, 201, 10.0)
    cfg = RunConfig(g, DampingSpec(1.0, 2.0), L=4)
    data = InitialData(u1=sample_profile(1, "odd_bump", 4.0, 1))
    traj = simulate(cfg.with_(T_final=1.0), data)
    state = traj.state(len(traj) - 1)
    assert corrected_energy(state, 4, 1, cfg) == pytest.approx(higher_energy(state, 4, 1, cfg))


def test_flow_derivative_matches_sampled_difference():
    # along a finely sampled run the time derivative of G from the equation
    # must agree with a centered difference of sampled values
    cfg, traj = small_run(T=0.2, sample_every=1, n=801, X=40.0, target=1e-3, cfl=0.05)
    params = FunctionalParams.from_config(cfg)
    G = [lyapunov_functional(s, 5, 0, cfg, params)[0] for s in traj.states()]
    k = len(traj) // 2
    dt = cfg.dt
    fd = (G[k - 2] - 8 * G[k - 1] + 8 * G[k + 1] - G[k + 2]) / (12 * dt)
    snap = Snapshot(traj.state(k), cfg, 0, params)
    flow = functional_flow_derivative(snap, 5, 0)
    assert flow == pytest.approx(fd, rel=2e-2, abs=1e-3 * abs(G[k]))


def test_ledger_on_short_run():
    cfg, traj = small_run(T=20.0)
    params = FunctionalParams.from_config(cfg)
    led = ledger(traj, params, mu_list=(2,))
    assert led.mu_list == (1, 2)
    assert set(led.verdicts) == set(MONITORED)
    assert all(len(v) == len(traj) for v in led.columns.values())
    for name in ("smallness", "corrected_energy_sandwich", "equivalence", "master_inequality"):
        assert led.verdicts[name].passed, name
    tags = led.by_tag()
    assert set(tags) == set(MONITORED.values())
    assert led.rows()[0]["t"] == 0.0


def test_ledger_marks_hypothesis_dependent_entries():
    cfg, traj = small_run(T=4.0)
    led = ledger(traj, FunctionalParams.from_config(cfg), mu_list=(1,), hypothesis=False)
    for name, v in led.verdicts.items():
        assert (v.status == "N/A") == (name in HYPOTHESIS_DEPENDENT)


def test_ledger_rejects_large_mu():
    cfg, traj = small_run(T=1.0, L=4)
    with pytest.raises(ParameterError):
        ledger(traj, FunctionalParams.from_config(cfg), mu_list=(2,))


def test_ledger_rejects_blown_up_trajectory():
    cfg, traj = small_run(T=1.0)
    traj.blowup_time = 0.5
    with pytest.raises(BlowUpError):
        ledger(traj, FunctionalParams.from_config(cfg))


def test_single_sample_ledger():
    cfg, traj = small_run(T=0.0)
    led = ledger(traj, FunctionalParams.from_config(cfg))
    assert len(led.times) == 1


def test_time_integral_hermite_rule():
    # u(t) = sin(t) f, so w(t) = (1 - cos t) f exactly
    g = Grid(1, 51, 5.0)
    cfg = RunConfig(g, T_final=10.0, dt=0.1, L=3)
    f = np.exp(-g.coords[0] ** 2)[None]
    t = np.linspace(0, 10, 11)
    traj = Trajectory(cfg, t, [np.sin(s) * f for s in t], [np.cos(s) * f for s in t])
    ti = time_integral_field(traj)
    for k, s in enumerate(t):
        np.testing.assert_allclose(ti.w[k], (1 - np.cos(s)) * f, atol=5e-3)
    assert np.all(np.diff(ti.running_sup) >= 0)


@given(st.lists(st.floats(0, 10), min_size=2, max_size=40))
def test_cumulative_integral_is_monotone_for_nonnegative(values):
    t = np.arange(len(values), dtype=float)
    c = cumulative_integral(t, np.array(values))
    assert c[0] == 0 and np.all(np.diff(c) >= 0)
    assert c[-1] == pytest.approx(np.trapezoid(values, t) if hasattr(np, "trapezoid")
                                  else np.trapz(values, t))


def test_last_quarter_growth():
    t = np.linspace(0, 100, 101)
    assert last_quarter_growth(t, np.ones(101)) == 0.0
    grow = t.copy()
    assert last_quarter_growth(t, grow) == pytest.approx(0.25)
    assert last_quarter_growth(t[:1], grow[:1]) == 0.0
