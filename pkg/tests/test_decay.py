import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampwave.decay import (
    DecayFit,
    classify_data,
    dumps,
    fit_decay,
    rate_targets,
    report,
    verdicts_of,
    verify_rates,
)
from dampwave.energetics import FunctionalParams, ledger
from dampwave.errors import FitError, ParameterError
from dampwave.grid import Grid
from dampwave.model import DampingSpec, random_tensor
from dampwave.sampling import sample_profile
from dampwave.solver import InitialData, RunConfig, normalized, simulate


def test_odd_data_is_mean_zero():
    g = Grid(1, 401, 20.0)
    data = InitialData(u1=sample_profile(0, "odd_bump", 4.0, 1))
    rep = classify_data(data, DampingSpec(1.0, 2.0), 1.0, g)
    assert rep.flags == {"lp_integrable": False, "weighted_l2": False, "mean_zero": True}
    assert rep.label == "H3"
    assert rep.integrals[0] == 0.0


def test_even_data_is_not_mean_zero():
    g = Grid(1, 401, 20.0)
    data = InitialData(u1=sample_profile(0, "gaussian", 4.0, 1))
    rep = classify_data(data, DampingSpec(1.0, 2.0), 1.0, g)
    assert not rep.any and rep.label == "none"
    assert abs(rep.integrals[0]) > 0


def test_hypothesis_transfer_to_rescaled_data():
    g = Grid(1, 801, 20.0)
    spec = DampingSpec(1.0, 2.0)
    data = InitialData(u0=sample_profile(1, "gaussian", 4.0, 1),
                       u1=sample_profile(2, "bump", 4.0, 1))
    rep = classify_data(data, spec, 0.5, g)
    # int f_lam = lam^{-d} int f
    assert rep.transfer["integral_ratio"][0] == pytest.approx(1.0, rel=1e-8)
    odd = classify_data(InitialData(u1=sample_profile(0, "odd_bump", 4.0, 1)), spec, 0.5, g)
    assert odd.transfer["flags"]["H3"] and abs(odd.transfer["integrals"][0]) < 1e-12


def test_three_dimensional_flags():
    g = Grid(3, 25, 4.0)
    rep = classify_data(InitialData(u1=sample_profile(0, "bump", 1.5, 3)), None, 1.0, g)
    assert rep.flags["lp_integrable"] and rep.flags["weighted_l2"]
    assert not rep.flags["mean_zero"]
    assert len(rep.lp_norms) == 5
    with pytest.raises(ParameterError):
        classify_data(InitialData(), None, 0.0, g)


@given(st.floats(-5, -0.1), st.floats(0.1, 100.0))
def test_fit_recovers_exact_power_law(slope, c):
    t = np.linspace(0, 200, 401)
    q = c * (1 + t) ** slope
    fit = fit_decay(t, q, (20, 200), target=slope)
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.rms < 1e-9 and fit.passed


def test_fit_errors():
    t = np.linspace(0, 10, 11)
    with pytest.raises(FitError):
        fit_decay(t, np.ones_like(t), (1, 10), -1.0)
    t = np.linspace(0, 100, 201)
    q = np.ones_like(t)
    q[150] = -1.0
    with pytest.raises(FitError):
        fit_decay(t, q, (10, 100), -1.0)
    with pytest.raises(FitError):
        fit_decay(t, q, (0.5, 100), -1.0)
    zero = fit_decay(t, np.zeros_like(t), (10, 100), -1.0)
    assert zero.passed and zero.note == "identically zero"


def test_fit_verdict_uses_slack():
    assert DecayFit("q", (1, 2), -1.75, 0, -2.0, 0.3, 20).passed
    assert not DecayFit("q", (1, 2), -1.65, 0, -2.0, 0.3, 20).passed


def test_rate_targets():
    base = rate_targets(False, 0, 5, 3)
    assert [(n, t) for n, _, t, _ in base] == [("l2", 0.0), ("energy", -1.0)]
    fast = {n: (c, t, s) for n, c, t, s in rate_targets(True, 1, 5, 3)}
    assert fast["energy_mu1"] == ("E_mu1", -4.0, 0.4)
    assert fast["sobolev_mu0"] == ("H_L", -1.0, 0.3)
    assert fast["laplacian"] == ("lap_sq", -3.0, 0.4)
    assert "laplacian" not in {n for n, *_ in rate_targets(True, 0, 3, 3)}


@pytest.fixture(scope="module")
def short_ledger():
    g = Grid(1, 401, 40.0)
    cfg = RunConfig(g, DampingSpec(1.0, 2.0, r0=1.0), random_tensor(1, 7, 0.1), lam=0.5,
                    T_final=30.0, sample_every=10, L=4)
    data = normalized(InitialData(u1=sample_profile(0, "odd_bump", 6.0, 1)), g, 3, 1e-4)
    hyp = classify_data(data, cfg.damping, cfg.lam, g)
    led = ledger(simulate(cfg, data), FunctionalParams.from_config(cfg), (1,), hyp.any)
    return cfg, hyp, led


def test_verify_rates_and_report(short_ledger):
    cfg, hyp, led = short_ledger
    fits = verify_rates(led, hyp, mu_max=1, window=(3.0, 30.0))
    names = [f.name for f in fits]
    assert names[0] == "l2" and "energy_mu1" in names
    doc = report({"k": 1}, hyp, led, fits, {"extra": np.float64(2.0)}, {"checks": {"x": "PASS"}})
    assert list(doc) == ["config", "hypotheses", "ledger", "fits", "constants", "meta"]
    text = dumps(doc)
    assert json.loads(text)["hypotheses"]["flags"]["H3"] is True
    assert "eq29" in doc["ledger"]
    assert set(verdicts_of(doc)) <= {"PASS", "FAIL"}
    with pytest.raises(ParameterError):
        verify_rates(led, hyp, mu_max=2)
