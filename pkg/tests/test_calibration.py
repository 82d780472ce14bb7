import math

import numpy as np
import pytest

from fracvisc import (ConfigError, DomainError, FractionalModel, MasterCurve, ParamBounds,
                      PsoConfig, cost, fit, model_moduli, relative_error, synthesize_curve)
from fracvisc import calibration
from fracvisc.calibration import free_parameters
from fracvisc.reference import reference_model
from fracvisc.viscomodel import constrained_tau2

SMALL = PsoConfig(n_pop=20, n_iter=60, n_runs=3, seed=5)


@pytest.fixture(scope="module")
def curve20():
    return synthesize_curve(reference_model("20HS/0.0", constrained=True), np.logspace(-8, 2, 61))


def test_cost_zero_for_exact_model(curve20):
    m = reference_model("20HS/0.0", constrained=True)
    assert cost(m, curve20) == 0.0
    assert relative_error(m, curve20) == 0.0


def test_cost_one_decade_single_point():
    m = reference_model("20HS/0.0")
    e1, e2 = model_moduli(m, np.array([1.0, 2.0]))
    # second point reproduced exactly; first point storage off by one decade
    data = MasterCurve([1.0, 2.0], [10 * e1[0], e1[1]], e2)
    assert cost(m, data, 0.5, 0.5) == pytest.approx(0.5, rel=1e-14)


def test_cost_hand_arithmetic():
    m = reference_model("40HS/0.0")
    x = np.array([0.1, 1.0, 10.0])
    e1, e2 = model_moduli(m, x)
    r1, r2 = np.array([2.0, 0.5, 1.0]), np.array([1.0, 3.0, 0.25])
    data = MasterCurve(x, e1 * r1, e2 * r2)
    hand = 0.3 * sum(math.log10(v) ** 2 for v in r1) + 0.7 * sum(math.log10(v) ** 2 for v in r2)
    assert cost(m, data, 0.3, 0.7) == pytest.approx(hand, rel=1e-12)
    den = 0.3 * sum(math.log10(v) ** 2 for v in data.e_storage) + \
        0.7 * sum(math.log10(v) ** 2 for v in data.e_loss)
    assert relative_error(m, data, 0.3, 0.7) == pytest.approx(hand / den, rel=1e-12)


def test_cost_domain_errors():
    m = FractionalModel.from_vector([0, 1, 0.5, 0, 0, 1, 0.5])
    data = MasterCurve([1.0, 2.0], [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        cost(m, data)
    with pytest.raises(DomainError):
        relative_error(reference_model("20HS/0.0"), data)   # all log10 data are zero
    with pytest.raises(ConfigError):
        cost(reference_model("20HS/0.0"), data, -1, 1)


def test_default_bounds_and_dimensions():
    b = ParamBounds.default("FMM-FMG", True)
    assert b.bounds["E_c1"] == (0.0, 1e4) and b.bounds["E_c2"] == (0.0, 1e3)
    assert b.bounds["tau_c1"] == (1e-3, 1e2) and "tau_c2" not in b.bounds
    assert len(free_parameters("FMM-FMG", True)) == 6
    assert len(free_parameters("FMG-FMG", True)) == 5
    assert "tau_c2" in ParamBounds.default("FMM-FMG", False).bounds


@pytest.mark.parametrize("bad", [{}, {"E_c1": (2, 1)}, {"nope": (0, 1)}, {"E_c1": (0, math.inf)}])
def test_bounds_validation(bad):
    with pytest.raises(ConfigError):
        ParamBounds(bad)


@pytest.mark.parametrize("kw", [dict(n_pop=1), dict(n_iter=0), dict(n_runs=0), dict(topology="star"),
                                dict(velocity_clamp=0)])
def test_pso_config_validation(kw):
    with pytest.raises(ConfigError):
        PsoConfig(**kw)


def test_missing_bound_is_config_error(curve20):
    with pytest.raises(ConfigError):
        fit(curve20, bounds=ParamBounds({"E_c1": (0, 1)}), cfg=SMALL)


def test_collapsed_bounds_return_point(curve20):
    m = reference_model("20HS/0.0", constrained=True)
    res = fit(curve20, bounds=ParamBounds.point(m), cfg=SMALL)
    assert res.best_model == m
    assert all(s == 0 for s in res.std.values())
    assert res.best_cost == 0.0


def test_fit_invariants(curve20, monkeypatch):
    seen = []
    original = calibration._batch_cost

    def spy(P7, *a, **k):
        seen.append(P7.copy())
        return original(P7, *a, **k)

    monkeypatch.setattr(calibration, "_batch_cost", spy)
    bounds = ParamBounds.default()
    res = fit(curve20, bounds=bounds, cfg=SMALL)
    P = np.vstack(seen)
    lo, hi = bounds.for_names(res.param_names)
    cols = [calibration.PARAM_NAMES.index(n) for n in res.param_names]
    assert np.all(P[:, cols] >= lo) and np.all(P[:, cols] <= hi)
    ok = (P[:, 0] > 0) & (P[:, 4] > 0)
    tau2 = [constrained_tau2(t, a, b) for t, a, b in P[ok][:, [1, 0, 4]]]
    np.testing.assert_allclose(P[ok][:, 5], tau2, rtol=1e-12)
    assert np.all(np.diff(res.history, axis=1) <= 0)
    assert res.best_cost == res.run_costs.min()
    assert res.history.shape == (SMALL.n_runs, SMALL.n_iter)
    assert all(v >= 0 for v in res.std.values())


def test_fit_deterministic_and_thread_independent(curve20):
    a = fit(curve20, cfg=SMALL, n_jobs=1)
    b = fit(curve20, cfg=SMALL, n_jobs=3)
    assert np.array_equal(a.run_params, b.run_params)
    assert np.array_equal(a.history, b.history)
    c = fit(curve20, cfg=PsoConfig(n_pop=20, n_iter=60, n_runs=3, seed=6))
    assert not np.array_equal(a.run_params, c.run_params)


def test_fit_reports_alpha_not_below_beta(curve20):
    res = fit(curve20, cfg=SMALL)
    assert np.all(res.run_params[:, 2] >= res.run_params[:, 3])


def test_unconstrained_and_fmg_kind(curve20):
    r = fit(curve20, kind="FMG-FMG", cfg=SMALL)
    assert r.best_model.branch1.beta == 0.0 and len(r.param_names) == 5
    r = fit(curve20, constrain_tau2=False, cfg=PsoConfig(n_pop=10, n_iter=5, n_runs=1, topology="global"))
    assert "tau_c2" in r.param_names and not r.best_model.tau2_constrained


@pytest.mark.slow
def test_repeated_runs_low_spread(grid):
    # noiseless data and a converging budget: runs agree to relative 1e-3
    m = reference_model("20HS/0.0", constrained=True)
    res = fit(synthesize_curve(m, grid), cfg=PsoConfig(n_pop=60, n_iter=4000, n_runs=8, seed=0))
    for name, mean in res.mean.items():
        assert res.std[name] / abs(mean) < 1e-3, name
