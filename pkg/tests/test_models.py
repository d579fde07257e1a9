import numpy as np
import pytest
from hypothesis import given, strategies as st

from pyXvaEngine.models import (Curve, DefaultModel, HazardCurve, MarketModel, ModelDomainError, RateCurve,
                                ScenarioSet, collateral_bond, default_time, discount_factor, forward_funding_rate,
                                funding_bond, risky_adjusted_funding_bond, simulate)
from pyXvaEngine.rtypes import TimeGrid
from pyXvaEngine.utils import TimeOrderError

from conftest import flat_model, full_grid


def test_flat_curve():
    curve = Curve.flat(0.03, horizon=10.0)
    assert curve.discount(0.0) == 1.0
    assert curve.discount(2.0) == pytest.approx(np.exp(-0.06), abs=1e-15)
    assert discount_factor(curve, 1.0, 3.0) == pytest.approx(np.exp(-0.06), abs=1e-15)


def test_curve_interpolates_log_linearly():
    curve = Curve([1.0, 2.0], [0.01, 0.02])
    assert curve.discount(1.0) == pytest.approx(np.exp(-0.01))
    assert curve.discount(1.5) == pytest.approx(np.exp(-0.5 * (0.01 + 0.04)))


def test_curve_horizon():
    curve = Curve.flat(0.01, horizon=5.0)
    with pytest.raises(ModelDomainError):
        curve.discount(6.0)
    with pytest.raises(ModelDomainError):
        Curve([1.0, 0.5], [0.01, 0.01])
    with pytest.raises(TimeOrderError):
        discount_factor(curve, 2.0, 1.0)


def test_rate_curve_bonds():
    assert RateCurve(0.03).bond(0.0, 0.5) == pytest.approx(1.0 / 1.015)
    stepped = RateCurve([0.01, 0.05], [1.0])
    assert stepped.bond(1.0, 2.0) == pytest.approx(1.0 / 1.05)
    assert stepped.bond(0.0, 1.0) == pytest.approx(1.0 / 1.01)
    with pytest.raises(ModelDomainError):
        RateCurve(-2.0).bond(0.0, 1.0)


def test_zero_spread_reproduces_risk_free_bond():
    curve = Curve.flat(0.02)
    spread = RateCurve(0.0, spread_over=curve)
    assert spread.bond(1.0, 1.5) == pytest.approx(np.exp(-0.01), rel=1e-14)
    assert RateCurve(0.01, spread_over=curve).bond(0.0, 1.0) < np.exp(-0.02)


def test_collateral_bond_by_sign():
    pair = (0.01, 0.03)
    assert collateral_bond(pair, 0.0, 1.0, "-") == pytest.approx(1.0 / 1.01)
    assert collateral_bond(pair, 0.0, 1.0, "+") == pytest.approx(1.0 / 1.03)
    with pytest.raises(TimeOrderError):
        collateral_bond(0.01, 1.0, 1.0)
    assert forward_funding_rate(1.0 / 1.05, 0.0, 1.0) == pytest.approx(0.05)


def test_risky_adjusted_funding_bond():
    assert risky_adjusted_funding_bond(0.9, 0.0, 0.5) == pytest.approx(0.9)
    assert risky_adjusted_funding_bond(0.9, 0.6, 0.9) == pytest.approx(0.9 / (0.6 * 0.9 + 0.4))
    with pytest.raises(ModelDomainError):
        risky_adjusted_funding_bond(0.9, 1.5, 0.9)


unit = st.floats(min_value=0.01, max_value=1.0)


@given(st.floats(min_value=0.5, max_value=1.0), unit, unit, unit)
def test_risky_adjustment_falls_with_funder_survival(bond, lgd, s, u):
    low, high = sorted((s, u))
    assert risky_adjusted_funding_bond(bond, lgd, high) <= risky_adjusted_funding_bond(bond, lgd, low)


@given(st.floats(min_value=-0.1, max_value=0.5), st.floats(min_value=0.0, max_value=5.0),
       st.floats(min_value=0.01, max_value=5.0))
def test_rates_and_bonds_round_trip(rate, t, tenor):
    T = t + tenor
    assert forward_funding_rate(funding_bond(rate, t, T), t, T) == pytest.approx(rate, abs=1e-12)
    assert forward_funding_rate(collateral_bond(rate, t, T), t, T) == pytest.approx(rate, abs=1e-12)
    bond = funding_bond(rate, t, T)
    assert funding_bond(forward_funding_rate(bond, t, T), t, T) == pytest.approx(bond, abs=1e-12)


def test_hazard_curve():
    flat = HazardCurve(0.02)
    assert flat.survival(3.0) == pytest.approx(np.exp(-0.06))
    stepped = HazardCurve([0.01, 0.03], [2.0])
    assert stepped.cumulative(3.0) == pytest.approx(0.05)
    assert stepped.inverse(0.05) == pytest.approx(3.0)
    assert stepped.inverse(0.01) == pytest.approx(1.0)
    assert np.isinf(HazardCurve(0.0).inverse(0.1))
    with pytest.raises(ModelDomainError):
        HazardCurve(-0.01)


def test_default_time_inverts_survival():
    assert default_time(np.exp(-0.06), HazardCurve(0.02)) == pytest.approx(3.0)


def test_default_model_recoveries():
    with pytest.raises(ModelDomainError):
        DefaultModel(rec_c=0.5, rec_c_prime=0.3)
    with pytest.raises(ModelDomainError):
        DefaultModel(correlation=1.5)
    dm = DefaultModel(0.01, 0.02, 0.3, 0.4)
    assert dm.rec_c_prime == 0.4
    segregated = dm.segregated()
    assert segregated.rec_i_prime == 1.0 and segregated.rec_c_prime == 1.0
    assert segregated.lgd_c == pytest.approx(0.6)


def test_market_model_domain():
    with pytest.raises(ModelDomainError):
        MarketModel(Curve.flat(0.0), mean_reversion=0.0)
    with pytest.raises(ModelDomainError):
        MarketModel(Curve.flat(0.0), volatility=-0.1)


def test_zero_bond_matches_curve_at_zero_state():
    model = flat_model(0.02, volatility=0.01, stochastic_rates=True)
    assert model.zero_bond(0.0, 2.0, 0.0) == pytest.approx(np.exp(-0.04), rel=1e-12)
    deterministic = flat_model(0.02)
    assert np.allclose(deterministic.zero_bond(1.0, 2.0, np.zeros(3)), np.exp(-0.02))


def test_discounted_bonds_are_martingales():
    model = flat_model(0.02, volatility=0.01, stochastic_rates=True)
    grid = TimeGrid.build(2.0, 10)
    scenarios = simulate(model, grid, 20000, seed=5)
    target = np.exp(-0.04)
    for g in (0, 5, 10):
        discounted = scenarios.df[g] * scenarios.bond(g, 2.0)
        tolerance = 4.0 * discounted.std() / np.sqrt(discounted.size) + 1e-12
        assert abs(discounted.mean() - target) < tolerance


def test_default_frequencies():
    model = flat_model(0.0, hazard_i=0.05, hazard_c=0.2)
    scenarios = simulate(model, TimeGrid.build(1.0, 4), 50000, seed=9)
    for tau, hazard in ((scenarios.tau_i, 0.05), (scenarios.tau_c, 0.2)):
        p = 1.0 - np.exp(-hazard)
        assert abs(np.mean(tau <= 1.0) - p) < 4.0 * np.sqrt(p * (1.0 - p) / tau.size)


def test_simulation_is_independent_of_workers():
    model = flat_model(0.02, hazard_i=0.1, hazard_c=0.1, volatility=0.01, stochastic_rates=True)
    grid = TimeGrid.build(1.0, 6)
    one = simulate(model, grid, 10000, seed=3, workers=1)
    many = simulate(model, grid, 10000, seed=3, workers=4)
    assert np.array_equal(one.state, many.state)
    assert np.array_equal(one.df, many.df)
    assert np.array_equal(one.tau_i, many.tau_i)
    assert np.array_equal(one.tau_c, many.tau_c)


def test_paths_do_not_depend_on_path_count():
    model = flat_model(0.02, hazard_c=0.3, volatility=0.01)
    grid = TimeGrid.build(1.0, 3)
    small = simulate(model, grid, 5000, seed=21)
    large = simulate(model, grid, 9000, seed=21)
    assert np.array_equal(small.state, large.state[:, :5000])
    assert np.array_equal(small.tau_c, large.tau_c[:5000])


def test_deterministic_scenarios_broadcast():
    scenarios = simulate(flat_model(0.03), full_grid(steps=4), 100, seed=1)
    assert scenarios.state.shape == (5, 100)
    assert np.allclose(scenarios.df[-1], np.exp(-0.03))
    assert np.all(np.isinf(scenarios.tau))


def test_scenario_statistics_with_weights():
    grid = TimeGrid([0.0, 1.0])
    ones = np.ones((2, 4))
    scenarios = ScenarioSet(flat_model(), grid, ones, ones, np.full(4, np.inf), np.full(4, np.inf),
                            weights=[1.0, 1.0, 1.0, 5.0])
    assert scenarios.mean([0.0, 0.0, 0.0, 1.0]) == pytest.approx(0.625)
    assert scenarios.stderr(np.ones(4)) == 0.0
    with pytest.raises(ModelDomainError):
        ScenarioSet(flat_model(), grid, ones, 2.0 * ones, np.ones(4), np.ones(4))


def test_simulate_needs_paths():
    with pytest.raises(ModelDomainError):
        simulate(flat_model(), TimeGrid.build(1.0, 2), 0)
