import numpy as np
import pytest
from hypothesis import given, strategies as st

from pyXvaEngine import const
from pyXvaEngine.models import RateCurve
from pyXvaEngine.rtypes import (CashflowError, CollateralRule, CsaSpec, Deal, Flow, GridError, LimitCaseSpec,
                                PricingResult, TimeGrid)


def test_build_merges_marker_dates():
    grid = TimeGrid.build(1.0, 4, margin_dates=[0.5, 0.6], payment_dates=[1.0])
    assert grid.dates.tolist() == [0.0, 0.25, 0.5, 0.6, 0.75, 1.0]
    assert grid.is_margin.tolist() == [False, False, True, True, False, False]
    assert grid.is_payout[-1]
    assert grid.n_steps == 5
    assert grid.maturity == 1.0


def test_grid_validation():
    with pytest.raises(GridError):
        TimeGrid([0.0])
    with pytest.raises(GridError):
        TimeGrid([0.1, 1.0])
    with pytest.raises(GridError):
        TimeGrid([0.0, 0.5, 0.5, 1.0])
    with pytest.raises(GridError):
        TimeGrid([0.0, 1.0], margin_dates=[0.3])
    with pytest.raises(GridError):
        TimeGrid.build(1.0, 4, funding_dates=[2.0])


def test_segment_of():
    grid = TimeGrid([0.0, 1.0, 2.0])
    tau = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, np.inf])
    assert grid.segment_of(tau).tolist() == [-1, 0, 0, 1, 1, 2, 2]


def test_marked_neighbours():
    grid = TimeGrid([0.0, 1.0, 2.0, 3.0], margin_dates=[0.0, 2.0])
    assert grid.next_marked(grid.is_margin, 0) == 2
    assert grid.next_marked(grid.is_margin, 2) is None
    assert grid.last_marked(grid.is_margin, 1) == 0
    assert grid.last_marked(grid.is_margin, 3) == 2


def test_flow_values():
    flow = Flow(1.0, 1.0, 2.0, 0.5)
    assert np.allclose(flow.value(np.array([0.0, 2.0])), [1.0, 7.0])
    custom = Flow(1.0, function=np.exp)
    assert np.allclose(custom.scaled(2.0).value(np.zeros(3)), 2.0)


def test_deal_amounts_and_algebra():
    deal = Deal([Flow(0.5, 1.0), Flow(1.0, 2.0), Flow(1.0, 0.0, 1.0)], 1.0)
    assert deal.payment_times == [0.5, 1.0]
    assert np.allclose(deal.amount_at(1.0, np.array([0.0, 1.0])), [2.0, 3.0])
    assert np.allclose(deal.amount_at(0.75, np.zeros(2)), 0.0)
    doubled = 2.0 * deal
    assert np.allclose(doubled.amount_at(1.0, np.array([1.0])), [6.0])
    assert (deal + Deal([Flow(2.0, 1.0)])).maturity == 2.0


def test_deal_rejects_flows_after_maturity():
    with pytest.raises(CashflowError):
        Deal([Flow(2.0, 1.0)], 1.0)
    with pytest.raises(CashflowError):
        Deal([Flow(1.0, 1.0)], 1.0, notional=0.0)


@given(st.floats(-10, 10), st.floats(0, 1), st.floats(0, 1))
def test_collateral_target_never_overshoots(reference, alpha, threshold):
    target = float(CollateralRule(alpha, threshold).target(reference))
    assert abs(target) <= alpha * abs(reference) + 1e-12
    assert target * reference >= 0.0


def test_collateral_rule_transfer_amount():
    rule = CollateralRule(1.0, threshold=0.1, mta=0.05)
    assert not rule.is_linear
    assert np.allclose(rule.target([0.5, -0.05, -0.5]), [0.4, 0.0, -0.4])
    previous = np.array([0.38, 0.0])
    assert np.allclose(rule.apply(np.array([0.5, 0.5]), previous), [0.38, 0.4])


def test_csa_validation():
    with pytest.raises(CashflowError):
        CsaSpec([0.0], 0.0, 0.0, CollateralRule(0.5), close_out=const.CLOSE_OUT_COLLATERAL)
    with pytest.raises(CashflowError):
        CsaSpec([0.0], 0.0, 0.0, close_out="mid-market")
    with pytest.raises(CashflowError):
        CollateralRule(1.5)
    csa = CsaSpec([0.0, 1.0], RateCurve(0.01), RateCurve(0.02), CollateralRule(1.0))
    assert csa.collateralised
    assert not CsaSpec([], 0.0, 0.0).collateralised


def test_result_record():
    result = PricingResult(0.9, dict((name, 0.25) for name in const.COMPONENTS), 0.01, 0.002,
                           {"value": 1e-3}, seed=3, n_paths=10)
    record = result.to_dict()
    assert sorted(record["components"]) == sorted(const.COMPONENTS)
    assert record["fva"] is None
    assert record["nPaths"] == 10


def test_limit_case_kind():
    with pytest.raises(ValueError):
        LimitCaseSpec("unknown")
