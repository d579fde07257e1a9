import numpy as np
import pytest

from pyXvaEngine import const
from pyXvaEngine.models import DefaultModel
from pyXvaEngine.oracles import (OracleDomainError, collateral_discount_price, discrete_recursion_oracle,
                                 funding_discount_price, limit_price, on_default_flow_enumerated, risk_free_price)
from pyXvaEngine.rtypes import Deal, Flow, LimitCaseSpec, TimeGrid


def _spec(kind, **kwargs):
    return LimitCaseSpec(kind, **kwargs)


def test_closed_forms():
    flows = [(1.0, 1.0), (2.0, 0.5)]
    assert risk_free_price(_spec(const.LIMIT_RISK_FREE, r=0.01), flows) == \
        pytest.approx(np.exp(-0.01) + 0.5 * np.exp(-0.02))
    assert collateral_discount_price(_spec(const.LIMIT_COLLATERAL, c=0.03), flows) == \
        pytest.approx(np.exp(-0.03) + 0.5 * np.exp(-0.06))
    spec = _spec(const.LIMIT_FUNDING_WITHOUT_COLLATERAL, f_plus=0.05, hazard_c=0.02)
    assert funding_discount_price(spec, flows) == pytest.approx(np.exp(-0.07) + 0.5 * np.exp(-0.14))


def test_limit_price_dispatch():
    deal = Deal([Flow(1.0, 1.0)])
    assert limit_price(_spec(const.LIMIT_COLLATERAL, c=0.03), deal) == pytest.approx(0.970446, abs=1e-6)
    assert limit_price(_spec(const.LIMIT_FUNDING_WITH_COLLATERAL, c=0.03, f_plus=0.2), deal) == \
        pytest.approx(np.exp(-0.03))
    assert limit_price(_spec(const.LIMIT_FUNDING_WITHOUT_COLLATERAL, f_plus=0.05, hazard_c=0.02), deal) == \
        pytest.approx(0.932394, abs=1e-6)
    assert limit_price(_spec(const.LIMIT_RISK_FREE, r=0.01), deal) == pytest.approx(np.exp(-0.01))


def test_funding_limit_domain():
    deal = Deal([Flow(1.0, 1.0)])
    with pytest.raises(OracleDomainError):
        limit_price(_spec(const.LIMIT_FUNDING_WITHOUT_COLLATERAL, hazard_i=0.01), deal)
    with pytest.raises(OracleDomainError):
        limit_price(_spec(const.LIMIT_FUNDING_WITHOUT_COLLATERAL, rec_c=0.4), deal)
    with pytest.raises(OracleDomainError):
        limit_price(_spec(const.LIMIT_FUNDING_WITHOUT_COLLATERAL), [(1.0, -1.0)])


def test_discrete_recursion():
    grid = TimeGrid.build(1.0, 4)
    spec = _spec(const.LIMIT_COLLATERAL, c=0.04)
    assert discrete_recursion_oracle(spec, [(1.0, 1.0)], grid) == pytest.approx(1.01 ** -4, rel=1e-14)
    assert discrete_recursion_oracle(spec, [(0.5, 1.0)], grid.dates) == pytest.approx(1.01 ** -2, rel=1e-14)
    funding = _spec(const.LIMIT_FUNDING_WITHOUT_COLLATERAL, f_plus=0.04, hazard_c=0.1)
    assert limit_price(funding, [(1.0, 1.0)], grid) == pytest.approx(np.exp(-0.1) * 1.01 ** -4, rel=1e-14)
    with pytest.raises(OracleDomainError):
        discrete_recursion_oracle(spec, [(0.3, 1.0)], grid)


def test_discrete_recursion_converges_to_the_limit():
    spec = _spec(const.LIMIT_COLLATERAL, c=0.03)
    errors = [abs(discrete_recursion_oracle(spec, [(1.0, 1.0)], TimeGrid.build(1.0, n)) - np.exp(-0.03))
              for n in (10, 50, 250, 1000)]
    assert all(a > b for a, b in zip(errors, errors[1:]))


def test_enumerated_scenarios():
    dm = DefaultModel(rec_i=0.2, rec_c=0.4, rec_i_prime=0.5, rec_c_prime=0.6)
    # counterparty owes more than it posted
    assert on_default_flow_enumerated(1.0, 0.4, const.COUNTERPARTY, dm) == pytest.approx(0.4 + 0.4 * 0.6)
    # investor's posted collateral partly lost
    assert on_default_flow_enumerated(1.0, -0.5, const.COUNTERPARTY, dm) == pytest.approx(-0.5 + 0.4 + 0.6 * 0.5)
    assert on_default_flow_enumerated(-1.0, 0.5, const.COUNTERPARTY, dm) == -1.0
    assert on_default_flow_enumerated(-1.0, -0.4, const.INVESTOR, dm) == pytest.approx(-0.4 - 0.2 * 0.6)
    assert on_default_flow_enumerated(1.0, -0.5, const.INVESTOR, dm) == 1.0
    segregated = on_default_flow_enumerated(1.0, -0.5, const.COUNTERPARTY, dm, rehypothecation=False)
    assert segregated == pytest.approx(-0.5 + 0.4 + 0.5)
    with pytest.raises(ValueError):
        on_default_flow_enumerated(1.0, 0.0, "bank", dm)
