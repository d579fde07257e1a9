import numpy as np
import pytest

from pyXvaEngine import const
from pyXvaEngine.models import Curve, DefaultModel, MarketModel, RateCurve, simulate
from pyXvaEngine.rtypes import CollateralRule, CsaSpec, Deal, Flow, TimeGrid


def full_grid(maturity=1.0, steps=10, margin=True, funding=True, payments=None):
    """Uniform grid margined and funded on every date."""
    base = TimeGrid.build(maturity, steps, payment_dates=payments if payments is not None else [maturity])
    return TimeGrid(base.dates, base.dates if margin else (), base.dates if funding else (),
                    payments if payments is not None else [maturity])


def flat_model(r=0.01, hazard_i=0.0, hazard_c=0.0, rec_i=0.0, rec_c=0.0, volatility=0.0,
               stochastic_rates=False, **kwargs):
    return MarketModel(Curve.flat(r), DefaultModel(hazard_i, hazard_c, rec_i, rec_c, **kwargs),
                       volatility=volatility, stochastic_rates=stochastic_rates)


def unit_deal(maturity=1.0):
    return Deal([Flow(maturity, 1.0)], maturity)


def perfect_csa(grid, c=0.03, rehypothecation=False):
    return CsaSpec(grid.dates, RateCurve(c), RateCurve(c), CollateralRule(alpha=1.0), rehypothecation,
                   const.CLOSE_OUT_COLLATERAL)


def uncollateralised_csa(close_out=const.CLOSE_OUT_RISK_FREE):
    return CsaSpec((), RateCurve(0.0), RateCurve(0.0), CollateralRule(alpha=0.0), False, close_out)


@pytest.fixture
def grid():
    return full_grid()


@pytest.fixture
def deal():
    return unit_deal()


@pytest.fixture
def risky_scenarios():
    model = flat_model(0.02, hazard_i=0.1, hazard_c=0.2, rec_i=0.3, rec_c=0.4, volatility=0.01,
                       stochastic_rates=True)
    return simulate(model, full_grid(steps=8), 4000, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
