import logging

import numpy as np

from . import const
from .rtypes import Deal, LimitCaseSpec, TimeGrid  # noqa: F401
from .utils import negative_part, positive_part

logger = logging.getLogger(__package__)


class OracleDomainError(ValueError):
    pass


def _schedule(cashflows):
    if isinstance(cashflows, Deal):
        times = np.asarray(cashflows.payment_times, dtype=float)
        amounts = np.array([float(cashflows.amount_at(t, 0.0)) for t in times])
        return times, amounts
    pairs = np.asarray(list(cashflows), dtype=float).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def risk_free_price(spec, cashflows):
    times, amounts = _schedule(cashflows)
    return float(np.sum(amounts * np.exp(-spec.r * times)))


def collateral_discount_price(spec, cashflows):
    times, amounts = _schedule(cashflows)
    return float(np.sum(amounts * np.exp(-spec.c * times)))


def _check_funding_case(spec, amounts):
    if spec.hazard_i != 0.0:
        raise OracleDomainError("funding discounting needs an investor that cannot default")
    if spec.rec_c != 0.0 or spec.rec_i != 0.0:
        raise OracleDomainError("funding discounting needs zero recoveries")
    if np.any(amounts < 0.0):
        raise OracleDomainError("funding discounting needs a non-negative payoff")


def funding_discount_price(spec, cashflows):
    times, amounts = _schedule(cashflows)
    _check_funding_case(spec, amounts)
    return float(np.sum(amounts * np.exp(-(spec.f_plus + spec.hazard_c) * times)))


def unilateral_cva_price(spec, cashflows):
    times, amounts = _schedule(cashflows)
    if spec.hazard_i != 0.0:
        raise OracleDomainError("unilateral price needs an investor that cannot default")
    if np.any(amounts < 0.0):
        raise OracleDomainError("unilateral price needs a non-negative payoff")
    survival = np.exp(-spec.hazard_c * times)
    return float(np.sum(amounts * np.exp(-spec.r * times) * (survival + spec.rec_c * (1.0 - survival))))


def discrete_recursion_oracle(spec, cashflows, grid):
    # products of one-period bonds; the risk-free bonds cancel
    dates = grid.dates if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    times, amounts = _schedule(cashflows)
    steps = np.diff(dates)
    if spec.kind in (const.LIMIT_COLLATERAL, const.LIMIT_FUNDING_WITH_COLLATERAL):
        factors = 1.0 / (1.0 + steps * spec.c)
    elif spec.kind == const.LIMIT_FUNDING_WITHOUT_COLLATERAL:
        _check_funding_case(spec, amounts)
        factors = np.exp(-spec.hazard_c * steps) / (1.0 + steps * spec.f_plus)
    else:
        factors = np.exp(-spec.r * steps)
    products = np.concatenate(([1.0], np.cumprod(factors)))
    value = 0.0
    for time, amount in zip(times, amounts):
        idx = int(np.argmin(np.abs(dates - time)))
        if abs(dates[idx] - time) > const.GRID_TOLERANCE:
            raise OracleDomainError("flow at %s is not on the oracle grid" % time)
        value += amount * products[idx]
    return float(value)


def limit_price(spec, cashflows, grid=None):
    if grid is not None:
        return discrete_recursion_oracle(spec, cashflows, grid)
    if spec.kind in (const.LIMIT_COLLATERAL, const.LIMIT_FUNDING_WITH_COLLATERAL):
        return collateral_discount_price(spec, cashflows)
    if spec.kind == const.LIMIT_FUNDING_WITHOUT_COLLATERAL:
        return funding_discount_price(spec, cashflows)
    return risk_free_price(spec, cashflows)


def on_default_flow_enumerated(epsilon, c_pre, defaulter, default_model, rehypothecation=True):
    dm = default_model if rehypothecation else default_model.segregated()
    eps, coll = float(epsilon), float(c_pre)
    gap = eps - coll
    if defaulter == const.COUNTERPARTY:
        rec, rec_prime = dm.rec_c, dm.rec_c_prime
        if eps >= 0.0 and coll >= 0.0:
            # exposure reduced by netting, the rest recovered
            return coll + rec * positive_part(gap) + negative_part(gap)
        if eps >= 0.0:
            return coll + rec * eps - rec_prime * coll
        if coll >= 0.0:
            # collateral returned in full
            return eps
        return coll + negative_part(gap) + rec_prime * positive_part(gap)
    if defaulter != const.INVESTOR:
        raise ValueError("unknown defaulting party %s" % defaulter)
    rec, rec_prime = dm.rec_i, dm.rec_i_prime
    if eps >= 0.0 and coll < 0.0:
        return eps
    if eps >= 0.0:
        return coll + positive_part(gap) + rec_prime * negative_part(gap)
    if coll < 0.0:
        return coll + positive_part(gap) + rec * negative_part(gap)
    return coll + rec * eps - rec_prime * coll
