import logging

import numpy as np

from . import const
from .models import RateCurve, funding_bond, risky_adjusted_funding_bond
from .utils import time_check

logger = logging.getLogger(__package__)


class PolicyError(ValueError):
    pass


def no_hedge(t, state):
    return 0.0


class LiquidityPolicy(object):
    # direct-market swaps P^{f+} for the funder's default-adjusted bond
    def __init__(self, kind=const.POLICY_TREASURY, f_plus=0.0, f_minus=0.0, funding_dates=(),
                 funder_recovery=None, hedge=None, liquidity_basis=None):
        if kind not in const.POLICY_KINDS:
            raise PolicyError("unknown liquidity policy %s" % kind)
        if funder_recovery is not None and not 0.0 <= funder_recovery <= 1.0:
            raise PolicyError("funder recovery must lie in [0, 1]")
        self.kind = kind
        self.f_plus = f_plus
        self.f_minus = f_minus
        self.funding_dates = [float(t) for t in funding_dates]
        self.funder_recovery = None if funder_recovery is None else float(funder_recovery)
        self.hedge = hedge if hedge is not None else no_hedge
        # optional (lambda, l+, l-) decomposition of the funding spread, labels only
        self.liquidity_basis = liquidity_basis

    @classmethod
    def large_pool(cls, rate, funding_dates=(), kind=const.POLICY_TREASURY, **kwargs):
        if not isinstance(rate, RateCurve):
            rate = RateCurve(rate)
        return cls(kind, rate, rate, funding_dates, **kwargs)

    @property
    def is_market(self):
        return self.kind == const.POLICY_MARKET

    def recovery(self, default_model):
        if self.funder_recovery is not None:
            return self.funder_recovery
        return default_model.rec_i

    def __repr__(self):
        out = ['kind=%s' % self.kind, 'f_plus=%r' % self.f_plus, 'f_minus=%r' % self.f_minus,
               'funding_dates=%d' % len(self.funding_dates)]
        if self.funder_recovery is not None:
            out += ['funder_recovery=%r' % self.funder_recovery]
        if self.hedge is not no_hedge:
            out += ['hedge=%s' % getattr(self.hedge, "__name__", repr(self.hedge))]
        return 'LiquidityPolicy(%s)' % ', '.join(out)


def funding_amount(continuation, collateral, hedge=0.0, rehypothecation=False):
    amount = np.asarray(continuation, dtype=float) - hedge
    if rehypothecation:
        amount = amount - collateral
    return amount


@time_check(strict=True, position=2)
def effective_funding_bonds(policy, default_model, t, T, risk_free=None, start_time=0.0):
    bond_minus = funding_bond(policy.f_minus, t, T, "-", risk_free)
    bond_plus = funding_bond(policy.f_plus, t, T, "+", risk_free)
    if not policy.is_market:
        return bond_minus, bond_plus
    hazard = default_model.hazard_i
    survival = np.exp(hazard.cumulative(start_time + t) - hazard.cumulative(start_time + T))
    lgd = 1.0 - policy.recovery(default_model)
    return bond_minus, risky_adjusted_funding_bond(bond_plus, lgd, survival)
