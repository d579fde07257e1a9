import logging

import numpy as np

from . import const
from .models import collateral_bond, simulate
from .policies import effective_funding_bonds
from .rtypes import CashflowError, CollateralPath, CollateralRule, CsaSpec, Deal, Flow  # noqa: F401
from .rtypes import TimeGrid
from .utils import negative_part, positive_part

logger = logging.getLogger(__package__)


def accrue(amount, bond_minus, bond_plus):
    # X- / P- + X+ / P+
    return negative_part(amount) / bond_minus + positive_part(amount) / bond_plus


def payout(deal, scenarios, t=0.0, T=None, stop_at_default=False):
    grid = scenarios.grid
    T = grid.maturity if T is None else T
    if T < t:
        raise CashflowError("payout interval reversed: t=%s T=%s" % (t, T))
    g0 = grid.index_of(t)
    total = np.zeros(scenarios.n_paths)
    for time in deal.payment_times:
        if time <= t or time > T + const.GRID_TOLERANCE:
            continue
        g = grid.index_of(time, "payment")
        amount = deal.amount_at(time, scenarios.state[g]) * (scenarios.df[g] / scenarios.df[g0])
        if stop_at_default:
            amount = np.where(scenarios.tau > time, amount, 0.0)
        total += amount
    return total


def collateral_paths(rule, scenarios, reference):
    grid = scenarios.grid
    values = np.zeros((grid.n_steps + 1, scenarios.n_paths))
    held = np.zeros(scenarios.n_paths)
    for g in range(grid.n_steps + 1):
        if grid.is_margin[g]:
            held = rule.apply(reference[g], held)
        values[g] = held
    values[grid.dates[:, None] > scenarios.tau[None, :]] = 0.0
    return CollateralPath(values, grid.is_margin)


def _margin_bonds(csa, scenarios, g, h):
    t, T = scenarios.grid.dates[g], scenarios.grid.dates[h]
    bond = scenarios.bond(g, T)
    return (bond, collateral_bond(csa.c_minus, t, T, "-", bond),
            collateral_bond(csa.c_plus, t, T, "+", bond))


def margining_summand(posted, csa, scenarios, g):
    # zero off margining dates and on the last one
    grid = scenarios.grid
    h = grid.next_marked(grid.is_margin, g)
    if not grid.is_margin[g] or h is None or g >= grid.n_steps:
        return np.zeros(scenarios.n_paths)
    bond, c_minus, c_plus = _margin_bonds(csa, scenarios, g, h)
    return posted - bond * accrue(posted, c_minus, c_plus)


def margining_cost(collateral, csa, scenarios):
    total = np.zeros(scenarios.n_paths)
    tau = scenarios.tau
    for g in scenarios.grid.margin_indices:
        summand = margining_summand(collateral.values[g], csa, scenarios, g)
        total += np.where(tau > scenarios.grid.dates[g], scenarios.df[g] * summand, 0.0)
    return total


def accrued_collateral(posted, bond_at_default, collateral_bond_value):
    # C_{t_k} P_tau(t_{k+1}) / P^c_{t_k}(t_{k+1})
    return posted * bond_at_default / collateral_bond_value


def pre_default_collateral(collateral, csa, scenarios, rows=None):
    # outside: defaults outside any margining period, valued 0
    grid = scenarios.grid
    tau = scenarios.tau
    if rows is None:
        rows = np.flatnonzero(tau <= grid.maturity)
    rows = np.asarray(rows)
    values = np.zeros(rows.size)
    outside = np.zeros(rows.size, dtype=bool)
    seg = grid.segment_of(tau[rows])
    for g in np.unique(seg):
        sel = np.flatnonzero(seg == g)
        if g < 0 or g >= grid.n_steps:
            outside[sel] = True
            continue
        values[sel], outside[sel] = _accrue_to_default(collateral.values, csa, scenarios, g, rows[sel])
    if outside.any():
        logger.debug("pre-default collateral: %d defaults outside a margining period", outside.sum())
    return values, outside


def _accrue_to_default(values, csa, scenarios, g, rows):
    # default in (t_g, t_{g+1}]; the account posted at t_k grows to tau at the
    # CSA rate of its margining period [t_k, t_h]
    grid = scenarios.grid
    model = scenarios.model
    tau = scenarios.tau[rows]
    on_margin = grid.is_margin[g + 1] & (np.abs(tau - grid.dates[g + 1]) <= const.GRID_TOLERANCE)
    k = grid.last_marked(grid.is_margin, g)
    h = grid.next_marked(grid.is_margin, g)
    if k is None or h is None:
        return np.where(on_margin, values[g + 1][rows], 0.0), ~on_margin
    t_k, t_h = grid.dates[k], grid.dates[h]
    bond_k = np.asarray(scenarios.bond(k, t_h))[rows]
    c_minus = collateral_bond(csa.c_minus, t_k, t_h, "-", bond_k)
    c_plus = collateral_bond(csa.c_plus, t_k, t_h, "+", bond_k)
    state_g = np.asarray(scenarios.state[g])[rows]
    t_g = scenarios.absolute(grid.dates[g])
    # P_tau(t_h) as the forward bond seen from t_g
    bond_tau = (model.zero_bond(t_g, scenarios.absolute(t_h), state_g)
                / model.zero_bond(t_g, scenarios.absolute(tau), state_g))
    posted = values[g][rows]
    out = bond_tau * accrue(posted, c_minus, c_plus)
    return np.where(on_margin, values[g + 1][rows], out), np.zeros(rows.size, dtype=bool)


def close_out_amount(convention, party, scenarios, g, rows, regressor=None, collateral_pre=None, deal=None):
    # regressor holds the t_g values: risk-free price or funding-inclusive continuation
    if party not in const.PARTIES:
        raise CashflowError("unknown defaulting party %s" % party)
    if convention == const.CLOSE_OUT_COLLATERAL:
        if collateral_pre is None:
            raise CashflowError("collateral-price close-out needs the pre-default collateral")
        return np.asarray(collateral_pre, dtype=float)
    if convention not in const.CLOSE_OUT_CONVENTIONS:
        raise CashflowError("unknown close-out convention %s" % convention)
    grid = scenarios.grid
    rows = np.asarray(rows)
    tau = scenarios.tau[rows]
    to_tau = np.asarray(scenarios.model.zero_bond(scenarios.absolute(grid.dates[g]), scenarios.absolute(tau),
                                                  np.asarray(scenarios.state[g])[rows]))
    if regressor is None:
        if deal is None:
            raise CashflowError("close-out without regressor needs the deal for nested simulation")
        logger.warning("close-out at step %d: no regressor, nested simulation on %d paths", g, rows.size)
        return nested_close_out(deal, scenarios, g, rows) / to_tau
    return np.asarray(regressor, dtype=float)[rows] / to_tau


def nested_close_out(deal, scenarios, g, rows, n_inner=const.NESTED_PATHS):
    grid = scenarios.grid
    t_g = grid.dates[g]
    inner_grid = TimeGrid(grid.dates[g:] - t_g)
    times = [t for t in deal.payment_times if t > t_g + const.GRID_TOLERANCE]
    out = np.zeros(len(rows))
    base_seed = scenarios.seed if scenarios.seed is not None else const.DEFAULT_SEED
    for n, row in enumerate(rows):
        inner = simulate(scenarios.model, inner_grid, n_inner, seed=((int(row) + 1) << 64) | base_seed,
                         initial_state=float(np.asarray(scenarios.state[g])[row]),
                         start_time=scenarios.absolute(t_g))
        value = np.zeros(n_inner)
        for time in times:
            h = inner_grid.index_of(time - t_g, "payment")
            value += deal.amount_at(time, inner.state[h]) * inner.df[h]
        out[n] = value.mean()
    return out


def _rehyp_recoveries(default_model, rehypothecation):
    if rehypothecation:
        return default_model
    return default_model.segregated()


def on_default_losses(epsilon, c_pre, defaulter, default_model, rehypothecation=True):
    # defaulter: party name, or boolean array True where the counterparty defaults first
    dm = _rehyp_recoveries(default_model, rehypothecation)
    epsilon = np.asarray(epsilon, dtype=float)
    c_pre = np.asarray(c_pre, dtype=float)
    if isinstance(defaulter, str):
        if defaulter not in const.PARTIES:
            raise CashflowError("unknown defaulting party %s" % defaulter)
        counterparty = np.full(np.broadcast(epsilon, c_pre).shape, defaulter == const.COUNTERPARTY)
    else:
        counterparty = np.asarray(defaulter, dtype=bool)
    exposure = positive_part(epsilon) - positive_part(c_pre)
    liability = negative_part(epsilon) - negative_part(c_pre)
    cva = dm.lgd_c * positive_part(exposure) + dm.lgd_c_prime * positive_part(liability)
    dva = -(dm.lgd_i * negative_part(liability) + dm.lgd_i_prime * negative_part(exposure))
    return np.where(counterparty, cva, 0.0), np.where(counterparty, 0.0, dva)


def on_default_flow(epsilon, c_pre, defaulter, default_model, rehypothecation=True):
    cva, dva = on_default_losses(epsilon, c_pre, defaulter, default_model, rehypothecation)
    theta = np.asarray(epsilon, dtype=float) - cva + dva
    return float(theta) if theta.ndim == 0 else theta


def funding_notional(amount, bond_plus, bond_minus):
    # N = F- / P^{f-} + F+ / P^{f+}: what the funder is repaid at the end of the period
    return accrue(amount, bond_minus, bond_plus)


def funding_summand(amount, bond, bond_minus, bond_plus):
    return amount - bond * funding_notional(amount, bond_plus, bond_minus)


def funding_flows(funding, policy, scenarios):
    grid = scenarios.grid
    default_model = scenarios.model.default_model
    tau = scenarios.tau
    total = np.zeros(scenarios.n_paths)
    for g in grid.funding_indices:
        h = grid.next_marked(grid.is_funding, g)
        if h is None:
            continue
        bond = scenarios.bond(g, grid.dates[h])
        bond_minus, bond_plus = effective_funding_bonds(policy, default_model, grid.dates[g], grid.dates[h],
                                                        risk_free=bond, start_time=scenarios.start_time)
        summand = funding_summand(funding.values[g], bond, bond_minus, bond_plus)
        total += np.where(tau > grid.dates[g], scenarios.df[g] * summand, 0.0)
    return total


def margin_flows_gross(collateral, csa, scenarios):
    # posting at the first margining date and accrued returns after it, until tau
    grid = scenarios.grid
    stop = np.minimum(scenarios.tau, grid.maturity)
    margins = grid.margin_indices
    total = np.zeros(scenarios.n_paths)
    if margins.size == 0:
        return total
    first, last = margins[0], margins[-1]
    total += np.where(grid.dates[first] < stop, collateral.values[first] * scenarios.df[first], 0.0)
    for k, h in zip(margins[:-1], margins[1:]):
        bond, c_minus, c_plus = _margin_bonds(csa, scenarios, k, h)
        posted = collateral.values[k]
        returned = accrue(posted, c_minus, c_plus) - collateral.values[h]
        total -= np.where(grid.dates[h] <= stop, returned * scenarios.df[h], 0.0)
    total -= np.where(grid.dates[last] <= stop, collateral.values[last] * scenarios.df[last], 0.0)
    return total
