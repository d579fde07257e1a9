import logging

import numpy as np

from . import const
from .cashflows import (accrue, close_out_amount, collateral_paths, funding_flows, margining_cost,
                        margining_summand, on_default_flow, on_default_losses, payout, pre_default_collateral)
from .models import collateral_bond
from .policies import effective_funding_bonds, funding_amount
from .rtypes import BackwardState, CollateralPath, FundingPath, PricingResult

logger = logging.getLogger(__package__)


class PricingError(Exception):
    pass


class ConvergenceError(PricingError):
    def __init__(self, message, iterates):
        super(ConvergenceError, self).__init__(message)
        self.iterates = list(iterates)


class ScenarioMismatchError(PricingError):
    pass


def _basis(columns, mask, degree):
    features = [np.ones(columns[0].size)]
    for column in columns:
        sample = column[mask]
        centre, scale = sample.mean(), sample.std()
        if not scale > 1e-12 * max(1.0, abs(centre)):
            logger.debug("regression: constant column dropped")
            continue
        z = (column - centre) / scale
        for power in range(1, degree + 1):
            features.append(z ** power)
    return np.column_stack(features)


def regress_conditional(state, target, mask=None, degree=const.DEFAULT_BASIS_DEGREE, weights=None,
                        extra=None, record=None):
    target = np.asarray(target, dtype=float)
    n = target.shape[0]
    mask = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    columns = [np.broadcast_to(np.asarray(state, dtype=float), (n,))]
    if extra is not None:
        columns.append(np.broadcast_to(np.asarray(extra, dtype=float), (n,)))
    samples = int(mask.sum())
    if samples == 0:
        return np.zeros(target.shape)
    sample_weights = None if weights is None else weights[mask]
    basis = _basis(columns, mask, degree)
    if samples < const.MIN_SAMPLES_PER_BASIS * basis.shape[1]:
        logger.warning("regression: %d survivors for %d basis functions, using their mean",
                       samples, basis.shape[1])
        mean = np.average(target[mask], axis=0, weights=sample_weights)
        return np.broadcast_to(mean, target.shape).copy()

    lhs, rhs = basis[mask], target[mask]
    if sample_weights is not None:
        root = np.sqrt(sample_weights)
        lhs = lhs * root[:, None]
        rhs = rhs * (root[:, None] if rhs.ndim == 2 else root)
    coefficients, _, rank, singular = np.linalg.lstsq(lhs, rhs, rcond=None)
    if rank < lhs.shape[1] and degree > 0:
        logger.warning("regression: rank %d of %d, reducing basis degree to %d", rank, lhs.shape[1], degree - 1)
        return regress_conditional(state, target, mask, degree - 1, weights, extra, record)
    if record is not None:
        record["coefficients"] = coefficients
        record["condition"] = float(singular[0] / singular[-1]) if singular[-1] > 0 else float("inf")
        record["degree"] = degree
    return basis @ coefficients


def implicit_collateral(csa, grid):
    # linear rule, collateral-price close-out, margining on every date
    return (csa.collateralised and csa.rule.is_linear and csa.close_out == const.CLOSE_OUT_COLLATERAL
            and bool(grid.is_margin.all()))


def clean_rollback(deal, scenarios, degree=const.DEFAULT_BASIS_DEGREE):
    grid = scenarios.grid
    values = np.zeros((grid.n_steps + 1, scenarios.n_paths))
    for g in range(grid.n_steps - 1, -1, -1):
        flow = deal.amount_at(grid.dates[g + 1], scenarios.state[g + 1])
        target = scenarios.step_discount(g) * (values[g + 1] + flow)
        values[g] = regress_conditional(scenarios.state[g], target, degree=degree, weights=scenarios.weights)
    return values


class Sweep(object):
    def __init__(self, scenarios, deal, csa, policy=None, degree=const.DEFAULT_BASIS_DEGREE, nested=False):
        self.scenarios = scenarios
        self.deal = deal
        self.csa = csa
        self.policy = policy
        self.degree = degree
        self.nested = nested
        grid = scenarios.grid
        self.tau = scenarios.tau
        self.segment = scenarios.default_segment()
        self.counterparty_first = scenarios.tau_c < scenarios.tau_i
        self.rehypothecation = 1.0 if csa.rehypothecation else 0.0
        self.implicit = implicit_collateral(csa, grid)
        self.collateral = None
        self.clean = None
        self.reference = None
        self.extra_regressor = csa.collateralised and not csa.rule.is_linear

    def flow(self, g):
        return self.deal.amount_at(self.scenarios.grid.dates[g + 1], self.scenarios.state[g + 1])

    def funding_end(self, g):
        grid = self.scenarios.grid
        if self.policy is None or not grid.is_funding[g]:
            return None
        return grid.next_marked(grid.is_funding, g)

    def hedge(self, g):
        if self.policy is None:
            return 0.0
        t = self.scenarios.absolute(self.scenarios.grid.dates[g])
        return self.policy.hedge(t, self.scenarios.state[g])

    def regressor(self, g):
        if self.csa.close_out == const.CLOSE_OUT_FUNDING:
            return self.reference[g]
        if self.nested or self.clean is None:
            return None
        return self.clean[g]

    def funding_bonds(self, g, h):
        scenarios = self.scenarios
        grid = scenarios.grid
        bond = scenarios.bond(g, grid.dates[h])
        bond_minus, bond_plus = effective_funding_bonds(self.policy, scenarios.model.default_model, grid.dates[g],
                                                        grid.dates[h], risk_free=bond,
                                                        start_time=scenarios.start_time)
        return bond, bond_minus, bond_plus


def _close_out(sweep, g, rows, c_pre):
    # epsilon is the same amount whichever party defaults
    eps = np.zeros(rows.size)
    first = sweep.counterparty_first[rows]
    for party, sel in ((const.COUNTERPARTY, first), (const.INVESTOR, ~first)):
        if sel.any():
            eps[sel] = close_out_amount(sweep.csa.close_out, party, sweep.scenarios, g, rows[sel],
                                        regressor=sweep.regressor(g), collateral_pre=c_pre[sel],
                                        deal=sweep.deal)
    return eps


def _exogenous_step(state, g, sweep, carried, rows, to_tau, record):
    scenarios = sweep.scenarios
    csa = sweep.csa
    dm = scenarios.model.default_model
    posted = sweep.collateral.values[g]
    default = np.zeros(scenarios.n_paths)
    if rows.size:
        c_pre, _ = pre_default_collateral(sweep.collateral, csa, scenarios, rows)
        eps = _close_out(sweep, g, rows, c_pre)
        theta = on_default_flow(eps, c_pre, sweep.counterparty_first[rows], dm, csa.rehypothecation)
        default[rows] = to_tau * theta
        state.close_out[rows] = eps
        state.pre_default[rows] = c_pre

    alive = sweep.tau > scenarios.grid.dates[g]
    target = carried + default
    if state.continuation is not None:
        target = np.column_stack([target, scenarios.step_discount(g) * (state.values + sweep.flow(g))])
    fitted = regress_conditional(scenarios.state[g], target, alive, sweep.degree, scenarios.weights,
                                 posted if sweep.extra_regressor else None, record)
    if state.continuation is not None:
        fitted, state.continuation[g] = fitted[:, 0], fitted[:, 1]
    estimate = fitted + margining_summand(posted, csa, scenarios, g)

    h = sweep.funding_end(g)
    if h is None:
        return estimate
    bond, bond_minus, bond_plus = sweep.funding_bonds(g, h)
    gap = funding_amount(estimate, posted, sweep.hedge(g), sweep.csa.rehypothecation)
    funded = gap * np.where(gap >= 0.0, bond_plus, bond_minus) / bond
    state.funding[g] = funded
    return funded + (estimate - gap)


def _implicit_step(state, g, sweep, carried, rows, to_tau, record):
    scenarios = sweep.scenarios
    grid = scenarios.grid
    csa = sweep.csa
    alpha = csa.rule.alpha
    t_g, t_next = grid.dates[g], grid.dates[g + 1]
    bond = scenarios.bond(g, t_next)
    c_minus = collateral_bond(csa.c_minus, t_g, t_next, "-", bond)
    c_plus = collateral_bond(csa.c_plus, t_g, t_next, "+", bond)
    ratio_plus = np.broadcast_to(bond / c_plus, (scenarios.n_paths,))
    ratio_minus = np.broadcast_to(bond / c_minus, (scenarios.n_paths,))
    hit = np.zeros(scenarios.n_paths)
    hit[rows] = 1.0

    alive = sweep.tau > t_g
    target = np.column_stack([carried, hit * ratio_plus, hit * ratio_minus])
    fitted = regress_conditional(scenarios.state[g], target, alive, sweep.degree, scenarios.weights, None, record)
    survival = fitted[:, 0]
    # value of one unit of collateral: margining cost plus its close-out share
    loading = {1: 1.0 - ratio_plus + fitted[:, 1], -1: 1.0 - ratio_minus + fitted[:, 2]}

    h = sweep.funding_end(g)
    rho_alpha = sweep.rehypothecation * alpha
    hedge = sweep.hedge(g)
    if h is not None:
        funding_bond, bond_minus, bond_plus = sweep.funding_bonds(g, h)
    conditions, candidates, amounts = [], [], []
    for sign_c in (1, -1):
        if h is None:
            value = survival / (1.0 - alpha * loading[sign_c])
            conditions.append((value >= 0.0) == (sign_c > 0))
            candidates.append(value)
            amounts.append(None)
            continue
        for sign_f, funded_bond in ((1, bond_plus), (-1, bond_minus)):
            kappa = funding_bond / funded_bond
            value = (survival + hedge * (kappa - 1.0)) / (1.0 - alpha * loading[sign_c]
                                                         + (1.0 - rho_alpha) * (kappa - 1.0))
            amount = funding_amount(value, alpha * value, hedge, csa.rehypothecation)
            conditions.append(((value >= 0.0) == (sign_c > 0)) & ((amount >= 0.0) == (sign_f > 0)))
            candidates.append(value)
            amounts.append(amount)
    values = np.select(conditions, candidates, default=candidates[0])
    if h is not None:
        state.funding[g] = np.select(conditions, amounts, default=amounts[0])

    posted = alpha * values
    state.collateral[g] = posted
    if rows.size:
        forward = np.broadcast_to(bond, (scenarios.n_paths,))[rows] / to_tau
        grown = accrue(posted[rows], np.broadcast_to(c_minus, (scenarios.n_paths,))[rows],
                       np.broadcast_to(c_plus, (scenarios.n_paths,))[rows])
        state.pre_default[rows] = forward * grown
        state.close_out[rows] = state.pre_default[rows]
    return values


def backward_step(state, g, sweep):
    # survivors carry D(t_g, t_{g+1})(V + flow), defaults inside the step D(t_g, tau) theta
    scenarios = sweep.scenarios
    grid = scenarios.grid
    logger.debug("backward step %d of %d", g, grid.n_steps)
    survives = sweep.tau > grid.dates[g + 1]
    rows = np.flatnonzero(sweep.segment == g)
    carried = np.where(survives, scenarios.step_discount(g) * (state.values + sweep.flow(g)), 0.0)
    to_tau = np.asarray(scenarios.model.zero_bond(scenarios.absolute(grid.dates[g]),
                                                  scenarios.absolute(sweep.tau[rows]),
                                                  np.asarray(scenarios.state[g])[rows]))
    record = {}
    step = _implicit_step if sweep.implicit else _exogenous_step
    values = step(state, g, sweep, carried, rows, to_tau, record)
    if "condition" in record:
        state.condition_numbers[g] = record["condition"]
        state.coefficients[g] = record["coefficients"]
    state.values = values
    state.history[g] = values
    state.g = g
    return state


def backward_sweep(sweep, continuation=False):
    grid = sweep.scenarios.grid
    state = BackwardState(sweep.scenarios.n_paths, grid.n_steps + 1, continuation, sweep.implicit)
    for g in range(grid.n_steps - 1, -1, -1):
        state = backward_step(state, g, sweep)
    return state


class Solution(object):
    def __init__(self, sweep, state, collateral, reference, iterates):
        self.sweep = sweep
        self.state = state
        self.collateral = collateral
        self.reference = reference
        self.iterates = iterates

    @property
    def value(self):
        return self.iterates[-1]


def _zero_collateral(scenarios):
    grid = scenarios.grid
    return CollateralPath(np.zeros((grid.n_steps + 1, scenarios.n_paths)), grid.is_margin)


def _implied_collateral(state, scenarios):
    values = np.where(scenarios.grid.dates[:, None] > scenarios.tau[None, :], 0.0, state.collateral)
    return CollateralPath(values, scenarios.grid.is_margin)


def solve(scenarios, deal, csa, policy=None, degree=const.DEFAULT_BASIS_DEGREE, collateral=None,
          start=None, nested=False):
    # start: earlier Solution whose collateral and close-out reference seed the first sweep
    if scenarios.n_paths < 1:
        raise PricingError("no scenarios to price")
    sweep = Sweep(scenarios, deal, csa, policy, degree, nested)
    # supplied collateral replaces the joint C = alpha V solve
    sweep.implicit = sweep.implicit and collateral is None
    funding_close_out = csa.close_out == const.CLOSE_OUT_FUNDING
    iterate = collateral is None and csa.collateralised and not sweep.implicit
    fixed_point = iterate or funding_close_out
    if (csa.close_out == const.CLOSE_OUT_RISK_FREE and not nested) or (start is None and fixed_point):
        sweep.clean = clean_rollback(deal, scenarios, degree)

    if start is not None:
        coll, reference, previous = start.collateral, start.reference, start.value
    else:
        coll = collateral
        reference = sweep.clean if funding_close_out else None
        previous = None
        if coll is None and iterate:
            coll = collateral_paths(csa.rule, scenarios, sweep.clean)
    if coll is None:
        coll = _zero_collateral(scenarios)

    iterates = []
    for n in range(const.MAX_SWEEPS):
        sweep.collateral = coll
        sweep.reference = reference
        state = backward_sweep(sweep, continuation=funding_close_out)
        value = float(scenarios.mean(state.history[0]))
        iterates.append(value)
        logger.debug("sweep %d: backward value %.12g", n, value)
        if sweep.implicit:
            coll = _implied_collateral(state, scenarios)
        if not fixed_point or (previous is not None
                               and abs(value - previous) < const.SWEEP_TOLERANCE * deal.notional):
            return Solution(sweep, state, coll, reference, iterates)
        previous = value
        if iterate:
            coll = collateral_paths(csa.rule, scenarios, state.history)
        if funding_close_out:
            reference = state.continuation
    logger.warning("fixed point not reached after %d sweeps: %s", const.MAX_SWEEPS, iterates[-2:])
    raise ConvergenceError("fixed point not reached after %d sweeps" % const.MAX_SWEEPS, iterates[-2:])


def forward_components(solution):
    sweep, state = solution.sweep, solution.state
    scenarios = sweep.scenarios
    grid = scenarios.grid
    dm = scenarios.model.default_model
    tau = sweep.tau

    flows = {const.COMPONENT_PAYOUT: payout(sweep.deal, scenarios, stop_at_default=True),
             const.COMPONENT_MARGINING: margining_cost(solution.collateral, sweep.csa, scenarios)}

    funding = np.zeros(scenarios.n_paths)
    if sweep.policy is not None and state.funding:
        values = np.zeros((grid.n_steps + 1, scenarios.n_paths))
        for g, amount in state.funding.items():
            values[g] = np.where(tau > grid.dates[g], amount, 0.0)
        funding = funding_flows(FundingPath(values, grid.is_funding), sweep.policy, scenarios)
    flows[const.COMPONENT_FUNDING] = funding

    defaulted = (tau <= grid.maturity) & (sweep.segment >= 0)
    discount = scenarios.discount_to_default()
    eps = np.where(defaulted, state.close_out, 0.0)
    c_pre = np.where(defaulted, state.pre_default, 0.0)
    cva, dva = on_default_losses(eps, c_pre, sweep.counterparty_first, dm, sweep.csa.rehypothecation)
    flows[const.COMPONENT_ON_DEFAULT] = np.where(defaulted, discount * (eps - cva + dva), 0.0)
    losses = {"cva": np.where(defaulted, discount * cva, 0.0), "dva": np.where(defaulted, discount * dva, 0.0)}
    return flows, losses


def _result(solution):
    scenarios = solution.sweep.scenarios
    flows, losses = forward_components(solution)
    components = dict((name, scenarios.mean(flows[name])) for name in const.COMPONENTS)
    total = sum(flows[name] for name in const.COMPONENTS)
    stderr = dict((name, scenarios.stderr(flows[name])) for name in const.COMPONENTS)
    stderr.update((name, scenarios.stderr(losses[name])) for name in losses)
    stderr["value"] = scenarios.stderr(total)
    state = solution.state
    diagnostics = {
        "backwardValue": solution.value,
        "sweeps": list(solution.iterates),
        "implicitCollateral": solution.sweep.implicit,
        "maxConditionNumber": max(state.condition_numbers.values()) if state.condition_numbers else 1.0,
    }
    value = sum(components[name] for name in const.COMPONENTS)
    return PricingResult(value, components, scenarios.mean(losses["cva"]), scenarios.mean(losses["dva"]),
                         stderr, len(solution.iterates), diagnostics, scenarios.seed, scenarios.n_paths,
                         pathwise=total)


def price_bccva(scenarios, deal, csa, collateral_paths=None, degree=const.DEFAULT_BASIS_DEGREE, nested=False):
    return _result(solve(scenarios, deal, csa, None, degree, collateral_paths, nested=nested))


def price_bccfva(scenarios, deal, csa, policy, degree=const.DEFAULT_BASIS_DEGREE, collateral_paths=None,
                 nested=False):
    base = solve(scenarios, deal, csa, None, degree, collateral_paths, nested=nested)
    funded = solve(scenarios, deal, csa, policy, degree, collateral_paths, start=base, nested=nested)
    base_result, result = _result(base), _result(funded)
    result.fva, result.stderr["fva"] = fva(base_result, result)
    result.iterations += base_result.iterations
    result.diagnostics["bccva"] = base_result.value
    return result


def fva(result_no_funding, result_funding):
    # standard error from common random numbers
    if (result_no_funding.seed != result_funding.seed
            or result_no_funding.n_paths != result_funding.n_paths):
        raise ScenarioMismatchError("FVA needs both prices on the same scenarios: seeds %s/%s, paths %s/%s"
                                    % (result_no_funding.seed, result_funding.seed,
                                       result_no_funding.n_paths, result_funding.n_paths))
    value = result_no_funding.value - result_funding.value
    a, b = result_no_funding.pathwise, result_funding.pathwise
    if a is None or b is None or a.size < 2:
        stderr = float(np.hypot(result_no_funding.stderr.get("value", 0.0), result_funding.stderr.get("value", 0.0)))
    else:
        stderr = float(np.std(a - b, ddof=1) / np.sqrt(a.size))
    return value, stderr
