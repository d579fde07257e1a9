import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import ndtr, ndtri

from . import const
from .rtypes import GridError, TimeGrid  # noqa: F401
from .utils import as_float_array, time_check

logger = logging.getLogger(__package__)


class ModelDomainError(ValueError):
    pass


class Curve(object):
    def __init__(self, times, rates):
        times, rates = as_float_array(times), as_float_array(rates)
        if times.size != rates.size or times.size == 0:
            raise ModelDomainError("curve needs matching, non-empty pillar times and rates")
        if np.any(times <= 0.0) or np.any(np.diff(times) <= 0.0):
            raise ModelDomainError("curve pillar times must be positive and increasing")
        self.times = times
        self.rates = rates
        self._knots = np.concatenate(([0.0], times))
        self._log_discount = np.concatenate(([0.0], -rates * times))

    @classmethod
    def flat(cls, rate, horizon=100.0):
        return cls([horizon], [rate])

    @property
    def horizon(self):
        return float(self.times[-1])

    def log_discount(self, T):
        T = np.asarray(T, dtype=float)
        if np.any(T < 0.0) or np.any(T > self.horizon + const.GRID_TOLERANCE):
            raise ModelDomainError("maturity outside curve horizon [0, %s]" % self.horizon)
        return np.interp(T, self._knots, self._log_discount)

    def discount(self, T):
        return np.exp(self.log_discount(T))

    def __repr__(self):
        if self.times.size == 1:
            return 'Curve(flat=%r, horizon=%r)' % (float(self.rates[0]), self.horizon)
        return 'Curve(pillars=%d, horizon=%r)' % (self.times.size, self.horizon)


class RateCurve(object):
    # rates[i] applies to periods starting in [times[i-1], times[i]); with spread_over they are
    # spreads on the risk-free simple forward of each period
    def __init__(self, rates=0.0, times=(), spread_over=None, liquidity_basis=None, label=None):
        self.rates = as_float_array(rates)
        self.times = as_float_array(times) if len(times) else np.zeros(0)
        if self.rates.size != self.times.size + 1:
            raise ModelDomainError("rate curve needs one more rate than breakpoints")
        self.spread_over = spread_over
        # (lambda, liquidity basis) labelling of the spread; never used in pricing
        self.liquidity_basis = liquidity_basis
        self.label = label

    @property
    def is_spread(self):
        return self.spread_over is not None

    def rate(self, t):
        return self.rates[np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")]

    def bond(self, t, T, risk_free=None):
        t, T = np.asarray(t, dtype=float), np.asarray(T, dtype=float)
        accrual = T - t
        if self.is_spread:
            if risk_free is None:
                risk_free = discount_factor(self.spread_over, t, T)
            denominator = 1.0 / np.asarray(risk_free, dtype=float) + accrual * self.rate(t)
        else:
            denominator = 1.0 + accrual * self.rate(t)
        if np.any(denominator <= 0.0):
            raise ModelDomainError("rate too negative for tenor: 1 + (T - t) * rate <= 0")
        return 1.0 / denominator

    def __repr__(self):
        out = ['rates=%s' % self.rates.tolist()]
        if self.times.size:
            out += ['times=%s' % self.times.tolist()]
        if self.is_spread:
            out += ['spread=True']
        if self.label:
            out += ['label=%s' % self.label]
        return 'RateCurve(%s)' % ', '.join(out)


class HazardCurve(object):
    # rates[i] applies on [times[i-1], times[i]); the last rate extends forever
    def __init__(self, rates, times=()):
        self.rates = as_float_array(rates)
        self.times = as_float_array(times) if len(times) else np.zeros(0)
        if self.rates.size != self.times.size + 1:
            raise ModelDomainError("hazard curve needs one more rate than breakpoints")
        if np.any(self.rates < 0.0):
            raise ModelDomainError("hazard rates must be non-negative")
        if np.any(np.diff(self.times) <= 0.0) or np.any(self.times <= 0.0):
            raise ModelDomainError("hazard breakpoints must be positive and increasing")
        self._knots = np.concatenate(([0.0], self.times))
        self._cumulative = np.concatenate(([0.0], np.cumsum(self.rates[:-1] * np.diff(self._knots))))

    def cumulative(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self._knots, t, side="right") - 1
        idx = np.clip(idx, 0, self.rates.size - 1)
        return self._cumulative[idx] + self.rates[idx] * (t - self._knots[idx])

    def survival(self, t):
        return np.exp(-self.cumulative(t))

    def inverse(self, level):
        level = np.asarray(level, dtype=float)
        idx = np.searchsorted(self._cumulative, level, side="right") - 1
        idx = np.clip(idx, 0, self.rates.size - 1)
        excess = level - self._cumulative[idx]
        rate = self.rates[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(rate > 0.0, excess / np.where(rate > 0.0, rate, 1.0),
                            np.where(excess > 0.0, np.inf, 0.0))
        return self._knots[idx] + step

    def __repr__(self):
        if self.times.size == 0:
            return 'HazardCurve(flat=%r)' % float(self.rates[0])
        return 'HazardCurve(rates=%s, times=%s)' % (self.rates.tolist(), self.times.tolist())


class DefaultModel(object):
    def __init__(self, hazard_i=0.0, hazard_c=0.0, rec_i=0.0, rec_c=0.0, rec_i_prime=None,
                 rec_c_prime=None, correlation=0.0):
        self.hazard_i = hazard_i if isinstance(hazard_i, HazardCurve) else HazardCurve(hazard_i)
        self.hazard_c = hazard_c if isinstance(hazard_c, HazardCurve) else HazardCurve(hazard_c)
        self.rec_i = float(rec_i)
        self.rec_c = float(rec_c)
        self.rec_i_prime = self.rec_i if rec_i_prime is None else float(rec_i_prime)
        self.rec_c_prime = self.rec_c if rec_c_prime is None else float(rec_c_prime)
        self.correlation = float(correlation)
        for party, rec, rec_prime in ((const.INVESTOR, self.rec_i, self.rec_i_prime),
                                      (const.COUNTERPARTY, self.rec_c, self.rec_c_prime)):
            if not 0.0 <= rec <= rec_prime <= 1.0:
                raise ModelDomainError("%s recoveries must satisfy 0 <= rec <= rec' <= 1, got %s, %s"
                                       % (party, rec, rec_prime))
        if not -1.0 <= self.correlation <= 1.0:
            raise ModelDomainError("default correlation must lie in [-1, 1]")

    def segregated(self):
        return DefaultModel(self.hazard_i, self.hazard_c, self.rec_i, self.rec_c, 1.0, 1.0, self.correlation)

    @property
    def lgd_i(self):
        return 1.0 - self.rec_i

    @property
    def lgd_c(self):
        return 1.0 - self.rec_c

    @property
    def lgd_i_prime(self):
        return 1.0 - self.rec_i_prime

    @property
    def lgd_c_prime(self):
        return 1.0 - self.rec_c_prime

    def __repr__(self):
        out = ['hazard_i=%r' % self.hazard_i, 'hazard_c=%r' % self.hazard_c,
               'rec_i=%r' % self.rec_i, 'rec_c=%r' % self.rec_c]
        if self.rec_i_prime != self.rec_i or self.rec_c_prime != self.rec_c:
            out += ['rec_i_prime=%r' % self.rec_i_prime, 'rec_c_prime=%r' % self.rec_c_prime]
        if self.correlation:
            out += ['correlation=%r' % self.correlation]
        return 'DefaultModel(%s)' % ', '.join(out)


class MarketModel(object):
    # x is an OU factor dx = -a x dt + sigma dW; the G1++ short-rate shift with stochastic_rates,
    # otherwise it only drives deal amounts
    def __init__(self, curve, default_model=None, mean_reversion=0.1, volatility=0.0,
                 stochastic_rates=False):
        if mean_reversion <= 0.0:
            raise ModelDomainError("mean reversion must be positive")
        if volatility < 0.0:
            raise ModelDomainError("volatility must be non-negative")
        self.curve = curve
        self.default_model = default_model if default_model is not None else DefaultModel()
        self.mean_reversion = float(mean_reversion)
        self.volatility = float(volatility)
        self.stochastic_rates = bool(stochastic_rates)

    @property
    def deterministic(self):
        return not self.stochastic_rates

    def loading(self, t, T):
        a = self.mean_reversion
        return (1.0 - np.exp(-a * (np.asarray(T) - np.asarray(t)))) / a

    def variance(self, t, T):
        a, s = self.mean_reversion, self.volatility
        tau = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
        return s * s / (a * a) * (tau + 2.0 / a * np.exp(-a * tau) - 0.5 / a * np.exp(-2.0 * a * tau)
                                  - 1.5 / a)

    def step_moments(self, dt):
        a, s = self.mean_reversion, self.volatility
        decay = np.exp(-a * dt)
        loading = (1.0 - decay) / a
        var_x = s * s * (1.0 - decay * decay) / (2.0 * a)
        var_i = s * s / (a * a) * (dt - 2.0 * loading + (1.0 - decay * decay) / (2.0 * a))
        cov = s * s / (2.0 * a * a) * (1.0 - decay) ** 2
        return decay, loading, var_x, var_i, cov

    @time_check()
    def zero_bond(self, t, T, state=0.0):
        state = np.asarray(state, dtype=float)
        ratio = self.curve.discount(T) / self.curve.discount(t)
        if self.deterministic:
            return np.broadcast_to(ratio, np.broadcast(ratio, state).shape)
        convexity = 0.5 * (self.variance(t, T) - self.variance(0.0, T) + self.variance(0.0, t))
        return ratio * np.exp(convexity - self.loading(t, T) * state)

    def __repr__(self):
        out = ['curve=%r' % self.curve, 'default_model=%r' % self.default_model]
        if self.volatility:
            out += ['mean_reversion=%r' % self.mean_reversion, 'volatility=%r' % self.volatility,
                    'stochastic_rates=%s' % self.stochastic_rates]
        return 'MarketModel(%s)' % ', '.join(out)


class ScenarioSet(object):
    # date-major arrays: state[g], df[g] hold x_{t_g} and D(0, t_g) per path
    def __init__(self, model, grid, state, df, tau_i, tau_c, seed=None, weights=None, start_time=0.0):
        self.model = model
        self.grid = grid
        self.state = state
        self.df = df
        self.tau_i = np.asarray(tau_i, dtype=float)
        self.tau_c = np.asarray(tau_c, dtype=float)
        self.seed = seed
        self.start_time = float(start_time)
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            weights = weights / weights.sum()
        self.weights = weights
        if np.any(np.abs(np.asarray(self.df[0]) - 1.0) > 1e-15):
            raise ModelDomainError("realised discount factors must start at 1")

    @property
    def n_paths(self):
        return self.tau_i.size

    @property
    def tau(self):
        return np.minimum(self.tau_i, self.tau_c)

    def absolute(self, t):
        return self.start_time + np.asarray(t, dtype=float)

    def bond(self, g, T):
        return self.model.zero_bond(self.absolute(self.grid.dates[g]), self.absolute(T), self.state[g])

    def step_discount(self, g):
        return self.df[g + 1] / self.df[g]

    def default_segment(self):
        return self.grid.segment_of(self.tau)

    def discount_to_default(self):
        # D(0, t_g) at the last date before tau carried on with the pathwise bond
        tau = self.tau
        seg = self.default_segment()
        out = np.zeros(self.n_paths)
        hit = (seg >= 0) & (seg < self.grid.n_steps)
        for g in np.unique(seg[hit]):
            rows = np.flatnonzero(seg == g)
            bond = self.model.zero_bond(self.absolute(self.grid.dates[g]), self.absolute(tau[rows]),
                                        np.asarray(self.state[g])[rows])
            out[rows] = np.asarray(self.df[g])[rows] * bond
        return out

    def mean(self, values):
        values = np.asarray(values, dtype=float)
        if self.weights is None:
            return float(np.mean(values))
        return float(np.dot(self.weights, values))

    def stderr(self, values):
        values = np.asarray(values, dtype=float)
        n = values.size
        if n < 2:
            return 0.0
        if self.weights is None:
            return float(np.std(values, ddof=1) / np.sqrt(n))
        w = self.weights
        centred = values - np.dot(w, values)
        effective = 1.0 - np.dot(w, w)
        if effective <= 0.0:
            return 0.0
        return float(np.sqrt(np.dot(w * w, centred * centred) / effective))

    def __repr__(self):
        out = ['paths=%d' % self.n_paths, 'grid=%r' % self.grid, 'seed=%r' % self.seed]
        if self.weights is not None:
            out += ['weighted=True']
        return 'ScenarioSet(%s)' % ', '.join(out)


@time_check()
def discount_factor(curve, t, T):
    return curve.discount(T) / curve.discount(t)


def _select(rates, sign):
    if isinstance(rates, tuple):
        return rates[1] if sign == "+" else rates[0]
    return rates


@time_check(strict=True)
def collateral_bond(c_rate, t, T, sign="+", risk_free=None):
    rate = _select(c_rate, sign)
    if isinstance(rate, RateCurve):
        return rate.bond(t, T, risk_free)
    denominator = 1.0 + (np.asarray(T, dtype=float) - np.asarray(t, dtype=float)) * rate
    if np.any(denominator <= 0.0):
        raise ModelDomainError("rate %s too negative for tenor" % rate)
    return 1.0 / denominator


@time_check(strict=True)
def funding_bond(f_rate, t, T, sign="+", risk_free=None):
    return collateral_bond(f_rate, t, T, sign, risk_free)


@time_check(strict=True)
def forward_funding_rate(bond, t, T):
    return (1.0 / np.asarray(bond, dtype=float) - 1.0) / (np.asarray(T, dtype=float) - np.asarray(t, dtype=float))


def risky_adjusted_funding_bond(bond, lgd_i, survival):
    # P^{f+} / (Lgd_I Q(tau_I > T) + Rec_I)
    lgd_i = np.asarray(lgd_i, dtype=float)
    survival = np.asarray(survival, dtype=float)
    if np.any(np.asarray(bond) <= 0.0):
        raise ModelDomainError("funding bond must be positive")
    if np.any((lgd_i < 0.0) | (lgd_i > 1.0)) or np.any((survival < 0.0) | (survival > 1.0)):
        raise ModelDomainError("loss fraction and survival probability must lie in [0, 1]")
    denominator = lgd_i * survival + (1.0 - lgd_i)
    if np.any(denominator <= 0.0):
        raise ModelDomainError("risky adjustment denominator must be positive")
    return bond / denominator


def default_time(uniform, hazard):
    # tau = Lambda^{-1}(-ln U)
    return hazard.inverse(-np.log(np.asarray(uniform, dtype=float)))


def _draw_width(model, grid):
    width = 2 + (2 * grid.n_steps if model.volatility > 0.0 else 0)
    return -(-width // const.PHILOX_WORDS) * const.PHILOX_WORDS


def _uniforms(seed, first_path, n_paths, width):
    # path p owns the counter block [p * width / 4, (p + 1) * width / 4)
    bit_generator = np.random.Philox(key=seed, counter=first_path * width // const.PHILOX_WORDS)
    return np.random.Generator(bit_generator).random((n_paths, width)) + 2.0 ** -54


def _simulate_chunk(model, grid, seed, first_path, n_paths, initial_state, start_time):
    logger.debug("simulate: paths %d..%d", first_path, first_path + n_paths - 1)
    width = _draw_width(model, grid)
    draws = _uniforms(seed, first_path, n_paths, width)

    dm = model.default_model
    u_i = draws[:, 0]
    if dm.correlation == 0.0:
        u_c = draws[:, 1]
    else:
        z1, z2 = ndtri(draws[:, 0]), ndtri(draws[:, 1])
        u_c = ndtr(dm.correlation * z1 + np.sqrt(1.0 - dm.correlation ** 2) * z2)
    # conditional on survival to the start time
    tau_i = dm.hazard_i.inverse(dm.hazard_i.cumulative(start_time) - np.log(u_i)) - start_time
    tau_c = dm.hazard_c.inverse(dm.hazard_c.cumulative(start_time) - np.log(u_c)) - start_time

    if model.volatility == 0.0:
        return None, None, tau_i, tau_c

    normals = ndtri(draws[:, 2:2 + 2 * grid.n_steps])
    state = np.empty((grid.n_steps + 1, n_paths))
    integral = np.empty((grid.n_steps + 1, n_paths))
    state[0] = initial_state
    integral[0] = 0.0
    for g, dt in enumerate(np.diff(grid.dates)):
        decay, loading, var_x, var_i, cov = model.step_moments(dt)
        sd_x = np.sqrt(var_x)
        z_x, z_i = normals[:, 2 * g], normals[:, 2 * g + 1]
        residual = np.sqrt(max(var_i - cov * cov / var_x, 0.0))
        state[g + 1] = state[g] * decay + sd_x * z_x
        integral[g + 1] = integral[g] + state[g] * loading + cov / sd_x * z_x + residual * z_i
    return state, integral, tau_i, tau_c


def _deterministic_state(model, grid, initial_state):
    a = model.mean_reversion
    state = initial_state * np.exp(-a * grid.dates)
    integral = initial_state * (1.0 - np.exp(-a * grid.dates)) / a
    return state, integral


def simulate(model, grid, n_paths, seed=const.DEFAULT_SEED, workers=const.DEFAULT_WORKERS,
             initial_state=0.0, start_time=0.0):
    # each path draws from its own Philox counter block, independent of workers and n_paths
    if n_paths < 1:
        raise ModelDomainError("n_paths must be at least 1, got %s" % n_paths)
    chunks = [(p, min(const.PATH_CHUNK, n_paths - p)) for p in range(0, n_paths, const.PATH_CHUNK)]
    logger.debug("simulate: %d paths in %d chunks on %d workers", n_paths, len(chunks), workers)

    def run(chunk):
        return _simulate_chunk(model, grid, seed, chunk[0], chunk[1], initial_state, start_time)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(run, chunks))
    else:
        parts = [run(chunk) for chunk in chunks]

    tau_i = np.concatenate([part[2] for part in parts])
    tau_c = np.concatenate([part[3] for part in parts])
    ties = (tau_i == tau_c) & (tau_c <= grid.maturity)
    if ties.any():
        logger.warning("simulate: %d simultaneous defaults, counterparty default moved by %g",
                       ties.sum(), const.TIE_EPSILON)
        tau_c = np.where(ties, tau_c + const.TIE_EPSILON, tau_c)

    shape = (grid.n_steps + 1, n_paths)
    if model.volatility == 0.0:
        state, integral = _deterministic_state(model, grid, initial_state)
        state = np.broadcast_to(state[:, None], shape)
        integral = np.broadcast_to(integral[:, None], shape)
    else:
        state = np.concatenate([part[0] for part in parts], axis=1)
        integral = np.concatenate([part[1] for part in parts], axis=1)

    times = start_time + grid.dates
    log_df = model.curve.log_discount(times) - model.curve.log_discount(start_time)
    if model.stochastic_rates and model.volatility > 0.0:
        log_df = log_df - 0.5 * (model.variance(0.0, times) - model.variance(0.0, start_time))
        df = np.exp(log_df[:, None] - integral)
    elif model.stochastic_rates:
        df = np.broadcast_to(np.exp(log_df - integral[:, 0])[:, None], shape)
    else:
        df = np.broadcast_to(np.exp(log_df)[:, None], shape)
    return ScenarioSet(model, grid, state, df, tau_i, tau_c, seed, start_time=start_time)
