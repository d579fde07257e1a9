import numpy as np

from . import const


class GridError(ValueError):
    pass


class CashflowError(ValueError):
    pass


class TimeGrid(object):
    # Master grid: dates[0] = 0 < dates[1] < ... < dates[-1] = T, each date
    # flagged as margining date t_k, funding date t_j and/or payout date.
    def __init__(self, dates, margin_dates=(), funding_dates=(), payment_dates=()):
        self.dates = np.asarray(dates, dtype=float)
        if self.dates.ndim != 1 or self.dates.size < 2:
            raise GridError("grid needs at least two dates")
        if self.dates[0] != 0.0:
            raise GridError("grid must start at 0, got %s" % self.dates[0])
        if np.any(np.diff(self.dates) <= 0.0):
            raise GridError("grid dates must be strictly increasing")
        self.is_margin = self._flags(margin_dates, "margining")
        self.is_funding = self._flags(funding_dates, "funding")
        self.is_payout = self._flags(payment_dates, "payout")

    @classmethod
    def build(cls, maturity, steps, margin_dates=(), funding_dates=(), payment_dates=()):
        if maturity <= 0.0 or steps < 1:
            raise GridError("maturity must be positive and steps >= 1")
        dates = list(np.linspace(0.0, maturity, steps + 1))
        for extra in (margin_dates, funding_dates, payment_dates):
            for t in extra:
                if t < 0.0 or t > maturity + const.GRID_TOLERANCE:
                    raise GridError("date %s outside [0, %s]" % (t, maturity))
                if not np.any(np.abs(np.asarray(dates) - t) <= const.GRID_TOLERANCE):
                    dates.append(float(t))
        return cls(sorted(dates), margin_dates, funding_dates, payment_dates)

    def _flags(self, times, label):
        flags = np.zeros(self.dates.size, dtype=bool)
        for t in times:
            flags[self.index_of(t, label)] = True
        return flags

    def index_of(self, t, label="grid"):
        idx = int(np.argmin(np.abs(self.dates - t)))
        if abs(self.dates[idx] - t) > const.GRID_TOLERANCE:
            raise GridError("%s date %s is not a grid member" % (label, t))
        return idx

    def segment_of(self, tau):
        # -1 when tau <= 0, n_steps when tau > T
        return np.searchsorted(self.dates, np.asarray(tau, dtype=float), side="left") - 1

    @property
    def n_steps(self):
        return self.dates.size - 1

    @property
    def maturity(self):
        return float(self.dates[-1])

    @property
    def margin_indices(self):
        return np.flatnonzero(self.is_margin)

    @property
    def funding_indices(self):
        return np.flatnonzero(self.is_funding)

    def next_marked(self, flags, g):
        later = np.flatnonzero(flags[g + 1:])
        return int(g + 1 + later[0]) if later.size else None

    def last_marked(self, flags, g):
        # last flagged index <= g
        earlier = np.flatnonzero(flags[:g + 1])
        return int(earlier[-1]) if earlier.size else None

    def __eq__(self, other):
        return (isinstance(other, TimeGrid) and np.array_equal(self.dates, other.dates)
                and np.array_equal(self.is_margin, other.is_margin)
                and np.array_equal(self.is_funding, other.is_funding)
                and np.array_equal(self.is_payout, other.is_payout))

    def __repr__(self):
        out = ['steps=%d' % self.n_steps, 'maturity=%s' % repr(self.maturity)]
        if self.is_margin.any():
            out += ['margining=%d' % self.is_margin.sum()]
        if self.is_funding.any():
            out += ['funding=%d' % self.is_funding.sum()]
        return 'TimeGrid(%s)' % ', '.join(out)


class Flow(object):
    # amount + slope * x + curvature * x**2 on the state x at the payment time,
    # or a pure callable state -> amount
    def __init__(self, time, amount=0.0, slope=0.0, curvature=0.0, function=None):
        self.time = float(time)
        self.amount = float(amount)
        self.slope = float(slope)
        self.curvature = float(curvature)
        self.function = function

    def value(self, state):
        state = np.asarray(state, dtype=float)
        if self.function is not None:
            return np.broadcast_to(np.asarray(self.function(state), dtype=float), state.shape)
        return self.amount + self.slope * state + self.curvature * state * state

    def scaled(self, factor):
        if self.function is not None:
            function = self.function
            return Flow(self.time, function=lambda x: factor * function(x))
        return Flow(self.time, factor * self.amount, factor * self.slope, factor * self.curvature)

    def __repr__(self):
        out = ['time=%s' % repr(self.time)]
        if self.function is not None:
            out += ['function=%s' % getattr(self.function, "__name__", repr(self.function))]
        else:
            out += ['amount=%s' % repr(self.amount)]
            if self.slope:
                out += ['slope=%s' % repr(self.slope)]
            if self.curvature:
                out += ['curvature=%s' % repr(self.curvature)]
        return 'Flow(%s)' % ', '.join(out)


class Deal(object):
    # sign convention: positive amounts are received by the investor
    def __init__(self, flows, maturity=None, notional=1.0):
        self.flows = list(flows)
        times = [f.time for f in self.flows]
        self.maturity = float(maturity) if maturity is not None else (max(times) if times else 0.0)
        self.notional = float(notional)
        if self.notional <= 0.0:
            raise CashflowError("deal notional must be positive")
        for t in times:
            if t <= 0.0 or t > self.maturity + const.GRID_TOLERANCE:
                raise CashflowError("payment time %s outside (0, %s]" % (t, self.maturity))

    @property
    def payment_times(self):
        return sorted(set(f.time for f in self.flows))

    def amount_at(self, time, state):
        state = np.asarray(state, dtype=float)
        total = np.zeros(state.shape)
        for flow in self.flows:
            if abs(flow.time - time) <= const.GRID_TOLERANCE:
                total = total + flow.value(state)
        return total

    def scaled(self, factor):
        return Deal([f.scaled(factor) for f in self.flows], self.maturity, self.notional * abs(factor) or 1.0)

    def __add__(self, other):
        return Deal(self.flows + other.flows, max(self.maturity, other.maturity),
                    max(self.notional, other.notional))

    def __rmul__(self, factor):
        return self.scaled(factor)

    def __repr__(self):
        return 'Deal(flows=%d, maturity=%s, notional=%s)' % (len(self.flows), repr(self.maturity),
                                                           repr(self.notional))


class CollateralRule(object):
    # C = sign-preserving alpha * reference, reduced by threshold H, moved only
    # when the transfer exceeds the minimum transfer amount M
    def __init__(self, alpha=1.0, threshold=0.0, mta=0.0):
        if not 0.0 <= alpha <= 1.0:
            raise CashflowError("alpha must lie in [0, 1], got %s" % alpha)
        if threshold < 0.0 or mta < 0.0:
            raise CashflowError("threshold and minimum transfer amount must be non-negative")
        self.alpha = float(alpha)
        self.threshold = float(threshold)
        self.mta = float(mta)

    @property
    def is_linear(self):
        return self.threshold == 0.0 and self.mta == 0.0

    def target(self, reference):
        scaled = self.alpha * np.asarray(reference, dtype=float)
        return np.maximum(scaled - self.threshold, 0.0) + np.minimum(scaled + self.threshold, 0.0)

    def apply(self, reference, previous):
        target = self.target(reference)
        if self.mta == 0.0:
            return target
        return np.where(np.abs(target - previous) >= self.mta, target, previous)

    def __repr__(self):
        return 'CollateralRule(alpha=%s, threshold=%s, mta=%s)' % (repr(self.alpha), repr(self.threshold),
                                                                   repr(self.mta))


class CsaSpec(object):
    def __init__(self, margin_dates, c_plus, c_minus, rule=None, rehypothecation=False,
                 close_out=const.CLOSE_OUT_RISK_FREE):
        self.margin_dates = [float(t) for t in margin_dates]
        self.c_plus = c_plus
        self.c_minus = c_minus
        self.rule = rule if rule is not None else CollateralRule(alpha=0.0)
        self.rehypothecation = bool(rehypothecation)
        if close_out not in const.CLOSE_OUT_CONVENTIONS:
            raise CashflowError("unknown close-out convention %s" % close_out)
        if close_out == const.CLOSE_OUT_COLLATERAL and self.rule.alpha != 1.0:
            raise CashflowError("collateral-price close-out requires alpha = 1")
        self.close_out = close_out

    @property
    def collateralised(self):
        return bool(self.margin_dates) and self.rule.alpha > 0.0

    def __repr__(self):
        out = ['margin_dates=%d' % len(self.margin_dates), 'rule=%s' % repr(self.rule),
               'rehypothecation=%s' % self.rehypothecation, 'close_out=%s' % self.close_out]
        return 'CsaSpec(%s)' % ', '.join(out)


class CollateralPath(object):
    # values[g, i]: account C held on path i over grid date g (posted at the
    # last margining date <= t_g, zero before the first one); the account is
    # returned at the last margining date
    def __init__(self, values, margin_flags):
        self.values = np.array(values, dtype=float)
        self.margin_flags = np.asarray(margin_flags, dtype=bool)
        margins = np.flatnonzero(self.margin_flags)
        self.values[margins[-1] if margins.size else 0:] = 0.0

    def __repr__(self):
        return 'CollateralPath(dates=%d, paths=%d)' % self.values.shape


class FundingPath(object):
    # values[g, i]: cash amount F at funding date g
    def __init__(self, values, funding_flags):
        self.values = np.asarray(values, dtype=float)
        self.funding_flags = np.asarray(funding_flags, dtype=bool)

    def __repr__(self):
        return 'FundingPath(dates=%d, paths=%d)' % self.values.shape


class BackwardState(object):
    # values: V on the date after the one being solved, zero at maturity on
    # every path; history[g] keeps the pre-default values of each solved date
    def __init__(self, n_paths, n_dates, continuation=False, collateral=False):
        self.g = n_dates - 1
        self.values = np.zeros(n_paths)
        self.history = np.zeros((n_dates, n_paths))
        self.continuation = np.zeros((n_dates, n_paths)) if continuation else None
        self.collateral = np.zeros((n_dates, n_paths)) if collateral else None
        self.funding = {}
        self.close_out = np.zeros(n_paths)
        self.pre_default = np.zeros(n_paths)
        self.coefficients = {}
        self.condition_numbers = {}

    def __repr__(self):
        return 'BackwardState(g=%d, paths=%d)' % (self.g, self.values.size)


class PricingResult(object):
    def __init__(self, value, components, cva, dva, stderr, iterations=1, diagnostics=None,
                 seed=None, n_paths=None, fva=None, pathwise=None):
        self.value = float(value)
        self.components = dict(components)
        self.cva = float(cva)
        self.dva = float(dva)
        self.fva = None if fva is None else float(fva)
        self.stderr = dict(stderr)
        self.iterations = int(iterations)
        self.diagnostics = dict(diagnostics or {})
        self.seed = seed
        self.n_paths = n_paths
        self.pathwise = pathwise

    def to_dict(self):
        return {
            "value": self.value,
            "components": {k: self.components[k] for k in const.COMPONENTS},
            "cva": self.cva,
            "dva": self.dva,
            "fva": self.fva,
            "stderr": dict(self.stderr),
            "iterations": self.iterations,
            "diagnostics": dict(self.diagnostics),
            "seed": self.seed,
            "nPaths": self.n_paths,
        }

    def __repr__(self):
        out = ['value=%r' % self.value, 'cva=%r' % self.cva, 'dva=%r' % self.dva]
        if self.fva is not None:
            out += ['fva=%r' % self.fva]
        out += ['stderr=%r' % self.stderr.get("value")]
        return 'PricingResult(%s)' % ', '.join(out)


class LimitCaseSpec(object):
    # Deterministic inputs for the closed-form limiting cases. Rates are flat:
    # r continuously compounded, c and f_plus simple per accrual period.
    def __init__(self, kind, r=0.0, c=0.0, f_plus=0.0, hazard_c=0.0, horizon=1.0,
                 hazard_i=0.0, rec_c=0.0, rec_i=0.0):
        if kind not in const.LIMIT_KINDS:
            raise ValueError("unknown limit case %s" % kind)
        self.kind = kind
        self.r = float(r)
        self.c = float(c)
        self.f_plus = float(f_plus)
        self.hazard_c = float(hazard_c)
        self.hazard_i = float(hazard_i)
        self.rec_c = float(rec_c)
        self.rec_i = float(rec_i)
        self.horizon = float(horizon)

    def __repr__(self):
        out = ['kind=%s' % self.kind, 'r=%r' % self.r, 'c=%r' % self.c, 'f_plus=%r' % self.f_plus,
               'hazard_c=%r' % self.hazard_c, 'horizon=%r' % self.horizon]
        return 'LimitCaseSpec(%s)' % ', '.join(out)
