import csv
import io
import json
import logging

import numpy as np

from . import const
from .cashflows import CashflowError, CollateralRule, CsaSpec, Deal, Flow
from .models import (Curve, DefaultModel, GridError, HazardCurve, MarketModel, ModelDomainError, RateCurve,
                     TimeGrid, simulate)
from .oracles import OracleDomainError
from .policies import LiquidityPolicy, PolicyError
from .rtypes import LimitCaseSpec
from .utils import canonical_json, config_hash

logger = logging.getLogger(__package__)


class ConfigParseError(ValueError):
    pass


class ConfigValidationError(ValueError):
    pass


SECTIONS = ("model", "deal", "csa", "policy", "mc", "mode", "oracle", "output")


def _section(document, name):
    section = document.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigValidationError("section %s must be an object" % name)
    return section


def _number(section, key, default=None, minimum=None, maximum=None, integer=False):
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError("%s must be a number, got %r" % (key, value))
    if integer:
        if int(value) != value:
            raise ConfigValidationError("%s must be an integer, got %r" % (key, value))
        value = int(value)
    else:
        value = float(value)
    if minimum is not None and value < minimum:
        raise ConfigValidationError("%s must be >= %s, got %s" % (key, minimum, value))
    if maximum is not None and value > maximum:
        raise ConfigValidationError("%s must be <= %s, got %s" % (key, maximum, value))
    return value


def _choice(section, key, default, choices):
    value = section.get(key, default)
    if value not in choices:
        raise ConfigValidationError("%s must be one of %s, got %r" % (key, ", ".join(choices), value))
    return value


def _curve(value, key):
    # number, or {"times": [...], "rates": [...]}
    if isinstance(value, dict):
        times = [float(t) for t in value.get("times", [])]
        rates = [float(r) for r in value.get("rates", [])]
        return {"times": times, "rates": rates}
    return _number({key: value}, key, 0.0)


def _dates(value, key):
    if value is None or value == "grid":
        return value
    if not isinstance(value, list):
        raise ConfigValidationError("%s must be \"grid\", a list of times or null" % key)
    return sorted(float(t) for t in value)


class ConfigUnpacker(object):
    def __init__(self, data):
        if isinstance(data, dict):
            self.document = data
            return
        try:
            self.document = json.loads(data)
        except (TypeError, ValueError) as e:
            raise ConfigParseError("configuration is not valid JSON: %s" % e)
        if not isinstance(self.document, dict):
            raise ConfigParseError("configuration must be a JSON object")

    def unpack_config(self, overrides=None):
        document = dict(self.document)
        unknown = set(document) - set(SECTIONS)
        if unknown:
            raise ConfigValidationError("unknown sections: %s" % ", ".join(sorted(unknown)))
        for key, value in (overrides or {}).items():
            section, _, field = key.partition(".")
            if value is None:
                continue
            if field:
                document[section] = dict(_section(document, section), **{field: value})
            else:
                document[section] = value
        normalised = {
            "model": self.unpack_model(_section(document, "model")),
            "deal": self.unpack_deal(_section(document, "deal")),
            "csa": self.unpack_csa(_section(document, "csa")),
            "policy": self.unpack_policy(_section(document, "policy")),
            "mc": self.unpack_mc(_section(document, "mc")),
            "mode": _choice(document, "mode", const.MODE_BCCVA, const.RUN_MODES),
            "oracle": self.unpack_oracle(_section(document, "oracle")),
            "output": self.unpack_output(_section(document, "output")),
        }
        return RunConfig(normalised)

    def unpack_model(self, section):
        short_rate = _section(section, "shortRate")
        hazards = _section(section, "hazards")
        recoveries = _section(section, "recoveries")
        rec_i = _number(recoveries, "investor", 0.0, 0.0, 1.0)
        rec_c = _number(recoveries, "counterparty", 0.0, 0.0, 1.0)
        return {
            "riskFree": _curve(section.get("riskFree", 0.0), "riskFree"),
            "shortRate": {
                "meanReversion": _number(short_rate, "meanReversion", 0.1, 0.0),
                "volatility": _number(short_rate, "volatility", 0.0, 0.0),
                "stochasticRates": bool(short_rate.get("stochasticRates", False)),
            },
            "hazards": {
                "investor": _curve(hazards.get("investor", 0.0), "investor"),
                "counterparty": _curve(hazards.get("counterparty", 0.0), "counterparty"),
            },
            "recoveries": {
                "investor": rec_i,
                "counterparty": rec_c,
                "investorRehyp": _number(recoveries, "investorRehyp", rec_i, 0.0, 1.0),
                "counterpartyRehyp": _number(recoveries, "counterpartyRehyp", rec_c, 0.0, 1.0),
            },
            "correlation": _number(section, "correlation", 0.0, -1.0, 1.0),
        }

    def unpack_deal(self, section):
        if "flows" in section:
            flows = []
            for flow in section["flows"]:
                flows.append({"time": _number(flow, "time", None, 0.0),
                              "amount": _number(flow, "amount", 0.0),
                              "slope": _number(flow, "slope", 0.0),
                              "curvature": _number(flow, "curvature", 0.0)})
            if not flows or any(f["time"] is None for f in flows):
                raise ConfigValidationError("deal flows need a payment time each")
            maturity = _number(section, "maturity", max(f["time"] for f in flows), 0.0)
            return {"flows": flows, "maturity": maturity, "notional": _number(section, "notional", 1.0, 0.0)}
        return {
            "template": _choice(section, "template", const.DEAL_ZERO, const.DEAL_TEMPLATES),
            "maturity": _number(section, "maturity", 1.0, 0.0),
            "notional": _number(section, "notional", 1.0, 0.0),
            "coupon": _number(section, "coupon", 0.0),
            "frequency": _number(section, "frequency", 1, 1, integer=True),
            "strike": _number(section, "strike", 0.0),
        }

    def unpack_csa(self, section):
        return {
            "marginDates": _dates(section.get("marginDates"), "marginDates"),
            "cPlus": _number(section, "cPlus", 0.0),
            "cMinus": _number(section, "cMinus", 0.0),
            "spreadOverRiskFree": bool(section.get("spreadOverRiskFree", False)),
            "alpha": _number(section, "alpha", 1.0, 0.0, 1.0),
            "threshold": _number(section, "threshold", 0.0, 0.0),
            "mta": _number(section, "mta", 0.0, 0.0),
            "rehypothecation": bool(section.get("rehypothecation", False)),
            "closeOut": _choice(section, "closeOut", const.CLOSE_OUT_RISK_FREE, const.CLOSE_OUT_CONVENTIONS),
        }

    def unpack_policy(self, section):
        return {
            "kind": _choice(section, "kind", const.POLICY_TREASURY, const.POLICY_KINDS),
            "fPlus": _number(section, "fPlus", 0.0),
            "fMinus": _number(section, "fMinus", 0.0),
            "spreadOverRiskFree": bool(section.get("spreadOverRiskFree", False)),
            "fundingDates": _dates(section.get("fundingDates", "grid"), "fundingDates"),
            "funderRecovery": _number(section, "funderRecovery", None, 0.0, 1.0),
            "liquidityBasis": section.get("liquidityBasis"),
        }

    def unpack_mc(self, section):
        return {
            "paths": _number(section, "paths", const.DEFAULT_PATHS, 1, integer=True),
            "seed": _number(section, "seed", const.DEFAULT_SEED, 0, integer=True),
            "steps": _number(section, "steps", const.DEFAULT_STEPS, 1, integer=True),
            "basisDegree": _number(section, "basisDegree", const.DEFAULT_BASIS_DEGREE, 0, integer=True),
            "workers": _number(section, "workers", const.DEFAULT_WORKERS, 1, integer=True),
        }

    def unpack_oracle(self, section):
        return {
            "kind": _choice(section, "kind", const.LIMIT_RISK_FREE, const.LIMIT_KINDS),
            "discrete": bool(section.get("discrete", False)),
        }

    def unpack_output(self, section):
        return {
            "path": section.get("path"),
            "format": _choice(section, "format", const.FORMAT_JSON, const.REPORT_FORMATS),
        }


def _build_curve(value, horizon):
    if isinstance(value, dict):
        return Curve(value["times"], value["rates"])
    return Curve.flat(value, horizon)


def _build_hazard(value):
    if isinstance(value, dict):
        return HazardCurve(value["rates"], value["times"])
    return HazardCurve(value)


class RunConfig(object):
    def __init__(self, document):
        self.document = document
        try:
            self._build()
        except (ModelDomainError, GridError, CashflowError, PolicyError, OracleDomainError) as e:
            raise ConfigValidationError(str(e))

    def _build(self):
        doc = self.document
        model, deal, csa, policy, mc = doc["model"], doc["deal"], doc["csa"], doc["policy"], doc["mc"]
        self.mode = doc["mode"]
        self.paths, self.seed, self.workers = mc["paths"], mc["seed"], mc["workers"]
        self.basis_degree = mc["basisDegree"]
        self.output_path, self.output_format = doc["output"]["path"], doc["output"]["format"]

        self.deal = self._build_deal(deal)
        maturity = self.deal.maturity
        curve = _build_curve(model["riskFree"], max(100.0, 2.0 * maturity))
        recoveries = model["recoveries"]
        default_model = DefaultModel(_build_hazard(model["hazards"]["investor"]),
                                     _build_hazard(model["hazards"]["counterparty"]),
                                     recoveries["investor"], recoveries["counterparty"],
                                     recoveries["investorRehyp"], recoveries["counterpartyRehyp"],
                                     model["correlation"])
        short_rate = model["shortRate"]
        self.model = MarketModel(curve, default_model, short_rate["meanReversion"],
                                 short_rate["volatility"], short_rate["stochasticRates"])

        payments = self.deal.payment_times
        explicit_margins = self._marker_dates(csa["marginDates"])
        explicit_fundings = self._marker_dates(policy["fundingDates"])
        base = TimeGrid.build(maturity, mc["steps"], explicit_margins, explicit_fundings, payments)
        margins = base.dates if csa["marginDates"] == "grid" else explicit_margins
        fundings = base.dates if policy["fundingDates"] == "grid" else explicit_fundings
        self.grid = TimeGrid(base.dates, margins, fundings, payments)

        spread = curve if csa["spreadOverRiskFree"] else None
        self.csa = CsaSpec(self.grid.dates[self.grid.is_margin],
                           RateCurve(csa["cPlus"], spread_over=spread, label="c+"),
                           RateCurve(csa["cMinus"], spread_over=spread, label="c-"),
                           CollateralRule(csa["alpha"] if len(margins) else 0.0, csa["threshold"], csa["mta"]),
                           csa["rehypothecation"], csa["closeOut"])
        funding_spread = curve if policy["spreadOverRiskFree"] else None
        self.policy = LiquidityPolicy(policy["kind"],
                                      RateCurve(policy["fPlus"], spread_over=funding_spread, label="f+"),
                                      RateCurve(policy["fMinus"], spread_over=funding_spread, label="f-"),
                                      self.grid.dates[self.grid.is_funding], policy["funderRecovery"],
                                      liquidity_basis=policy["liquidityBasis"])
        oracle = doc["oracle"]
        flat = [model["riskFree"], model["hazards"]["counterparty"], model["hazards"]["investor"]]
        self.limit_case = None
        if not any(isinstance(value, dict) for value in flat):
            r, lambda_c, lambda_i = flat
            self.limit_case = LimitCaseSpec(oracle["kind"], r, csa["cPlus"], policy["fPlus"], lambda_c, maturity,
                                            lambda_i, recoveries["counterparty"], recoveries["investor"])

    @staticmethod
    def _build_deal(section):
        notional = section["notional"]
        if "flows" in section:
            flows = [Flow(f["time"], f["amount"], f["slope"], f["curvature"]) for f in section["flows"]]
            return Deal(flows, section["maturity"], notional)
        maturity, template = section["maturity"], section["template"]
        if template == const.DEAL_ZERO:
            flows = [Flow(maturity, notional)]
        elif template == const.DEAL_FORWARD:
            # notional * (x_T - strike)
            flows = [Flow(maturity, -notional * section["strike"], notional)]
        else:
            count = int(round(maturity * section["frequency"]))
            if count < 1:
                raise ConfigValidationError("annuity needs at least one coupon before maturity")
            coupon = notional * section["coupon"] / section["frequency"]
            flows = [Flow(maturity * (i + 1) / count, coupon) for i in range(count)]
        return Deal(flows, maturity, notional)

    @staticmethod
    def _marker_dates(value):
        if value is None or value == "grid":
            return []
        return list(value)

    @property
    def pricing_document(self):
        # workers change the schedule, never the numbers
        document = dict(self.document, mc=dict(self.document["mc"]))
        document["mc"].pop("workers", None)
        return document

    @property
    def config_hash(self):
        return config_hash(self.pricing_document)

    def simulate(self):
        return simulate(self.model, self.grid, self.paths, self.seed, self.workers)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and canonical_json(self.document) == canonical_json(other.document)

    def __repr__(self):
        return 'RunConfig(mode=%s, paths=%d, seed=%d, hash=%s)' % (self.mode, self.paths, self.seed,
                                                                  self.config_hash[:12])


def _plain(value):
    if isinstance(value, dict):
        return dict((k, _plain(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


class ReportPacker(object):
    def __init__(self, config):
        self.config = config

    def _header(self, wall_clock):
        return {
            "schemaVersion": const.SCHEMA_VERSION,
            "configHash": self.config.config_hash,
            "config": self.config.pricing_document,
            "mode": self.config.mode,
            "seed": self.config.seed,
            "nPaths": self.config.paths,
            "run": {"wallClock": wall_clock, "workers": self.config.workers},
        }

    def pack_result(self, result, wall_clock=None):
        report = self._header(wall_clock)
        report.update(result.to_dict())
        return _plain(report)

    def pack_oracle(self, value, wall_clock=None):
        report = self._header(wall_clock)
        report.update({"value": value, "components": None, "cva": None, "dva": None, "fva": None,
                       "stderr": {"value": 0.0}, "iterations": 0, "diagnostics": {"oracle": self.config.document
                                                                                  ["oracle"]["kind"]}})
        return _plain(report)

    @staticmethod
    def pack_error(error, code):
        return {"schemaVersion": const.SCHEMA_VERSION, "error": type(error).__name__, "message": str(error),
                "exitCode": code, "status": const.EXITSTAT.get(code, "failure")}

    @staticmethod
    def get_json(report):
        return json.dumps(report, sort_keys=True, indent=2) + "\n"

    @staticmethod
    def get_csv(report):
        rows = []

        def flatten(prefix, value):
            if isinstance(value, dict):
                for key in sorted(value):
                    flatten("%s.%s" % (prefix, key) if prefix else key, value[key])
            elif isinstance(value, list):
                rows.append((prefix, json.dumps(value)))
            else:
                rows.append((prefix, "" if value is None else repr(value) if isinstance(value, float) else value))

        flatten("", dict((k, v) for k, v in report.items() if k != "config"))
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("field", "value"))
        writer.writerows(rows)
        return buffer.getvalue()
