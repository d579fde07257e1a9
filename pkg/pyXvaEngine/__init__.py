from __future__ import absolute_import
import logging
from logging import NullHandler
from .__info__ import (__version__, __author__, __author_email__, __description__)
from .rtypes import (TimeGrid, Flow, Deal, CollateralRule, CsaSpec, CollateralPath, FundingPath, BackwardState,
                     PricingResult, LimitCaseSpec, GridError, CashflowError)
from .models import (Curve, RateCurve, HazardCurve, DefaultModel, MarketModel, ScenarioSet, ModelDomainError,
                     simulate)
from .policies import LiquidityPolicy, PolicyError
from .pricer import (price_bccva, price_bccfva, fva, backward_step, regress_conditional, PricingError,
                     ConvergenceError, ScenarioMismatchError)
from .oracles import limit_price, discrete_recursion_oracle, on_default_flow_enumerated, OracleDomainError
from .pack import ConfigUnpacker, RunConfig, ReportPacker, ConfigParseError, ConfigValidationError
from .const import *

logging.getLogger(__package__).addHandler(NullHandler())

__author__ = "{} <{}>".format(__author__, __author_email__)
__version__ = __version__
__doc__ = __description__


__all__ = ("TimeGrid", "Flow", "Deal", "CollateralRule", "CsaSpec", "CollateralPath", "FundingPath",
           "BackwardState", "PricingResult", "LimitCaseSpec", "Curve", "RateCurve", "HazardCurve", "DefaultModel",
           "MarketModel", "ScenarioSet", "simulate", "LiquidityPolicy", "price_bccva", "price_bccfva", "fva",
           "backward_step", "regress_conditional", "limit_price", "discrete_recursion_oracle",
           "on_default_flow_enumerated", "ConfigUnpacker", "RunConfig", "ReportPacker", "GridError",
           "CashflowError", "ModelDomainError", "PolicyError", "PricingError", "ConvergenceError",
           "ScenarioMismatchError", "OracleDomainError", "ConfigParseError", "ConfigValidationError",
           "INVESTOR", "COUNTERPARTY", "CLOSE_OUT_RISK_FREE", "CLOSE_OUT_COLLATERAL", "CLOSE_OUT_FUNDING",
           "POLICY_TREASURY", "POLICY_MARKET", "LIMIT_COLLATERAL", "LIMIT_FUNDING_WITH_COLLATERAL",
           "LIMIT_FUNDING_WITHOUT_COLLATERAL", "LIMIT_RISK_FREE", "MODE_BCCVA", "MODE_BCCFVA", "MODE_FVA",
           "MODE_ORACLE", "COMPONENTS", "EXITSTAT")
