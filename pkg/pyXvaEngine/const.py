# GENERAL
SCHEMA_VERSION = 1
DEFAULT_PATHS = 2 ** 16
DEFAULT_SEED = 20111010
DEFAULT_STEPS = 250
DEFAULT_BASIS_DEGREE = 2
DEFAULT_WORKERS = 1

# MONTE CARLO
PATH_CHUNK = 4096
PHILOX_WORDS = 4            # 64-bit words produced per Philox counter step
MIN_SAMPLES_PER_BASIS = 10
TIE_EPSILON = 1e-9          # year fraction added to tauC on simultaneous defaults
GRID_TOLERANCE = 1e-12

# FIXED POINT
MAX_SWEEPS = 10
SWEEP_TOLERANCE = 1e-8      # relative to deal notional

# NESTED CLOSE-OUT
NESTED_PATHS = 1000

# PARTIES
INVESTOR = "investor"
COUNTERPARTY = "counterparty"
PARTIES = (INVESTOR, COUNTERPARTY)

# CLOSE-OUT CONVENTIONS
CLOSE_OUT_RISK_FREE = "risk-free"
CLOSE_OUT_COLLATERAL = "collateral-price"
CLOSE_OUT_FUNDING = "funding-inclusive"
CLOSE_OUT_CONVENTIONS = (CLOSE_OUT_RISK_FREE, CLOSE_OUT_COLLATERAL, CLOSE_OUT_FUNDING)

# LIQUIDITY POLICIES
POLICY_TREASURY = "treasury"
POLICY_MARKET = "direct-market"
POLICY_KINDS = (POLICY_TREASURY, POLICY_MARKET)

# LIMIT CASES
LIMIT_COLLATERAL = "collateral-discounting"
LIMIT_FUNDING_WITH_COLLATERAL = "funding-with-collateral"
LIMIT_FUNDING_WITHOUT_COLLATERAL = "funding-without-collateral"
LIMIT_RISK_FREE = "risk-free"
LIMIT_KINDS = (LIMIT_COLLATERAL, LIMIT_FUNDING_WITH_COLLATERAL, LIMIT_FUNDING_WITHOUT_COLLATERAL, LIMIT_RISK_FREE)

# DEAL TEMPLATES
DEAL_ZERO = "zero"
DEAL_ANNUITY = "annuity"
DEAL_FORWARD = "forward"
DEAL_TEMPLATES = (DEAL_ZERO, DEAL_ANNUITY, DEAL_FORWARD)

# RUN MODES
MODE_BCCVA = "bccva"
MODE_BCCFVA = "bccfva"
MODE_FVA = "fva"
MODE_ORACLE = "oracle"
RUN_MODES = (MODE_BCCVA, MODE_BCCFVA, MODE_FVA, MODE_ORACLE)

# REPORT FORMATS
FORMAT_JSON = "json"
FORMAT_CSV = "csv"
REPORT_FORMATS = (FORMAT_JSON, FORMAT_CSV)

# COMPONENTS
COMPONENT_PAYOUT = "payout"
COMPONENT_MARGINING = "margining"
COMPONENT_FUNDING = "funding"
COMPONENT_ON_DEFAULT = "onDefault"
COMPONENTS = (COMPONENT_PAYOUT, COMPONENT_MARGINING, COMPONENT_FUNDING, COMPONENT_ON_DEFAULT)

# EXIT CODES
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE_ERROR = 2
EXIT_VALIDATION_ERROR = 3
EXIT_CONVERGENCE_ERROR = 4
EXITSTAT = {
    0: 'EXIT_OK',
    1: 'EXIT_FAILURE',
    2: 'EXIT_PARSE_ERROR',
    3: 'EXIT_VALIDATION_ERROR',
    4: 'EXIT_CONVERGENCE_ERROR',
}
