"""Constants for jlmquant."""

from typing import Final

DOMAIN: Final = "jlmquant"
NAME: Final = "JLM quantization toolkit"

# Variable names
VAR_T: Final = "t"
VAR_Q: Final = "q"
VAR_QD: Final = "qd"
VAR_QDD: Final = "qdd"
VAR_X: Final = "x"
VAR_XI: Final = "xi"
VAR_PSI: Final = "psi"
IMAGINARY_UNIT: Final = "i"
LOG_FUNCTION: Final = "log"

RESERVED_NAMES: Final = (VAR_T, VAR_Q, VAR_QD, VAR_X, VAR_PSI, VAR_XI)

# Canonical generator order used by normalization
CANONICAL_ORDER: Final = (
    VAR_T,
    VAR_X,
    VAR_Q,
    VAR_QD,
    VAR_QDD,
    VAR_XI,
    VAR_PSI,
)

# Zero test cross-check
DEFAULT_ZERO_CHECK_POINTS: Final = 2
RANDOM_SEED: Final = 20140312
SAMPLE_NUMERATOR_RANGE: Final = 9
SAMPLE_DENOMINATOR_RANGE: Final = 5
MAX_SAMPLE_ATTEMPTS: Final = 25

# Ansatz bounds
DEFAULT_SYMMETRY_DEGREE: Final = 2
MAX_SYMMETRY_DEGREE: Final = 6
DEFAULT_GAUGE_BOUND: Final = 3
MAX_GAUGE_BOUND: Final = 5
DEFAULT_ANSATZ_DEGREE: Final = 2
MAX_ANSATZ_DEGREE: Final = 5
MAX_SPLIT_DEPTH: Final = 3

# Noether
MAX_NOETHER_SYMMETRIES: Final = 5

# Quantizer modes
MODE_SCHRODINGER: Final = "schrodinger"
MODE_GENERAL: Final = "general"

# Exit codes
EXIT_OK: Final = 0
EXIT_VERIFICATION_FAILED: Final = 1
EXIT_CONFIG_ERROR: Final = 2
EXIT_ANSATZ_INSUFFICIENT: Final = 3

# Problem file keys
CONF_NAME: Final = "name"
CONF_ODE: Final = "ode"
CONF_RHS: Final = "rhs"
CONF_SYMMETRIES: Final = "symmetries"
CONF_LABEL: Final = "label"
CONF_V: Final = "v"
CONF_G: Final = "g"
CONF_SYMMETRY_DEGREE: Final = "symmetry_degree"
CONF_MULTIPLIERS: Final = "multipliers"
CONF_M: Final = "m"
CONF_GAUGE_BOUND: Final = "lagrangian_bound"
CONF_ALLOW_LOG: Final = "allow_log"
CONF_QUANTIZE: Final = "quantize"
CONF_LAGRANGIAN: Final = "lagrangian"
CONF_MODE: Final = "mode"
CONF_ANSATZ_DEGREE: Final = "ansatz_degree"
CONF_GENERATORS: Final = "generators"
CONF_COMBINATION: Final = "combination"
CONF_CANONICAL: Final = "canonical"
CONF_S1: Final = "s1"
CONF_S2: Final = "s2"
CONF_TNEW: Final = "tnew"
CONF_XNEW: Final = "xnew"
CONF_TARGET: Final = "target"
CONF_XI: Final = "xi"
CONF_ZERO_CHECK_POINTS: Final = "zero_check_points"
CONF_EXPECTED: Final = "expected"
CONF_NOETHER_COUNTS: Final = "noether_counts"
CONF_LAGRANGIANS: Final = "lagrangians"
CONF_EXPONENTS: Final = "exponents"
CONF_PDE: Final = "pde"
CONF_INTEGRALS: Final = "integrals"

# Stage names
STAGE_SYMMETRIES: Final = "symmetries"
STAGE_MULTIPLIERS: Final = "multipliers"
STAGE_LAGRANGIANS: Final = "lagrangians"
STAGE_NOETHER: Final = "noether"
STAGE_QUANTIZE: Final = "quantize"
STAGES: Final = (
    STAGE_SYMMETRIES,
    STAGE_MULTIPLIERS,
    STAGE_LAGRANGIANS,
    STAGE_NOETHER,
    STAGE_QUANTIZE,
)

CACHE_SUFFIX: Final = ".cache.json"
REPORT_VERSION: Final = 1
