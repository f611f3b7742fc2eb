# Runtime configuration for the diamond relay toolkit
import math
import os

RESULTS_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "results")

# Logging Configuration
LOG_LEVEL = os.getenv("DIAMOND_LOG_LEVEL", "INFO")  # Options: DEBUG, INFO, WARNING, ERROR, CRITICAL
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FILE = os.getenv("DIAMOND_LOG_FILE", os.path.join(RESULTS_DIR, "Runtime_Logs.log"))  # "" disables file logging
LOG_TO_CONSOLE = True  # Set to False to disable console logging

# Numeric tolerances
SIGN_TOL = 1e-9             # relative tolerance for the Delta / Gamma / Gamma' zero band
GUARD_DENOMINATOR = 1e-12   # ratios with smaller denominators are treated as a dead branch
FEASIBILITY_TOL = 1e-9      # absolute, on normalized LP rows
AGREEMENT_TOL = 1e-7        # closed form vs LP, certificate and gap comparisons
SCHEDULE_SLACK = 1e-12      # allowed excursion of a time fraction outside [0, 1]
PIVOT_TOL = 1e-10            # smallest usable pivot element
REDUCED_COST_TOL = 1e-10     # entering threshold for Bland's rule

# LP solver limits
SIMPLEX_ITERATION_FACTOR = 10   # iteration cap = factor * (rows + cols), per phase
SIMPLEX_MAX_VARIABLES = 32
SIMPLEX_MAX_ROWS = 64
VERTEX_MAX_VARIABLES = 12
VERTEX_MAX_ROWS = 24
VERTEX_MAX_BASES = 2_000_000    # candidate bases tried by vertex enumeration
GRID_CHUNK = 200_000            # simplex lattice points evaluated per vectorized batch
MIN_GRID_RESOLUTION = 10
MIN_ORACLE_RESOLUTION = 50
ORACLE_ETA_POINTS = 64          # power-split grid of the achievable-rate oracle, plus eta1 and eta2

# Analytical ceilings
HALF_BIT = 0.5
DELTA_CEILING = 0.5 * math.log2(4.0 / 3.0)       # max of C123 - C13 - C23
THEOREM_GAP = HALF_BIT + DELTA_CEILING            # ~0.7075 bits
MAC_EXCESS_CEILING = 0.5                          # C123 - CMAC
FIRST_HOP_EXCESS_CEILING = 0.5                    # C012 - max(C01, C02)
SECOND_HOP_EXCESS_CEILING = 1.0                   # C123 - max(C13, C23)
ZETA_CEILING = 0.5
AVG_POWER_SLACK = 2.0 / math.log(2.0)             # ~2.885 bits
PER_TERM_SLACK = 1.0 / (2.0 * math.log(2.0))      # ~0.7213 bits
AVG_POWER_GAP = 3.6

# Sweep defaults
SWEEP_GAIN_MIN = 1e-2
SWEEP_GAIN_MAX = 1e4
SWEEP_DEFAULT_COUNT = 1000
SWEEP_DEFAULT_SEED = 1
SWEEP_DEFAULT_WORKERS = 1
VERIFY_DEFAULT_COUNT = 2000
VERIFY_LP_CROSSCHECK_EVERY = 10    # vertex enumeration on every n-th channel
VERIFY_DELTA0_COUNT = 1000

# Average power grid
AVG_SCHEDULE_RESOLUTION = 16
AVG_POWER_RESOLUTION = 16
MIN_AVG_RESOLUTION = 8

# GDOF
GDOF_P_GRID = tuple(10.0 ** k for k in range(2, 13))
GDOF_TOLERANCE = 0.05
GDOF_MIN_P = 1e2

# Output
SIGNIFICANT_DIGITS = 17
CSV_COLUMNS = [
    "g01", "g02", "g13", "g23",
    "C01", "C02", "C13", "C23",
    "Delta", "Gamma", "GammaPrime", "delta",
    "region", "scheme",
    "achievable", "lp_opt", "upper", "gap", "gap_guarantee",
]

# Constructed witnesses
DELTA_WITNESS_GAINS = (0.5, 0.5, 0.5, 0.5)   # g13 * g23 = 1/4 maximizes the coherent excess
DELTA_WITNESS_FLOOR = 0.207
LARGE_GAP_FAMILY = (40.0, 2.0, 1.5)          # (x, alpha, beta); the MDF gap passes 1 bit near x = 21
DELTA0_CAPACITY_RANGE = (0.1, 5.0)           # capacities drawn for the constructed Delta = 0 channels
