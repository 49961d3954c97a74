"""
Secrecy Rate Engine v1.0 — All tolerances, budgets and defaults.

Every tunable parameter lives here. No magic numbers in engine code.
"""

# ============================================================
# TOLERANCE POLICY
# ============================================================

PROB_TOL = 1e-12          # distribution / kernel slice sums
MI_CLAMP_TOL = 1e-12      # tiny negative MI → 0, optimizer output snapped to 0
VERTEX_TOL = 1e-9         # feasibility slack when testing candidate vertices
DET_TOL = 1e-12           # |det| below this = parallel planes, skip

# Unbounded R2 directions are capped at (largest MI constant + margin)
R2_CAP_MARGIN = 1.0

# ============================================================
# GAUSSIAN WT-HI
# ============================================================

REGIMES = ["VeryStrong", "Strong", "Weak"]

# Golden-section refinement of sweep maxima
PEAK_REFINE_TOL = 1e-10

SWEEP_VARIABLES = {
    "a": "a",
    "p1": "p1_max",
    "p2": "p2_max",
    "p1_max": "p1_max",
    "p2_max": "p2_max",
}

SWEEP_COLUMNS = ["value", "rate_bits", "baseline_bits", "regime", "p1", "p2"]

# ============================================================
# DISCRETE MEMORYLESS WT-HI
# ============================================================

DEFAULT_GRID_RESOLUTION = 16

# Inequality checks in classify_interference
CLASSIFY_TOL = 1e-12
DEFAULT_CLASSIFY_SAMPLES = 200
DEFAULT_CLASSIFY_SEED = 0

DMC_RESULT_FIELDS = ["rate_bits", "px1", "px2", "r1s", "r1d", "r2", "class"]

# ============================================================
# BINNING SIMULATOR
# ============================================================

# |Y|^n × (messages × bin size × helper words) elementary products
SIM_ENUM_BUDGET = 10**8
SIM_BUDGET_WARN_FRACTION = 0.5

# Max float64 elements held at once by the vectorized enumerators
SIM_CHUNK_ELEMENTS = 2**20

SIM_DEFAULT_TRIALS = 2000
# Trials are split in fixed blocks, one RNG substream per block,
# so results do not depend on the worker count
SIM_TRIAL_BLOCK = 256
SIM_CONFIDENCE = 0.95

DECODE_MODES = ["joint_ml", "treat_as_noise"]
DEFAULT_DECODE_MODE = "joint_ml"

SIM_REPORT_FIELDS = [
    "n", "realized_r1s", "realized_r1d", "realized_r2",
    "pe", "pe_halfwidth", "equivocation_rate", "leakage",
    "secrecy_gap", "seed",
]

# ============================================================
# CLI
# ============================================================

THREADS_ENV_VAR = "WTHI_THREADS"

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2

OUTPUT_FORMATS = ["json", "text"]

VERSION = "1.0"
