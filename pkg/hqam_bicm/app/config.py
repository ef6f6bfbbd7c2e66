# hqam_bicm/app/config.py
class Config:
    """Configuration constants for the toolkit."""
    # Search and bound defaults
    DEFAULT_WMAX_AWGN = 125
    DEFAULT_WMAX_FADING = 30
    # 125 only for q = 2; the dense per-state weight grid grows as (wmax+1)^q
    DEFAULT_WMAX_MULTILEVEL = 30
    DEFAULT_GRID_STEP = 0.01
    BOUND_VALIDITY_LIMIT = 1e-3
    SPECTRUM_MAX_STEPS = 10_000
    ALPHA_CHUNK = 4096

    # Simulation defaults
    DEFAULT_BLOCK_LENGTH = 24000
    DEFAULT_MIN_ERRORS = 100
    DEFAULT_MAX_BLOCKS = 1000
    SIM_BATCH_BLOCKS = 8
    DEFAULT_SEED = 2024

    # Optimizer SNR bracket for target searches, in dB
    SNR_BRACKET_DB = (0.0, 40.0)
    SNR_TOLERANCE_DB = 0.01

    # Numerical tolerances
    MU_TOLERANCE = 1e-12
    ENERGY_TOLERANCE = 1e-12

    # Environment
    JOBS_ENV_VAR = "HQAM_BICM_JOBS"

    # File constants
    DEFAULT_ENCODING = "utf-8"
    LOG_FILE = "hqam_bicm.log"
    SCHEMA_VERSION = 1
    MANIFEST_NAME = "manifest.json"

    # Exit codes
    EXIT_OK = 0
    EXIT_FAILURE = 1
    EXIT_CONFIG_ERROR = 2
    EXIT_VALIDITY = 3
