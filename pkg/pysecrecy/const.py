"""Secrecy simulator constants."""

DEFAULT_TRIALS: int = 5000

DEFAULT_NOISE_POWER: float = 1.0
DEFAULT_GRID_POINTS: int = 10

DEFAULT_PHI_START: float = 0.01
DEFAULT_PHI_STOP: float = 0.99
DEFAULT_PHI_STEP: float = 0.01

CONDITION_LIMIT: float = 1e12
RANK_TOLERANCE: float = 1e-10

FLOAT_DIGITS: int = 9

DEFAULT_AGREEMENT_TOLERANCE: float = 0.10

TRIAL_CHUNK_SIZE: int = 64

EXIT_OK: int = 0
EXIT_CONFIG_ERROR: int = 1
EXIT_NUMERICAL_ERROR: int = 2
EXIT_AGREEMENT_FAILED: int = 3
EXIT_OUTPUT_ERROR: int = 4
