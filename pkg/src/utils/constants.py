from dotenv import load_dotenv
from pathlib import Path
import os

load_dotenv()

# Numerics
DEFAULT_PREC = int(os.getenv("MINKLAB_PREC", "192"))
DEFAULT_ORDER = 64
DEFAULT_GEN = 20
DEFAULT_FORMAT = "text"
GUARD_BITS = 32
SERIES_CUTOFF_BITS = 8
DOUBLE_BITS = 53

# Size Guards
MAX_GENERATION = 26
MAX_EMPIRICAL_GENERATION = 24
MAX_ORBIT_SIZE = 10**6
MAX_DENSE_STATES = 2000
MAX_RECURSION_DEPTH = 48
MAX_DYADIC_BITS = 1 << 16

# Quadrature
GL_NODES = 8
MAX_PANEL_DOUBLINGS = 8
MIDPOINT_DEPTH = 18
CUT_PROXIMITY = 1e-3
POLE_PROXIMITY = 1e-8

# Eigenvalues
SEED_ORDER = 32
CONTRACTION_BOUND = 0.342014
MAX_INVERSE_ITERATIONS = 200
STABILITY_STEP = 16

# Moments
MOMENT_CHECK_STEP = 8
RELIABLE_RELATIVE_ERROR = 1e-4
ENVELOPE_CONSTANT = 10
POLE_GUARD = 1e-6

# Data Storage
DATA_PATH = Path("./data")
GOLDEN_VALUES_PATH = DATA_PATH / "golden_values.json"
CHECKPOINT_PATH = Path(os.getenv("MINKLAB_CHECKPOINT_DIR", "./data/checkpoints"))

# Logging
LOG_LEVEL = os.getenv("MINKLAB_LOG_LEVEL", "INFO")
LOG_FILE_PATH = Path("./logs/minklab.log")
LOG_MAX_SIZE = 10485760
LOG_BACKUP_COUNT = 5
