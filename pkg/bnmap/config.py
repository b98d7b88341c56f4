"""Configuration module for bnmap."""

import os
from pathlib import Path
from typing import Any, Dict, List, Tuple

# Application Settings
APP_NAME = "bnmap"
APP_VERSION = "1.0.0"

# Paths
BASE_DIR = Path(__file__).parent
SCHEMAS_DIR = BASE_DIR / "schemas"
DEFAULT_SUITE_FILE = SCHEMAS_DIR / "default_suite.yaml"

# Numeric Settings
BACKEND_ALIASES = {
    "f64": "f64",
    "float": "f64",
    "float64": "f64",
    "rational": "rational",
    "exact": "rational",
}
FLOAT_NORMALIZATION_TOLERANCE = 1e-9

# Decomposition Settings
DEFAULT_HEURISTIC = "min-fill"
SUPPORTED_HEURISTICS = ["min-fill", "min-degree"]

# Oracle Guards (hard limits, never truncated)
ORACLE_MAX_FREE_STATES = 2 ** 24
ORACLE_MAX_MAP_STATES = 2 ** 20
ORACLE_DEADLINE_CHECK_EVERY = 4096

# Approximation Settings
DEFAULT_EPSILON = 0.01
DEFAULT_APPROX_MODE = "additive"
APPROX_MODE_ALIASES = {
    "mult": "multiplicative",
    "multiplicative": "multiplicative",
    "add": "additive",
    "additive": "additive",
}

# Gadget Settings
GADGET_GUARD_BITS = 96
GADGET_INTEGER_MARGIN_BITS = 40

# Benchmark Settings
DEFAULT_TIMEOUT_SECONDS = 60.0
SEARCH_SPACE_BUCKETS: List[Tuple[str, float, float]] = [
    ("0-10", 0.0, 10.0),
    ("10-20", 10.0, 20.0),
    ("20-40", 20.0, 40.0),
    (">40", 40.0, float("inf")),
]
SUPPORTED_FAMILIES = ["poly", "rand", "rand-twK", "alarm-like", "insurance-like"]
FAMILY_SHAPES: Dict[str, Dict[str, Any]] = {
    # edge density and in-degree cap of the reference topologies
    "alarm-like": {"nodes": 37, "edges": 46, "max_parents": 4},
    "insurance-like": {"nodes": 27, "edges": 52, "max_parents": 3},
}
RANDOM_DAG_MAX_PARENTS = 3
POLYTREE_MAX_PARENTS = 3
MAX_CARDINALITY = 5
MAX_MAP_PARENTS_PER_EXTREME = 2
PARTIAL_KTREE_KEEP_PROBABILITY = 0.7

# Report Schema
CSV_COLUMNS = [
    "suite",
    "instance",
    "ss_log2",
    "solver",
    "status",
    "ms",
    "value",
    "avg_pareto",
    "avg_dim",
]
EXTRA_RECORD_COLUMNS = ["width", "visible_map"]
RUN_STATUSES = ["ok", "timeout", "skipped", "error"]

EXPORT_SHEETS = [
    "1_Records",
    "2_Summary",
    "3_Approx_Quality",
    "4_Run_Log",
]

# CLI Exit Codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_TIMEOUT = 3
EXIT_ZERO_EVIDENCE = 4

# Concurrency
THREADS_ENV_VAR = "BNMAP_THREADS"
DEFAULT_THREADS = 1

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def get_env_var(key: str, default: Any = None) -> Any:
    """Get environment variable with default fallback."""
    return os.getenv(key, default)


def get_thread_count(override: Any = None) -> int:
    """Resolve the worker count: explicit flag, then BNMAP_THREADS, then the default."""
    raw = override if override is not None else get_env_var(THREADS_ENV_VAR, DEFAULT_THREADS)
    try:
        threads = int(raw)
    except (TypeError, ValueError):
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def normalize_backend(name: str) -> str:
    """Map a backend spelling to its canonical name ('f64' or 'rational')."""
    key = name.strip().lower()
    if key not in BACKEND_ALIASES:
        raise ValueError(f"unknown backend {name!r} (expected one of {sorted(BACKEND_ALIASES)})")
    return BACKEND_ALIASES[key]


def normalize_mode(name: str) -> str:
    """Map a lattice mode spelling to 'multiplicative' or 'additive'."""
    key = name.strip().lower()
    if key not in APPROX_MODE_ALIASES:
        raise ValueError(f"unknown approximation mode {name!r} (expected mult or add)")
    return APPROX_MODE_ALIASES[key]
