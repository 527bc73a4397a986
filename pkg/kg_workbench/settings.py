"""
Django settings for kg_workbench project.
"""

from pathlib import Path
import os

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get(
    "KG_WORKBENCH_SECRET_KEY",
    "django-insecure-kg-workbench-local-only",
)

DEBUG = os.environ.get("KG_WORKBENCH_DEBUG", "0") == "1"

ALLOWED_HOSTS = []

# ============================
# APPLICATIONS
# ============================

WORKBENCH_APPS = (
    "geometry",           # lattice spacetimes, regions, causal structure
    "field_eq",           # P, Green operators, Cauchy data, timeslice
    "ccr_algebra",        # polynomial CCR algebra, kinematic subspaces
    "dynamics",           # relative Cauchy evolution, stress-energy, dynamical locality
    "states",             # quasifree states, energy density, QEI
    "deformation",        # Cauchy chains, state transport, rigidity
    "report",             # run manifests, CSV tables, summaries
    "orchestration",      # Prefect flows wrapping the experiment suites
    "cli",                # manage.py run <subcommand>
)

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    "rest_framework",
    *WORKBENCH_APPS,
]

# No persistence: results are files in the output directory.
DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ============================
# WORKBENCH NUMERICS
# ============================

WORKBENCH = {
    "CFL_FACTOR": 0.8,
    "N_PAD": 4,
    "D_MAX": 6,
    "PRUNE_TOL": 1e-14,
    "SUBSPACE_TOL": 1e-10,
    "FIXED_SUBSPACE_TOL": 1e-8,
    "REGULATOR_MASS": 1e-4,
    "DEFAULT_SEED": int(os.environ.get("KG_WORKBENCH_SEED", 42)),
    "PERTURBATION_AMPLITUDE": 0.05,
    "DEFAULT_GRID": (128, 256),   # (n_x, n_t)
    "DEFAULT_DX": 0.1,
    "DT_OVER_DX": 0.5,
    "MAX_N_POINT": 8,
    "SOLVE_BATCH": 64,
}

# Results directory for `manage.py run`
OUTPUT_DIR = Path(os.environ.get("KG_WORKBENCH_OUTPUT_DIR", BASE_DIR / "results"))

# ============================
# PREFECT CONFIG
# ============================

# Prefect configuration is mostly handled via environment variables;
# flows only need the API url when served by deploy_flows.py.
PREFECT_API_URL = os.environ.get("PREFECT_API_URL", "http://127.0.0.1:4200/api")

# ============================
# LOGGING CONFIG
# ============================

LOG_DIR = os.path.join(BASE_DIR, "logs")
if not os.path.exists(LOG_DIR):
    os.makedirs(LOG_DIR)

_LOG_LEVEL = os.environ.get("KG_WORKBENCH_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "[{levelname}] {asctime} {name} {message}",
            "style": "{",
            "datefmt": "%Y-%m-%d %H:%M:%S",
        },
        "simple": {
            "format": "{levelname} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
            "level": "WARNING",
        },
        "file": {
            "class": "logging.handlers.RotatingFileHandler",
            "filename": os.path.join(LOG_DIR, "workbench.log"),
            "maxBytes": 1024 * 1024 * 10,  # 10 MB
            "backupCount": 5,
            "formatter": "verbose",
            "level": _LOG_LEVEL,
        },
        "experiments_file": {
            "class": "logging.handlers.RotatingFileHandler",
            "filename": os.path.join(LOG_DIR, "experiments.log"),
            "maxBytes": 1024 * 1024 * 10,
            "backupCount": 5,
            "formatter": "verbose",
            "level": "INFO",
        },
        "prefect_file": {
            "class": "logging.handlers.RotatingFileHandler",
            "filename": os.path.join(LOG_DIR, "prefect.log"),
            "maxBytes": 1024 * 1024 * 10,
            "backupCount": 5,
            "formatter": "verbose",
            "level": "INFO",
        },
    },
    "loggers": {
        "django": {
            "handlers": ["console", "file"],
            "level": "INFO",
            "propagate": False,
        },
        "geometry": {
            "handlers": ["file"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
        "field_eq": {
            "handlers": ["file"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
        "ccr_algebra": {
            "handlers": ["file"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
        "dynamics": {
            "handlers": ["file"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
        "states": {
            "handlers": ["file"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
        "deformation": {
            "handlers": ["file"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
        "report": {
            "handlers": ["console", "experiments_file"],
            "level": "INFO",
            "propagate": False,
        },
        "cli": {
            "handlers": ["console", "experiments_file"],
            "level": "INFO",
            "propagate": False,
        },
        "orchestration": {
            "handlers": ["console", "prefect_file"],
            "level": "INFO",
            "propagate": False,
        },
    },
    "root": {
        "handlers": ["console", "file"],
        "level": "INFO",
    },
}
