"""
Django settings for the dslab project.

Only the pieces a command-line lab needs are configured: the app registry,
logging and the experiment defaults. Everything that changes between runs
is read from the environment.

For more information on this file, see
https://docs.djangoproject.com/en/5.1/topics/settings/
"""
import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

# Required by Django, never used for anything security relevant here.
SECRET_KEY = os.environ.get("SECRET_KEY", "dslab-local-only")

DEBUG = bool(os.environ.get("DEBUG"))

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "rest_framework",
    "lab",
]

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.environ.get("DSLAB_LOG_LEVEL", "INFO"),
    },
}

# No persistence: artifacts are files.
DATABASES = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Lab defaults

DSLAB_SEED = int(os.environ["DSLAB_SEED"]) if os.environ.get("DSLAB_SEED") else None

DSLAB_WORKERS = int(os.environ.get("DSLAB_WORKERS", "1"))

DSLAB_OUTPUT_DIR = os.environ.get("DSLAB_OUTPUT_DIR", "out")

DSLAB_CHUNK_SIZE = int(os.environ.get("DSLAB_CHUNK_SIZE", "250"))

DSLAB_N_GRID = [100, 1000, 10000, 100000]

DSLAB_TAIL_REPS = 10000

DSLAB_KS_REPS = 2000

DSLAB_EPS_GRID = [0.01, 0.1, 0.5]

DSLAB_SLLN = {
    "n_start": 100,
    "n_max": 100000,
    "paths": 500,
}

DSLAB_LOG_SCALING_PATHS = 200
