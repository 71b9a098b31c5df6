"""Central configuration for solver defaults, limits and calibration constants."""

from __future__ import annotations

import os
from pathlib import Path

# Iterative eigensolvers and quadrature.
EIGEN_TOL = 1e-6
RAYLEIGH_TOL = 1e-8
QUAD_RTOL = 1e-10
ROOT_XTOL = 1e-13
LOBPCG_MAXITER = 400
LOBPCG_RESTARTS = 3

# Problems at or below this many unknowns are solved densely.
DENSE_EIGEN_LIMIT = 4000

# Size guards.
MAX_SPECTRUM_INDEX = 4_000_000
MAX_TWO_BODY_UNKNOWNS = 10_000_000

# Canonical recursion: mpmath working precision, ensemble switch and the
# brute-force threshold for nearly frozen spectra.
CANONICAL_DPS = 60
CANONICAL_MAX_N = 64
SUBSET_ENUMERATION_MAX_STATES = 20
# Tail of the Boltzmann weights left above a spectrum cutoff, relative to the
# one-body partition function, before results are refused.
TRUNCATION_RTOL = 1e-12

# Constants of the Hardy inequalities on balls and cubes.
HARDY_BALL_C0 = 2.0
HARDY_BALL_C1 = 4.5
HARDY_C0 = 16.0
HARDY_C1 = 144.0

# Universal constants that are only known to exist. They are calibration
# knobs with the defaults below.
DEFAULT_KAPPA = 1.0
DEFAULT_C_ENTROPY = 1.0
DEFAULT_C_ETA = 1.0
DEFAULT_C_DELTA = 0.1
DEFAULT_ELL_PREFACTOR = 1.0

DEFAULT_SEED = 20240521
DEFAULT_SPIN_STATES = 2

CACHE_DIR_ENV_VAR = "POINTGAS_CACHE_DIR"
DEFAULT_CACHE_DIR = Path(".pointgas_cache")
CACHE_FORMAT_VERSION = 1
CSV_FORMAT_VERSION = 1


def get_cache_dir(override: str | os.PathLike[str] | None = None) -> Path:
    """Resolve the spectrum cache directory: explicit value, then env var, then default."""

    if override:
        return Path(override)
    from_env = os.environ.get(CACHE_DIR_ENV_VAR)
    if from_env:
        return Path(from_env)
    return DEFAULT_CACHE_DIR


__all__ = [
    "CACHE_DIR_ENV_VAR",
    "CACHE_FORMAT_VERSION",
    "CANONICAL_DPS",
    "CANONICAL_MAX_N",
    "CSV_FORMAT_VERSION",
    "DEFAULT_CACHE_DIR",
    "DEFAULT_C_DELTA",
    "DEFAULT_C_ENTROPY",
    "DEFAULT_C_ETA",
    "DEFAULT_ELL_PREFACTOR",
    "DEFAULT_KAPPA",
    "DEFAULT_SEED",
    "DEFAULT_SPIN_STATES",
    "DENSE_EIGEN_LIMIT",
    "EIGEN_TOL",
    "HARDY_BALL_C0",
    "HARDY_BALL_C1",
    "HARDY_C0",
    "HARDY_C1",
    "LOBPCG_MAXITER",
    "LOBPCG_RESTARTS",
    "MAX_SPECTRUM_INDEX",
    "MAX_TWO_BODY_UNKNOWNS",
    "QUAD_RTOL",
    "RAYLEIGH_TOL",
    "ROOT_XTOL",
    "SUBSET_ENUMERATION_MAX_STATES",
    "TRUNCATION_RTOL",
    "get_cache_dir",
]
