"""
Centralized tolerance, cap and memory configuration.

Numerical routines read their defaults from here; the CLI can override the
tolerances per run.
"""

from __future__ import annotations

import os

import psutil

# Hard cap on reproducing-kernel series terms.
KERNEL_TERM_CAP: int = 100_000

# Power iteration on M^T M.
POWER_ITERATION_CAP: int = 100_000
DEFAULT_POWER_TOL: float = 1e-12

# Adaptive Gauss-Legendre quadrature (absolute tolerance, max panels per integral).
QUADRATURE_ABS_TOL: float = 1e-12
QUADRATURE_PANEL_BUDGET: int = 4_000
QUADRATURE_ORDER: int = 20

# Largest substitution exponent used to flatten (1-t)^(s-1) singularities.
QUADRATURE_MAX_KAPPA: int = 8

# Geometric Carleson grid t_j = 1 - 2^-j, j = 0..DEFAULT_CARLESON_DEPTH.
DEFAULT_CARLESON_DEPTH: int = 40

# Dense matrices beyond this dimension are streamed in row blocks.
DENSE_MAX_DIM: int = 4096

# Fraction of *available* RAM a single dense truncation may occupy.
# 0.25 keeps a 4096 x 4096 float64 matrix (128 MiB) dense on any desk machine.
DENSE_MEMORY_FRACTION: float = 0.25

# Rows per block when streaming a matrix-vector product (bounded by STREAM_BLOCK_BYTES).
STREAM_BLOCK_BYTES: int = 32 * 1024**2

# Certified remainder for the lemma weight sums.
LEMMA_TAIL_TOL: float = 1e-10

# Relative stopping rule for positive decreasing series.
SERIES_REL_TOL: float = 1e-12

# Absolute tail for the generating-series estimate.
EST_TAIL_TOL: float = 1e-14

# Coefficient tail used to pick truncations for w-families: w^(2N) <= FAMILY_TAIL_TOL.
FAMILY_TAIL_TOL: float = 1e-12
FAMILY_MAX_TRUNC: int = 40_000

# Round-trip safe for IEEE doubles.
CSV_FLOAT_FORMAT: str = "%.17g"

JOBS_ENV_VAR: str = "FHL_DEFAULT_JOBS"


def dense_budget_bytes() -> int:
    """Return the byte cap for one dense truncated matrix."""
    return int(psutil.virtual_memory().available * DENSE_MEMORY_FRACTION)


def fits_dense(dim: int) -> bool:
    """Whether a dim x dim float64 matrix may be materialized."""
    if dim > DENSE_MAX_DIM:
        return False
    return dim * dim * 8 <= dense_budget_bytes()


def stream_block_rows(ncols: int) -> int:
    """Rows per streamed block for a matrix with ``ncols`` columns."""
    return max(1, STREAM_BLOCK_BYTES // (8 * max(1, ncols)))


def default_jobs() -> int:
    """Worker count from FHL_DEFAULT_JOBS, falling back to 1."""
    raw = os.environ.get(JOBS_ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        return 1
    return max(1, jobs)
