"""
Gamma and Beta functions on the positive half-line.

Only positive real arguments are needed anywhere in the laboratory, so there is
no reflection formula and no complex branch. Everything is evaluated in log
domain; moments need Gamma(n + s + 2) for n up to ~10^4.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def _require_positive(operation: str, name: str, value: float) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(operation, f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(operation, f"{name} must be positive and finite, got {value!r}")
    return x


def log_gamma(x: float) -> float:
    """Return ln Gamma(x) for finite x > 0."""
    x = _require_positive("special_fn.log_gamma", "x", x)
    return float(special.gammaln(x))


def log_beta(u: float, v: float) -> float:
    """Return ln B(u, v) for u, v > 0."""
    u = _require_positive("special_fn.beta", "u", u)
    v = _require_positive("special_fn.beta", "v", v)
    return float(special.betaln(u, v))


def beta(u: float, v: float) -> float:
    """Return B(u, v) = Gamma(u) Gamma(v) / Gamma(u + v)."""
    return math.exp(log_beta(u, v))


def log_factorials(n: np.ndarray) -> np.ndarray:
    """Vectorized ln(n!) for nonnegative integer arrays."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise DomainError("special_fn.log_factorials", "indices must be nonnegative")
    return special.gammaln(n + 1.0)


def log_beta_array(u: np.ndarray, v: float) -> np.ndarray:
    """Vectorized ln B(u_i, v); used for closed-form moment tables."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or v <= 0:
        raise DomainError("special_fn.beta", "arguments must be positive")
    return special.betaln(u, v)


def stirling_ratio_log(x: float) -> float:
    """ln of Gamma(x) / (sqrt(2 pi) x^(x - 1/2) e^(-x)), i.e. ln(1 + r(x))."""
    x = _require_positive("special_fn.stirling_ratio_log", "x", x)
    return float(special.gammaln(x)) - (_HALF_LOG_TWO_PI + (x - 0.5) * math.log(x) - x)


def stirling_bound(x: float) -> float:
    """Upper bound e^(1/(12x)) - 1 on |r(x)|."""
    x = _require_positive("special_fn.stirling_bound", "x", x)
    return math.expm1(1.0 / (12.0 * x))


def stirling_remainder(x: float) -> float:
    """r(x) itself, reconstructed from the log ratio."""
    return math.expm1(stirling_ratio_log(x))
