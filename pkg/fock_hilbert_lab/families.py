"""
Test-function families used as norm witnesses.

All families are built directly in factorial-normalized form c_k = a_k sqrt(k!),
so the 1/sqrt(k!) factor of each coefficient formula never appears.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import DomainError
from .models import CoeffVec, FockWeight
from .numeric_config import FAMILY_MAX_TRUNC, FAMILY_TAIL_TOL

logger = logging.getLogger(__name__)


def _require_trunc(n: int, operation: str) -> None:
    if n < 1:
        raise DomainError(operation, f"N must be >= 1, got {n}")


def _require_w(w_val: float, operation: str) -> None:
    if not 0.0 < w_val < 1.0:
        raise DomainError(operation, f"w must lie in (0, 1), got {w_val}")


def make_f_eps(eps: float, w: FockWeight, n: int) -> CoeffVec:
    """a_0 = 0, a_k = sqrt(eps theta^eps) (k + theta)^(-(alpha + 1 + eps)/2) / sqrt(k!)."""
    if not eps > 0:
        raise DomainError("experiments.make_f_eps", f"eps must be > 0, got {eps}")
    _require_trunc(n, "experiments.make_f_eps")
    k = np.arange(n, dtype=float)
    scaled = math.sqrt(eps * w.theta**eps) * (k + w.theta) ** (-0.5 * (w.alpha + 1.0 + eps))
    scaled[0] = 0.0
    return CoeffVec(scaled=scaled)


def make_f_w(w_val: float, w: FockWeight, n: int) -> CoeffVec:
    """a_k = (1 - w^2)^(1/2) (k + theta)^(-alpha/2) w^k / sqrt(k!)."""
    _require_w(w_val, "experiments.make_f_w")
    _require_trunc(n, "experiments.make_f_w")
    k = np.arange(n, dtype=float)
    scaled = math.sqrt(1.0 - w_val * w_val) * (k + w.theta) ** (-0.5 * w.alpha) * w_val**k
    return CoeffVec(scaled=scaled)


def make_f_tilde(w_val: float, alpha: float, n: int) -> CoeffVec:
    """a_k = (1 - w^2)^((1 + alpha)/2) w^k / sqrt(k!)."""
    _require_w(w_val, "experiments.make_f_tilde")
    _require_trunc(n, "experiments.make_f_tilde")
    k = np.arange(n, dtype=float)
    scaled = (1.0 - w_val * w_val) ** (0.5 * (1.0 + alpha)) * w_val**k
    return CoeffVec(scaled=scaled)


def trunc_for_w(w_val: float, floor: int = 16) -> int:
    """Smallest N with w^(2N) <= FAMILY_TAIL_TOL, clamped to [floor, FAMILY_MAX_TRUNC]."""
    _require_w(w_val, "experiments.trunc_for_w")
    needed = math.ceil(math.log(FAMILY_TAIL_TOL) / (2.0 * math.log(w_val)))
    n = int(min(FAMILY_MAX_TRUNC, max(floor, needed)))
    if needed > FAMILY_MAX_TRUNC:
        logger.warning(
            "w=%g needs %d coefficients; capped at %d", w_val, needed, FAMILY_MAX_TRUNC
        )
    return n
