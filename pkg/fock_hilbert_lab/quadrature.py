"""
Adaptive Gauss-Legendre quadrature for integrands concentrated near t = 1.

Integrals over [a, 1) are computed after the substitution

    t = 1 - (1 - a) (1 - u)^kappa,   u in [0, 1],

which turns a (1 - t)^(s - 1) endpoint singularity into the bounded factor
(1 - u)^(kappa s - 1) once kappa s >= 1. Panels in u are bisected where a
low/high order pair disagrees most, in the manner of a Gauss-Kronrod driver.
The integrand may be vector valued (shape (m, nodes)), which lets a whole
moment table share one panel refinement.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import roots_legendre

from .errors import FinitenessError, QuadratureError
from .interfaces import DensityFunction
from .numeric_config import (
    QUADRATURE_ABS_TOL,
    QUADRATURE_MAX_KAPPA,
    QUADRATURE_ORDER,
    QUADRATURE_PANEL_BUDGET,
)

logger = logging.getLogger(__name__)

_BELOW_ONE = float(np.nextafter(1.0, 0.0))

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureResult:
    value: np.ndarray
    error: float
    panels: int


@lru_cache(maxsize=8)
def _rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = roots_legendre(order)
    return 0.5 * (x + 1.0), 0.5 * w


def probe_decay_exponent(density: DensityFunction) -> Optional[float]:
    """Estimate e in density(t) ~ (1 - t)^e near t = 1 from a log-log fit.

    Returns None when the density vanishes or misbehaves on the probe grid.
    """
    gaps = 2.0 ** -np.arange(8, 33, dtype=float)
    t = 1.0 - gaps
    with np.errstate(all="ignore"):
        values = np.asarray(density(t), dtype=float)
    if values.shape != t.shape or not np.all(np.isfinite(values)) or np.any(values <= 0):
        return None
    slope, _ = np.polyfit(np.log(gaps), np.log(values), 1)
    return float(slope)


def kappa_for_exponent(exponent: Optional[float], operation: str = "radial_measure.moment") -> int:
    """Smallest integer kappa with kappa * (exponent + 1) >= 1, clipped to the cap."""
    if exponent is None:
        return 1
    s = exponent + 1.0
    if s <= 0:
        raise FinitenessError(
            operation, f"density ~ (1-t)^{exponent:.3g} is not integrable at 1"
        )
    return int(min(QUADRATURE_MAX_KAPPA, max(1, math.ceil(1.0 / s - 1e-9))))


def integrate_to_one(
    func: Integrand,
    lower: float = 0.0,
    kappa: int = 1,
    tol: float = QUADRATURE_ABS_TOL,
    budget: int = QUADRATURE_PANEL_BUDGET,
    order: int = QUADRATURE_ORDER,
    initial_panels: int = 8,
    operation: str = "quadrature.integrate_to_one",
) -> QuadratureResult:
    """Integrate ``func`` over [lower, 1) to absolute tolerance ``tol``."""
    width = 1.0 - lower
    if width <= 0:
        return QuadratureResult(value=np.zeros(1), error=0.0, panels=0)
    x_hi, w_hi = _rule(order)
    x_lo, w_lo = _rule(max(2, order // 2))

    def _eval(a: float, b: float, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        u = a + (b - a) * x
        one_minus_u = 1.0 - u
        t = np.minimum(1.0 - width * one_minus_u**kappa, _BELOW_ONE)
        # Jacobian at the node t actually represents; 1 - t is exact here but
        # width * (1 - u)^kappa is not once it drops below ~1e-8.
        gap = (1.0 - t) / width
        jac = width * kappa * gap ** ((kappa - 1.0) / kappa)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.asarray(func(t), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(operation, f"integrand not finite on panel [{a:.3g}, {b:.3g}]")
        return (b - a) * (vals * (w * jac)).sum(axis=-1)

    def _panel(a: float, b: float) -> Tuple[float, float, float, np.ndarray]:
        hi = _eval(a, b, x_hi, w_hi)
        lo = _eval(a, b, x_lo, w_lo)
        err = float(np.max(np.abs(hi - lo)))
        return (-err, a, b, hi)

    edges = np.linspace(0.0, 1.0, initial_panels + 1)
    heap: List[Tuple[float, float, float, np.ndarray]] = [
        _panel(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])
    ]
    heapq.heapify(heap)
    count = len(heap)
    total_err = -sum(item[0] for item in heap)
    while True:
        if total_err <= tol:
            break
        if count >= budget:
            raise QuadratureError(
                operation,
                f"tolerance {tol:g} not met within {budget} panels "
                f"(error estimate {total_err:.3g})",
            )
        neg_err, a, b, _ = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        left, right = _panel(a, mid), _panel(mid, b)
        heapq.heappush(heap, left)
        heapq.heappush(heap, right)
        total_err += neg_err - left[0] - right[0]
        count += 1
    value = np.sum([item[3] for item in heap], axis=0)
    logger.debug("%s: %d panels, error estimate %.3g", operation, len(heap), total_err)
    return QuadratureResult(value=np.atleast_1d(value), error=total_err, panels=len(heap))
