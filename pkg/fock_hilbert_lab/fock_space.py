"""
Coefficient model of the weighted Fock space F^2_{theta, alpha}.

    ||f||^2 = sum_n (n + theta)^alpha |a_n|^2 n!

Coefficients are carried as c_n = a_n sqrt(n!) (see CoeffVec), so the n!
factor never has to be materialized.
"""

from __future__ import annotations

import cmath
import logging
import math

import numpy as np

from .errors import DomainError, NumericalOverflowError, ToleranceUnreachableError
from .models import CoeffVec, FockWeight, OrthoVec
from .numeric_config import KERNEL_TERM_CAP
from .special_fn import log_factorials

logger = logging.getLogger(__name__)

_LOG_MAX = math.log(np.finfo(float).max)


def _log_weights(w: FockWeight, trunc: int) -> np.ndarray:
    """alpha * ln(n + theta) for n < trunc."""
    return w.alpha * np.log(np.arange(trunc) + w.theta)


def norm_sq(f: CoeffVec, w: FockWeight) -> float:
    """Squared F^2_{theta, alpha} norm of the truncated function."""
    mag = np.abs(f.scaled)
    nonzero = mag > 0
    if not np.any(nonzero):
        return 0.0
    exponent = 2.0 * np.log(mag[nonzero]) + _log_weights(w, f.trunc)[nonzero]
    if np.any(exponent > _LOG_MAX):
        raise NumericalOverflowError("fock_space.norm_sq", "a norm term exceeds the float range")
    total = float(np.sum(np.exp(exponent)))
    if not math.isfinite(total):
        raise NumericalOverflowError("fock_space.norm_sq", "norm sum overflows")
    return total


def norm(f: CoeffVec, w: FockWeight) -> float:
    return math.sqrt(norm_sq(f, w))


def inner(f: CoeffVec, g: CoeffVec, w: FockWeight) -> complex:
    """<f, g> = sum (n + theta)^alpha a_n conj(b_n) n! over the common truncation."""
    trunc = min(f.trunc, g.trunc)
    weights = np.exp(_log_weights(w, trunc))
    return complex(np.sum(weights * f.scaled[:trunc] * np.conj(g.scaled[:trunc])))


def to_orthonormal(f: CoeffVec, w: FockWeight) -> OrthoVec:
    """Apply W: u_n = a_n sqrt(n!) (n + theta)^(alpha / 2)."""
    half = np.exp(0.5 * _log_weights(w, f.trunc))
    return OrthoVec(values=f.scaled * half, weight=w)


def from_orthonormal(u: OrthoVec) -> CoeffVec:
    """Inverse of W: a_n = u_n (n!)^(-1/2) (n + theta)^(-alpha / 2)."""
    half = np.exp(-0.5 * _log_weights(u.weight, u.trunc))
    return CoeffVec(scaled=u.values * half)


def basis_vector(n: int, w: FockWeight, trunc: int) -> CoeffVec:
    """The orthonormal basis element e_n, truncated to ``trunc`` coefficients."""
    if not 0 <= n < trunc:
        raise DomainError("fock_space.basis_vector", f"index {n} outside truncation {trunc}")
    scaled = np.zeros(trunc, dtype=complex)
    scaled[n] = (n + w.theta) ** (-0.5 * w.alpha)
    return CoeffVec(scaled=scaled)


def evaluate(f: CoeffVec, z: complex) -> complex:
    """Finite sum sum_{n<N} a_n z^n, accumulated in ascending n."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("fock_space.evaluate", "z must be finite")
    if z == 0:
        return complex(f.scaled[0])
    n = np.arange(f.trunc)
    log_z = cmath.log(z)
    log_terms = n * log_z - 0.5 * log_factorials(n)
    if np.max(log_terms.real) > _LOG_MAX:
        raise NumericalOverflowError("fock_space.evaluate", f"|z|^n / sqrt(n!) overflows at z={z}")
    return complex(np.sum(f.scaled * np.exp(log_terms)))


def kernel_eval(
    w: FockWeight,
    z: complex,
    y: complex,
    tol: float,
    cap: int = KERNEL_TERM_CAP,
) -> complex:
    """Reproducing kernel K(z, y) = sum (n + theta)^(-alpha) (z conj(y))^n / n!.

    Terms are added until the tail after term n is dominated by a geometric
    series with ratio r <= 1/2, giving the bound |t_n| r / (1 - r) <= ``tol``.
    For alpha <= 0 the consecutive-term ratios decrease, so the next ratio
    serves as r; for alpha > 0 they may rise first and r = |x| / (n + 1).
    """
    if not tol > 0:
        raise DomainError("fock_space.kernel_eval", f"tol must be > 0, got {tol}")
    x = complex(z) * complex(y).conjugate()
    theta, alpha = w.theta, w.alpha
    term = complex(theta ** (-alpha))
    total = term
    if x == 0:
        return total
    abs_x = abs(x)
    n = 0
    while True:
        shrink = ((n + theta) / (n + 1 + theta)) ** alpha
        term = term * x / (n + 1) * shrink
        n += 1
        if n > cap:
            raise ToleranceUnreachableError(
                "fock_space.kernel_eval", f"more than {cap} terms needed for tol={tol:g}"
            )
        if not (math.isfinite(term.real) and math.isfinite(term.imag)):
            raise NumericalOverflowError(
                "fock_space.kernel_eval", f"kernel terms overflow at |x|={abs_x:g}"
            )
        total += term
        ratio = abs_x / (n + 1)
        if alpha <= 0:
            ratio *= ((n + theta) / (n + 1 + theta)) ** alpha
        if ratio <= 0.5 and abs(term) * ratio / (1.0 - ratio) <= tol:
            break
    logger.debug("kernel_eval used %d terms (|x|=%g)", n + 1, abs_x)
    return total


def pointwise_bound(f: CoeffVec, w: FockWeight, z: complex, tol: float = 1e-12) -> float:
    """Cauchy-Schwarz bound ||f|| sqrt(K(z, z)) on |f(z)|."""
    k_zz = kernel_eval(w, z, z, tol).real
    return math.sqrt(norm_sq(f, w)) * math.sqrt(max(k_zz, 0.0))
