"""
Positive Borel measures on [0, 1): moments, tail masses, Carleson constants,
vanishing profiles and the (1 - t)^(lambda - 1) transform.

A measure is one of the frozen variants in ``models`` (Atoms, PowerDensity,
GeneralDensity, Mixture). The zero measure (``Atoms()``) is legal everywhere.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError, FinitenessError, QuadratureError
from .interfaces import DensityFunction
from .models import (
    Atoms,
    GeneralDensity,
    MeasureSpec,
    Mixture,
    MomentTable,
    PowerDensity,
    measure_id,
)
from .numeric_config import DEFAULT_CARLESON_DEPTH
from .quadrature import integrate_to_one, kappa_for_exponent, probe_decay_exponent
from .special_fn import log_beta_array

logger = logging.getLogger(__name__)


def _check_measure(m: Any, operation: str) -> None:
    if not isinstance(m, (Atoms, PowerDensity, GeneralDensity, Mixture)):
        raise DomainError(operation, f"unsupported measure type {type(m).__name__}")


def _density_kappa(m: GeneralDensity, operation: str) -> int:
    exponent = m.decay_hint if m.decay_hint is not None else probe_decay_exponent(m.density)
    return kappa_for_exponent(exponent, operation)


def _density_moments(m: GeneralDensity, indices: np.ndarray) -> np.ndarray:
    kappa = _density_kappa(m, "radial_measure.moment")
    powers = indices.astype(float)[:, None]

    def integrand(t: np.ndarray) -> np.ndarray:
        return np.power(t[None, :], powers) * np.asarray(m.density(t), dtype=float)[None, :]

    result = integrate_to_one(integrand, kappa=kappa, operation="radial_measure.moment")
    logger.debug(
        "moments of %s up to n=%d: kappa=%d, %d panels",
        measure_id(m),
        int(indices[-1]) if indices.size else 0,
        kappa,
        result.panels,
    )
    return np.maximum(result.value, 0.0)


def _moments(m: MeasureSpec, indices: np.ndarray) -> np.ndarray:
    if isinstance(m, Atoms):
        if not m.atoms:
            return np.zeros(indices.size)
        # 0 ** 0 == 1 for numpy floats, so an atom at the origin has moment 1 at n = 0.
        return np.power(m.positions[None, :], indices.astype(float)[:, None]) @ m.masses
    if isinstance(m, PowerDensity):
        if m.c == 0:
            return np.zeros(indices.size)
        return m.c * np.exp(log_beta_array(indices + 1.0, m.s))
    if isinstance(m, GeneralDensity):
        return _density_moments(m, indices)
    if isinstance(m, Mixture):
        total = np.zeros(indices.size)
        for part in m.parts:
            total = total + _moments(part, indices)
        return total
    raise DomainError("radial_measure.moment", f"unsupported measure type {type(m).__name__}")


def moment(m: MeasureSpec, n: int) -> float:
    """mu[n] = integral of t^n d mu(t)."""
    if n < 0:
        raise DomainError("radial_measure.moment", f"n must be >= 0, got {n}")
    _check_measure(m, "radial_measure.moment")
    return float(_moments(m, np.array([int(n)]))[0])


def moment_table(m: MeasureSpec, n_max: int) -> MomentTable:
    """Moments mu[0..n_max] (n_max + 1 values)."""
    if n_max < 1:
        raise DomainError("radial_measure.moment_table", f"N must be >= 1, got {n_max}")
    _check_measure(m, "radial_measure.moment_table")
    values = _moments(m, np.arange(n_max + 1))
    return MomentTable(source=measure_id(m), values=values)


def total_mass(m: MeasureSpec) -> float:
    return moment(m, 0)


def tail_mass(m: MeasureSpec, t: float) -> float:
    """mu([t, 1))."""
    if not 0.0 <= t < 1.0:
        raise DomainError("radial_measure.tail_mass", f"t must lie in [0, 1), got {t}")
    if isinstance(m, Atoms):
        return float(sum(mass for pos, mass in m.atoms if pos >= t))
    if isinstance(m, PowerDensity):
        return (m.c / m.s) * (1.0 - t) ** m.s
    if isinstance(m, GeneralDensity):
        kappa = _density_kappa(m, "radial_measure.tail_mass")
        result = integrate_to_one(
            lambda x: np.asarray(m.density(x), dtype=float),
            lower=t,
            kappa=kappa,
            operation="radial_measure.tail_mass",
        )
        return max(float(result.value[0]), 0.0)
    if isinstance(m, Mixture):
        return float(sum(tail_mass(part, t) for part in m.parts))
    raise DomainError("radial_measure.tail_mass", f"unsupported measure type {type(m).__name__}")


def _log_tail_mass(m: MeasureSpec, t: float) -> float:
    """log mu([t, 1)); -inf when the tail carries no mass."""
    if isinstance(m, PowerDensity):
        if m.c == 0:
            return -math.inf
        return math.log(m.c / m.s) + m.s * math.log1p(-t)
    if isinstance(m, Mixture):
        logs = [_log_tail_mass(part, t) for part in m.parts]
        finite = [v for v in logs if v > -math.inf]
        return float(special.logsumexp(finite)) if finite else -math.inf
    mass = tail_mass(m, t)
    return math.log(mass) if mass > 0 else -math.inf


def default_carleson_grid(depth: int = DEFAULT_CARLESON_DEPTH) -> np.ndarray:
    """Geometric grid t_j = 1 - 2^-j for j = 0..depth."""
    return 1.0 - 2.0 ** -np.arange(depth + 1, dtype=float)


def _grid(grid: Optional[Sequence[float]], operation: str) -> np.ndarray:
    if grid is None:
        return default_carleson_grid()
    points = np.asarray(list(grid), dtype=float)
    if points.size == 0:
        raise DomainError(operation, "grid must be nonempty")
    if np.any(points < 0) or np.any(points >= 1):
        raise DomainError(operation, "grid points must lie in [0, 1)")
    return points


def _quotients(m: MeasureSpec, s: float, points: np.ndarray) -> np.ndarray:
    # log domain: (1 - t)^s underflows near t = 1 once s is a few dozen
    log_tails = np.array([_log_tail_mass(m, float(t)) for t in points])
    with np.errstate(over="ignore"):
        return np.exp(log_tails - s * np.log1p(-points))


def carleson_constant(m: MeasureSpec, s: float, grid: Optional[Sequence[float]] = None) -> float:
    """max over the grid of mu([t, 1)) / (1 - t)^s; +inf if a quotient overflows."""
    if not s > 0:
        raise DomainError("radial_measure.carleson_constant", f"s must be > 0, got {s}")
    points = _grid(grid, "radial_measure.carleson_constant")
    return float(np.max(_quotients(m, s, points)))


def vanishing_profile(
    m: MeasureSpec, s: float, grid: Optional[Sequence[float]] = None
) -> List[Tuple[float, float]]:
    """(t_j, mu([t_j, 1)) / (1 - t_j)^s) for each grid point."""
    if not s > 0:
        raise DomainError("radial_measure.vanishing_profile", f"s must be > 0, got {s}")
    points = _grid(grid, "radial_measure.vanishing_profile")
    if np.any(np.diff(points) <= 0):
        raise DomainError("radial_measure.vanishing_profile", "grid must be strictly increasing")
    return [(float(t), float(q)) for t, q in zip(points, _quotients(m, s, points))]


@dataclass(frozen=True)
class _FactorDensity:
    """base(t) * (1 - t)^(lam - 1); a module-level class so it pickles."""

    base: DensityFunction
    lam: float

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.asarray(self.base(t), dtype=float) * (1.0 - t) ** (self.lam - 1.0)


def lambda_transform(m: MeasureSpec, lam: float) -> MeasureSpec:
    """The measure d nu = (1 - t)^(lam - 1) d mu."""
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError("radial_measure.lambda_transform", f"lambda must be > 0, got {lam}")
    if lam == 1.0:
        return m
    if isinstance(m, Atoms):
        return Atoms(tuple((t, mass * (1.0 - t) ** (lam - 1.0)) for t, mass in m.atoms))
    if isinstance(m, PowerDensity):
        s_new = m.s + lam - 1.0
        if m.c == 0:
            return Atoms()
        if s_new <= 0:
            raise FinitenessError(
                "radial_measure.lambda_transform",
                f"(1-t)^{lam - 1:g} d mu has infinite mass for {measure_id(m)}",
            )
        return PowerDensity(c=m.c, s=s_new)
    if isinstance(m, GeneralDensity):
        hint = m.decay_hint + lam - 1.0 if m.decay_hint is not None else None
        nu = GeneralDensity(
            density=_FactorDensity(m.density, lam),
            label=f"{m.label}*(1-t)^{lam - 1:g}",
            decay_hint=hint,
        )
        try:
            mass = total_mass(nu)
        except QuadratureError as exc:
            raise FinitenessError(
                "radial_measure.lambda_transform", f"mass of {nu.label} did not converge: {exc}"
            ) from exc
        except FinitenessError as exc:
            raise FinitenessError("radial_measure.lambda_transform", exc.message) from exc
        if not math.isfinite(mass):
            raise FinitenessError(
                "radial_measure.lambda_transform", f"{nu.label} has infinite mass"
            )
        return nu
    if isinstance(m, Mixture):
        return Mixture(tuple(lambda_transform(part, lam) for part in m.parts))
    raise DomainError(
        "radial_measure.lambda_transform", f"unsupported measure type {type(m).__name__}"
    )


def lambda_moments(m: MeasureSpec, lam: float, n_max: int) -> MomentTable:
    """mu_lambda[n] = integral of t^n (1 - t)^(lam - 1) d mu(t), n = 0..n_max."""
    return moment_table(lambda_transform(m, lam), n_max)


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------


def measure_from_json(obj: Any) -> MeasureSpec:
    """Build a measure from the JSON schema (a parsed object or a JSON string)."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ConfigError("radial_measure.measure_from_json", f"invalid JSON: {exc}") from exc
    if not isinstance(obj, Mapping):
        raise ConfigError("radial_measure.measure_from_json", "measure must be a JSON object")
    kind = obj.get("type")
    try:
        if kind == "atoms":
            atoms = obj.get("atoms", [])
            return Atoms(tuple((float(t), float(mass)) for t, mass in atoms))
        if kind == "power":
            return PowerDensity(c=float(obj["c"]), s=float(obj["s"]))
        if kind == "mixture":
            return Mixture(tuple(measure_from_json(part) for part in obj.get("parts", [])))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(
            "radial_measure.measure_from_json", f"malformed {kind} measure: {exc}"
        ) from exc
    raise ConfigError("radial_measure.measure_from_json", f"unknown measure type {kind!r}")


def measure_to_json(m: MeasureSpec) -> Dict[str, Any]:
    if isinstance(m, Atoms):
        return {"type": "atoms", "atoms": [[t, mass] for t, mass in m.atoms]}
    if isinstance(m, PowerDensity):
        return {"type": "power", "c": m.c, "s": m.s}
    if isinstance(m, Mixture):
        return {"type": "mixture", "parts": [measure_to_json(part) for part in m.parts]}
    raise DomainError(
        "radial_measure.measure_to_json", f"{measure_id(m)} has no JSON representation"
    )


# ---------------------------------------------------------------------------
# Decay estimates
# ---------------------------------------------------------------------------


def moment_decay_profile(
    m: MeasureSpec, theta: float, alpha: float, beta: float, n_max: int
) -> List[Tuple[int, float]]:
    """(n, mu[n] (n + 2 theta)^(1 + (beta - alpha)/2)) for n = 0..n_max.

    Bounded for s*-Carleson measures and tending to 0 for vanishing ones.
    """
    if theta <= 0:
        raise DomainError("radial_measure.moment_decay_profile", f"theta must be > 0, got {theta}")
    s_star = 1.0 + 0.5 * (beta - alpha)
    table = moment_table(m, max(1, n_max))
    n = np.arange(n_max + 1)
    scaled = table.values[: n_max + 1] * (n + 2.0 * theta) ** s_star
    return [(int(i), float(v)) for i, v in zip(n, scaled)]


def kernel_equivalence_bracket(lam: float, n_max: int) -> Tuple[float, float]:
    """min and max over m <= n_max of (1 / (m^lam + 1)) / B(m + 1, lam).

    B(m + 1, lam) is the integral of t^m (1 - t)^(lam - 1); a finite bracket is the
    comparability of the H_lambda kernel with the moment kernel of (1 - t)^(lam - 1) dt.
    """
    if not lam > 0:
        raise DomainError(
            "radial_measure.kernel_equivalence_bracket", f"lambda must be > 0, got {lam}"
        )
    m = np.arange(n_max + 1, dtype=float)
    log_ratio = -np.log1p(m**lam) - log_beta_array(m + 1.0, lam)
    ratio = np.exp(log_ratio)
    return float(ratio.min()), float(ratio.max())
