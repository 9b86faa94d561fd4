"""
Core data models for the Fock-space laboratory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .errors import DomainError, NumericalOverflowError
from .interfaces import DensityFunction
from .special_fn import log_factorials

_LOG_MAX = math.log(np.finfo(float).max)


def _frozen_array(values: Any, dtype: type, operation: str) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim != 1:
        raise DomainError(operation, "expected a one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise DomainError(operation, "all entries must be finite")
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Weighted Fock space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockWeight:
    """The pair (theta, alpha) parameterizing the norm of F^2_{theta, alpha}."""

    theta: float
    alpha: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta) or self.theta <= 0:
            raise DomainError("fock_space.FockWeight", f"theta must be > 0, got {self.theta}")
        if not math.isfinite(self.alpha):
            raise DomainError("fock_space.FockWeight", f"alpha must be finite, got {self.alpha}")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "alpha", float(self.alpha))

    def in_theorem_range(self) -> bool:
        """Whether -1 < alpha < 1, the range where the operators are studied."""
        return -1.0 < self.alpha < 1.0

    def with_alpha(self, alpha: float) -> "FockWeight":
        return FockWeight(theta=self.theta, alpha=alpha)


@dataclass(frozen=True, eq=False)
class CoeffVec:
    """Truncated Taylor coefficients a_0..a_{N-1} of an entire function.

    Stored as c_n = a_n * sqrt(n!) so that large truncations do not underflow;
    ``coeffs`` recovers the a_n.
    """

    scaled: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.scaled, complex, "fock_space.CoeffVec")
        if arr.size < 1:
            raise DomainError("fock_space.CoeffVec", "truncation must be at least 1")
        object.__setattr__(self, "scaled", arr)

    @property
    def trunc(self) -> int:
        return int(self.scaled.size)

    @property
    def coeffs(self) -> np.ndarray:
        """Taylor coefficients a_n (entries beyond n ~ 170 may underflow to 0)."""
        half_log_fact = 0.5 * log_factorials(np.arange(self.trunc))
        return self.scaled * np.exp(-half_log_fact)

    @classmethod
    def from_taylor(cls, coeffs: Any) -> "CoeffVec":
        a = np.asarray(coeffs, dtype=complex)
        if a.ndim != 1 or a.size < 1 or not np.all(np.isfinite(a)):
            raise DomainError("fock_space.CoeffVec", "coefficients must be a finite 1-D sequence")
        half_log_fact = 0.5 * log_factorials(np.arange(a.size))
        mag = np.abs(a)
        with np.errstate(divide="ignore"):
            log_mag = np.where(mag > 0, np.log(np.where(mag > 0, mag, 1.0)), -np.inf)
        exponent = log_mag + half_log_fact
        if np.any(exponent > _LOG_MAX):
            raise NumericalOverflowError("fock_space.CoeffVec", "a_n * sqrt(n!) overflows")
        phase = np.where(mag > 0, a / np.where(mag > 0, mag, 1.0), 0.0)
        return cls(scaled=phase * np.exp(exponent))

    @classmethod
    def zeros(cls, trunc: int) -> "CoeffVec":
        return cls(scaled=np.zeros(trunc, dtype=complex))

    def extended(self, trunc: int) -> "CoeffVec":
        """Zero-pad (or cut) to ``trunc`` coefficients."""
        out = np.zeros(trunc, dtype=complex)
        keep = min(trunc, self.trunc)
        out[:keep] = self.scaled[:keep]
        return CoeffVec(scaled=out)


@dataclass(frozen=True, eq=False)
class OrthoVec:
    """Coordinates u_n of a function in the orthonormal basis e_n of F^2_{theta, alpha}."""

    values: np.ndarray
    weight: FockWeight

    def __post_init__(self) -> None:
        values = _frozen_array(self.values, complex, "fock_space.OrthoVec")
        object.__setattr__(self, "values", values)

    @property
    def trunc(self) -> int:
        return int(self.values.size)


# ---------------------------------------------------------------------------
# Radial measures on [0, 1)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atoms:
    """Finite sum of point masses: sum_i mass_i * delta_{t_i}."""

    atoms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        cleaned = []
        for item in self.atoms:
            t, mass = float(item[0]), float(item[1])
            if not (0.0 <= t < 1.0):
                raise DomainError("radial_measure.Atoms", f"atom position {t} not in [0, 1)")
            if not math.isfinite(mass) or mass < 0:
                raise DomainError("radial_measure.Atoms", f"atom mass {mass} must be >= 0")
            cleaned.append((t, mass))
        object.__setattr__(self, "atoms", tuple(cleaned))

    @property
    def positions(self) -> np.ndarray:
        return np.array([t for t, _ in self.atoms], dtype=float)

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms], dtype=float)


@dataclass(frozen=True)
class PowerDensity:
    """c * (1 - t)^(s - 1) dt."""

    c: float
    s: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.c) or self.c < 0:
            raise DomainError("radial_measure.PowerDensity", f"c must be >= 0, got {self.c}")
        if not math.isfinite(self.s) or self.s <= 0:
            raise DomainError("radial_measure.PowerDensity", f"s must be > 0, got {self.s}")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "s", float(self.s))


@dataclass(frozen=True)
class GeneralDensity:
    """An evaluable nonnegative density on [0, 1), declared integrable.

    ``decay_hint`` is the exponent e with density ~ (1 - t)^e near 1; when omitted
    the quadrature probes it.
    """

    density: DensityFunction
    label: str = "density"
    decay_hint: Optional[float] = None


@dataclass(frozen=True)
class Mixture:
    """Sum of component measures."""

    parts: Tuple["MeasureSpec", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))


MeasureSpec = Union[Atoms, PowerDensity, GeneralDensity, Mixture]


def measure_id(m: MeasureSpec) -> str:
    """Short human-readable identifier used in reports."""
    if isinstance(m, Atoms):
        inner = ",".join(f"({t:g},{mass:g})" for t, mass in m.atoms)
        return f"atoms[{inner}]"
    if isinstance(m, PowerDensity):
        return f"power(c={m.c:g},s={m.s:g})"
    if isinstance(m, GeneralDensity):
        return f"density({m.label})"
    if isinstance(m, Mixture):
        return "mixture[" + ";".join(measure_id(p) for p in m.parts) + "]"
    raise DomainError("radial_measure.measure_id", f"unknown measure type {type(m).__name__}")


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Moments mu[0..N] of a measure."""

    source: str
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen_array(self.values, float, "radial_measure.MomentTable")
        object.__setattr__(self, "values", values)

    @property
    def max_index(self) -> int:
        return int(self.values.size) - 1

    def covers(self, index: int) -> bool:
        return 0 <= index <= self.max_index

    def __getitem__(self, index: int) -> float:
        return float(self.values[index])

    def __len__(self) -> int:
        return int(self.values.size)


# ---------------------------------------------------------------------------
# Hilbert-type operators
# ---------------------------------------------------------------------------


class OperatorKind(str, Enum):
    H_LAMBDA = "hlambda"
    H_CHECK = "hcheck"
    H_MU = "hmu"
    H_LAMBDA_MU = "hlambdamu"


@dataclass(frozen=True)
class OperatorSpec:
    """Which Hilbert-type operator, acting from F^2_{theta, alpha} to F^2_{theta, beta}."""

    kind: OperatorKind
    source: FockWeight
    target: FockWeight
    lam: Optional[float] = None
    measure: Optional[MeasureSpec] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OperatorKind(self.kind))
        if self.source.theta != self.target.theta:
            raise DomainError(
                "hilbert_ops.OperatorSpec",
                f"source and target must share theta ({self.source.theta} != {self.target.theta})",
            )
        if self.kind in (OperatorKind.H_LAMBDA, OperatorKind.H_LAMBDA_MU):
            if self.lam is None or not math.isfinite(self.lam) or self.lam <= 0:
                raise DomainError("hilbert_ops.OperatorSpec", f"lambda must be > 0, got {self.lam}")
        if self.kind in (OperatorKind.H_MU, OperatorKind.H_LAMBDA_MU) and self.measure is None:
            raise DomainError("hilbert_ops.OperatorSpec", f"{self.kind.value} requires a measure")

    @property
    def theta(self) -> float:
        return self.source.theta

    @property
    def alpha(self) -> float:
        return self.source.alpha

    @property
    def beta(self) -> float:
        return self.target.alpha

    @property
    def s_star(self) -> float:
        """Critical exponent 1 + (beta - alpha) / 2."""
        return 1.0 + 0.5 * (self.beta - self.alpha)

    @classmethod
    def h_lambda(cls, lam: float, theta: float, alpha: float, beta: float) -> "OperatorSpec":
        return cls(
            OperatorKind.H_LAMBDA, FockWeight(theta, alpha), FockWeight(theta, beta), lam=lam
        )

    @classmethod
    def h_check(cls, theta: float, alpha: float, beta: float) -> "OperatorSpec":
        return cls(OperatorKind.H_CHECK, FockWeight(theta, alpha), FockWeight(theta, beta))

    @classmethod
    def h_mu(cls, measure: MeasureSpec, theta: float, alpha: float, beta: float) -> "OperatorSpec":
        return cls(
            OperatorKind.H_MU, FockWeight(theta, alpha), FockWeight(theta, beta), measure=measure
        )

    @classmethod
    def h_lambda_mu(
        cls, lam: float, measure: MeasureSpec, theta: float, alpha: float, beta: float
    ) -> "OperatorSpec":
        return cls(
            OperatorKind.H_LAMBDA_MU,
            FockWeight(theta, alpha),
            FockWeight(theta, beta),
            lam=lam,
            measure=measure,
        )

    def describe(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "op": self.kind.value,
            "theta": self.theta,
            "alpha": self.alpha,
            "beta": self.beta,
        }
        if self.lam is not None:
            out["lambda"] = self.lam
        if self.measure is not None:
            out["measure"] = measure_id(self.measure)
        return out


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """N x N nonnegative matrix of an operator in orthonormal coordinates.

    Every kernel in the family depends on n + k only, so the matrix is
    row_scale[n] * kernel[n + k] * col_scale[k].
    """

    spec: OperatorSpec
    dim: int
    kernel: np.ndarray
    row_scale: np.ndarray
    col_scale: np.ndarray

    def __post_init__(self) -> None:
        for name in ("kernel", "row_scale", "col_scale"):
            arr = _frozen_array(getattr(self, name), float, "hilbert_ops.TruncatedOperator")
            if np.any(arr < 0):
                raise DomainError("hilbert_ops.TruncatedOperator", f"{name} must be nonnegative")
            object.__setattr__(self, name, arr)
        if self.kernel.size < 2 * self.dim - 1:
            raise DomainError("hilbert_ops.TruncatedOperator", "kernel shorter than 2N - 1")
        if self.row_scale.size != self.dim or self.col_scale.size != self.dim:
            raise DomainError("hilbert_ops.TruncatedOperator", "scale vectors must have length N")

    def row_block(self, start: int, stop: int) -> np.ndarray:
        """Rows start..stop-1 of the matrix."""
        n = np.arange(start, stop)[:, None]
        k = np.arange(self.dim)[None, :]
        block = self.kernel[n + k]
        return self.row_scale[start:stop, None] * block * self.col_scale[None, :]

    @cached_property
    def entries(self) -> np.ndarray:
        dense = self.row_block(0, self.dim)
        dense.setflags(write=False)
        return dense


# ---------------------------------------------------------------------------
# Disk model with property (star)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XpModel:
    """A disk space X_p whose decreasing-coefficient members satisfy sum n^G a_n^p < inf."""

    g_x: float
    p: float
    label: str = "custom"

    def __post_init__(self) -> None:
        if not math.isfinite(self.p) or self.p <= 1:
            raise DomainError("experiments.XpModel", f"p must be > 1, got {self.p}")
        if not math.isfinite(self.g_x) or self.g_x <= -1:
            raise DomainError("experiments.XpModel", f"G_X must be > -1, got {self.g_x}")

    @classmethod
    def hardy(cls, p: float) -> "XpModel":
        return cls(g_x=p - 2.0, p=p, label="hardy")

    @classmethod
    def dirichlet(cls, p: float, alpha: float) -> "XpModel":
        if not (p - 2.0 < alpha <= p - 1.0):
            raise DomainError(
                "experiments.XpModel", f"Dirichlet needs p-2 < alpha <= p-1, got {alpha}"
            )
        return cls(g_x=2.0 * p - 3.0 - alpha, p=p, label=f"dirichlet({alpha:g})")

    @classmethod
    def bergman(cls, p: float, alpha: float) -> "XpModel":
        if not (-1.0 < alpha < p - 2.0):
            raise DomainError("experiments.XpModel", f"Bergman needs -1 < alpha < p-2, got {alpha}")
        return cls(g_x=2.0 * p - 3.0 - alpha, p=p, label=f"bergman({alpha:g})")

    @classmethod
    def custom(cls, g_x: float, p: float) -> "XpModel":
        return cls(g_x=g_x, p=p, label="custom")


@dataclass(frozen=True, eq=False)
class XpSeq:
    """Nonincreasing nonnegative coefficient sequence a_0..a_{N-1}."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.values, float, "experiments.XpSeq")
        if arr.size < 1:
            raise DomainError("experiments.XpSeq", "sequence must be nonempty")
        if np.any(arr < 0):
            raise DomainError("experiments.XpSeq", "entries must be nonnegative")
        if np.any(np.diff(arr) > 1e-12 * float(arr[0])):
            raise DomainError("experiments.XpSeq", "sequence must be nonincreasing")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanCell:
    """One recorded value: a series, its parameter, a truncation, and the growth ratio."""

    series: str
    parameter: float
    n: int
    value: float
    ratio: float = float("nan")


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one bound or property check."""

    name: str
    ok: bool
    value: float
    bound: float
    detail: str = ""


@dataclass(frozen=True)
class ScanReport:
    """Ordered scan cells plus checks and metadata."""

    kind: str
    cells: Tuple[ScanCell, ...] = ()
    checks: Tuple[CheckResult, ...] = ()
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(check.ok for check in self.checks)

    @property
    def violations(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.ok]

    def series(self, name: str) -> List[ScanCell]:
        return [cell for cell in self.cells if cell.series == name]

    def values(self, name: str, parameter: float) -> List[Tuple[int, float]]:
        """(N, value) pairs of one series/parameter, in recorded order."""
        return [(c.n, c.value) for c in self.cells if c.series == name and c.parameter == parameter]

    def growth_ratio(self, name: str, parameter: float) -> float:
        """Ratio of the values at the two largest truncations."""
        pairs = sorted(self.values(name, parameter))
        if len(pairs) < 2 or pairs[-2][1] == 0:
            return float("nan")
        return pairs[-1][1] / pairs[-2][1]

    def is_monotone(self, name: str, rel_tol: float = 1e-9) -> bool:
        """Whether every parameter's values are nondecreasing along N."""
        for parameter in {c.parameter for c in self.series(name)}:
            vals = [v for _, v in sorted(self.values(name, parameter))]
            for prev, cur in zip(vals, vals[1:]):
                if cur < prev * (1.0 - rel_tol):
                    return False
        return True
