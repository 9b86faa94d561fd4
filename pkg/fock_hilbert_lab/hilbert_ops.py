"""
Truncated matrix realizations of the Hilbert-type operators.

In orthonormal coordinates u_n = a_n sqrt(n!) (n + theta)^(alpha/2) the
factorials of the coefficient formulas cancel and every operator becomes

    M[n, k] = (n + theta)^(beta/2) * kernel[n + k] * (k + theta)^(-alpha/2)

with a Hankel kernel that depends on the operator kind:

    hlambda     1 / (m^lambda + 1)
    hcheck      (m + 2 theta)^-(1 + (beta - alpha)/2)
    hmu         mu[m]
    hlambdamu   integral of t^m (1 - t)^(lambda - 1) d mu(t)

Products with M are taken in fixed row blocks, so large truncations are
streamed without materializing the matrix and results do not depend on how
many scan workers are running.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .errors import DomainError, MissingMomentError, NonConvergenceError
from .fock_space import from_orthonormal, to_orthonormal
from .models import CoeffVec, MomentTable, OperatorKind, OperatorSpec, OrthoVec, TruncatedOperator
from .numeric_config import (
    DEFAULT_POWER_TOL,
    LEMMA_TAIL_TOL,
    POWER_ITERATION_CAP,
    fits_dense,
    stream_block_rows,
)
from .radial_measure import lambda_moments, moment_table
from .special_fn import beta as beta_fn

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Entries and assembly
# ---------------------------------------------------------------------------


def kernel_vector(spec: OperatorSpec, length: int) -> np.ndarray:
    """kernel[0..length-1] of the operator."""
    if length < 1:
        raise DomainError("hilbert_ops.kernel_vector", f"length must be >= 1, got {length}")
    m = np.arange(length, dtype=float)
    if spec.kind is OperatorKind.H_LAMBDA:
        return 1.0 / (m ** float(spec.lam) + 1.0)
    if spec.kind is OperatorKind.H_CHECK:
        return (m + 2.0 * spec.theta) ** (-spec.s_star)
    # moment_table needs an upper index >= 1
    upper = max(1, length - 1)
    if spec.kind is OperatorKind.H_MU:
        return moment_table(spec.measure, upper).values[:length].copy()
    return lambda_moments(spec.measure, float(spec.lam), upper).values[:length].copy()


def row_scale(spec: OperatorSpec, rows: int) -> np.ndarray:
    """(n + theta)^(beta/2) for n < rows."""
    return (np.arange(rows) + spec.theta) ** (0.5 * spec.beta)


def col_scale(spec: OperatorSpec, cols: int) -> np.ndarray:
    """(k + theta)^(-alpha/2) for k < cols."""
    return (np.arange(cols) + spec.theta) ** (-0.5 * spec.alpha)


def entry(spec: OperatorSpec, n: int, k: int, moments: Optional[MomentTable] = None) -> float:
    """M[n, k] for one index pair.

    For hmu and hlambdamu ``moments`` must cover n + k; for hlambdamu it holds the
    transformed moments mu_lambda.
    """
    if n < 0 or k < 0:
        raise DomainError("hilbert_ops.entry", f"indices must be >= 0, got ({n}, {k})")
    m = n + k
    if spec.kind is OperatorKind.H_LAMBDA:
        kernel = 1.0 / (m ** float(spec.lam) + 1.0)
    elif spec.kind is OperatorKind.H_CHECK:
        kernel = (m + 2.0 * spec.theta) ** (-spec.s_star)
    else:
        if moments is None or not moments.covers(m):
            have = -1 if moments is None else moments.max_index
            raise MissingMomentError(
                "hilbert_ops.entry", f"moment index {m} not covered (table up to {have})"
            )
        kernel = moments[m]
    return (n + spec.theta) ** (0.5 * spec.beta) * kernel * (k + spec.theta) ** (-0.5 * spec.alpha)


def build_truncated(
    spec: OperatorSpec, dim: int, kernel: Optional[np.ndarray] = None
) -> TruncatedOperator:
    """The N x N truncation; ``kernel`` may be a precomputed (longer) kernel vector."""
    if dim < 1:
        raise DomainError("hilbert_ops.build_truncated", f"N must be >= 1, got {dim}")
    needed = 2 * dim - 1
    if kernel is None:
        kernel = kernel_vector(spec, needed)
    elif kernel.size < needed:
        raise DomainError(
            "hilbert_ops.build_truncated", f"kernel has {kernel.size} entries, need {needed}"
        )
    return TruncatedOperator(
        spec=spec,
        dim=dim,
        kernel=np.asarray(kernel[:needed], dtype=float),
        row_scale=row_scale(spec, dim),
        col_scale=col_scale(spec, dim),
    )


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def _hankel_rows(
    kernel: np.ndarray, rows: np.ndarray, cols: int, r_scale: np.ndarray, c_scale: np.ndarray
) -> np.ndarray:
    block = kernel[rows[:, None] + np.arange(cols)[None, :]]
    return r_scale[rows, None] * block * c_scale[None, :]


def matvec(T: TruncatedOperator, x: np.ndarray) -> np.ndarray:
    """M @ x, accumulated one fixed row block at a time."""
    x = np.asarray(x)
    if x.shape != (T.dim,):
        raise DomainError("hilbert_ops.matvec", f"vector of length {T.dim} expected")
    if fits_dense(T.dim):
        return T.entries @ x
    step = stream_block_rows(T.dim)
    out = np.empty(T.dim, dtype=np.result_type(x, float))
    for start in range(0, T.dim, step):
        stop = min(start + step, T.dim)
        out[start:stop] = T.row_block(start, stop) @ x
    return out


def rmatvec(T: TruncatedOperator, y: np.ndarray) -> np.ndarray:
    """M^T @ y."""
    y = np.asarray(y)
    if y.shape != (T.dim,):
        raise DomainError("hilbert_ops.rmatvec", f"vector of length {T.dim} expected")
    if fits_dense(T.dim):
        return T.entries.T @ y
    step = stream_block_rows(T.dim)
    out = np.zeros(T.dim, dtype=np.result_type(y, float))
    for start in range(0, T.dim, step):
        stop = min(start + step, T.dim)
        out += T.row_block(start, stop).T @ y[start:stop]
    return out


def _image_coords(
    spec: OperatorSpec, f: CoeffVec, out_len: int, kernel: Optional[np.ndarray]
) -> np.ndarray:
    if out_len < 1:
        raise DomainError("hilbert_ops.apply", f"out_len must be >= 1, got {out_len}")
    cols = f.trunc
    needed = out_len + cols - 1
    if kernel is None:
        kernel = kernel_vector(spec, needed)
    elif kernel.size < needed:
        raise DomainError("hilbert_ops.apply", f"kernel has {kernel.size} entries, need {needed}")
    u = to_orthonormal(f, spec.source).values
    r_scale = row_scale(spec, out_len)
    c_scale = col_scale(spec, cols)
    step = stream_block_rows(cols)
    out = np.empty(out_len, dtype=complex)
    for start in range(0, out_len, step):
        rows = np.arange(start, min(start + step, out_len))
        out[rows] = _hankel_rows(kernel, rows, cols, r_scale, c_scale) @ u
    return out


def apply(
    spec: OperatorSpec, f: CoeffVec, out_len: int, kernel: Optional[np.ndarray] = None
) -> CoeffVec:
    """Image coefficients b_0..b_{out_len-1} of the operator applied to f."""
    v = _image_coords(spec, f, out_len, kernel)
    return from_orthonormal(OrthoVec(values=v, weight=spec.target))


def image_norm(
    spec: OperatorSpec, f: CoeffVec, out_len: int, kernel: Optional[np.ndarray] = None
) -> float:
    """||apply(spec, f, out_len)|| in F^2_{theta, beta}, read off the orthonormal coordinates."""
    return float(np.linalg.norm(_image_coords(spec, f, out_len, kernel)))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def top_singular_value(
    matrix: np.ndarray,
    tol: float = DEFAULT_POWER_TOL,
    cap: int = POWER_ITERATION_CAP,
) -> float:
    """Largest singular value of a dense matrix by power iteration on M^T M."""
    a = np.asarray(matrix, dtype=float)
    return _power_iteration(lambda v: a @ v, lambda v: a.T @ v, a.shape[1], tol, cap)


def _power_iteration(mv, rmv, dim: int, tol: float, cap: int) -> float:
    if not tol > 0:
        raise DomainError("hilbert_ops.op_norm", f"tol must be > 0, got {tol}")
    v = np.full(dim, 1.0 / math.sqrt(dim))
    sigma = 0.0
    for iteration in range(1, cap + 1):
        w = mv(v)
        sigma_new = float(np.linalg.norm(w))
        z = rmv(w)
        z_norm = float(np.linalg.norm(z))
        if z_norm == 0.0:
            return 0.0
        v = z / z_norm
        if abs(sigma_new - sigma) <= tol * sigma_new:
            logger.debug("power iteration converged after %d steps: %.17g", iteration, sigma_new)
            return sigma_new
        sigma = sigma_new
    raise NonConvergenceError(
        "hilbert_ops.op_norm", f"power iteration did not reach tol={tol:g} in {cap} steps"
    )


def op_norm(
    T: TruncatedOperator, tol: float = DEFAULT_POWER_TOL, cap: int = POWER_ITERATION_CAP
) -> float:
    """Largest singular value of the truncation (a lower bound on the operator norm)."""
    if fits_dense(T.dim):
        return top_singular_value(T.entries, tol, cap)
    logger.info("op_norm: streaming %d x %d truncation in row blocks", T.dim, T.dim)
    return streamed_op_norm(T, tol, cap)


def streamed_op_norm(
    T: TruncatedOperator, tol: float = DEFAULT_POWER_TOL, cap: int = POWER_ITERATION_CAP
) -> float:
    """op_norm without materializing the matrix."""
    step = stream_block_rows(T.dim)

    def mv(v: np.ndarray) -> np.ndarray:
        out = np.empty(T.dim)
        for start in range(0, T.dim, step):
            stop = min(start + step, T.dim)
            out[start:stop] = T.row_block(start, stop) @ v
        return out

    def rmv(y: np.ndarray) -> np.ndarray:
        out = np.zeros(T.dim)
        for start in range(0, T.dim, step):
            stop = min(start + step, T.dim)
            out += T.row_block(start, stop).T @ y[start:stop]
        return out

    return _power_iteration(mv, rmv, T.dim, tol, cap)


def tail_norm(
    spec: OperatorSpec,
    n_keep: int,
    n_big: int,
    tol: float = DEFAULT_POWER_TOL,
    kernel: Optional[np.ndarray] = None,
) -> float:
    """op_norm of the n_big truncation with output rows 0..n_keep-1 removed."""
    if not 0 <= n_keep <= n_big:
        raise DomainError(
            "hilbert_ops.tail_norm", f"need 0 <= N_keep <= N_big, got {n_keep}, {n_big}"
        )
    if n_keep == n_big:
        return 0.0
    full = build_truncated(spec, n_big, kernel)
    rows = full.row_scale.copy()
    rows[:n_keep] = 0.0
    tail = TruncatedOperator(
        spec=spec, dim=n_big, kernel=full.kernel, row_scale=rows, col_scale=full.col_scale
    )
    return op_norm(tail, tol)


# ---------------------------------------------------------------------------
# Lemma weights of the Beta-bounded kernel
# ---------------------------------------------------------------------------


def lemma_beta_bound(alpha: float, beta: float) -> float:
    """B((1 + beta)/2, (1 - alpha)/2)."""
    return beta_fn(0.5 * (1.0 + beta), 0.5 * (1.0 - alpha))


def _lemma_exponents(
    theta: float, alpha: float, beta: float, index: int, which: int
) -> Tuple[float, float, float, float]:
    """(prefactor, offset a, s, q) for sum_j (j + a)^-s (j + theta)^-q."""
    s = 1.0 + 0.5 * (beta - alpha)
    offset = index + 2.0 * theta
    if which == 1:
        return (index + theta) ** (0.5 * (1.0 - beta)), offset, s, 0.5 * (1.0 + alpha)
    return (index + theta) ** (0.5 * (1.0 + alpha)), offset, s, 0.5 * (1.0 - beta)


def lemma_weight(
    theta: float,
    alpha: float,
    beta: float,
    index: int,
    which: int = 1,
    tol: float = LEMMA_TAIL_TOL,
) -> Tuple[float, float]:
    """The weight w1(index) (which=1) or w2(index) (which=2) with a certified remainder.

        w1(n) = (n + theta)^((1 - beta)/2) sum_k (k + n + 2 theta)^-s (k + theta)^-((1 + alpha)/2)
        w2(k) = (k + theta)^((1 + alpha)/2) sum_n (k + n + 2 theta)^-s (n + theta)^-((1 - beta)/2)

    with s = 1 + (beta - alpha)/2. The sum is split at K: the head is summed
    directly, the tail by Euler-Maclaurin through the first-derivative term.
    The summand g is completely monotone, so the remainder is bounded by
    |g'''(K)| / 720 <= (s + q)(s + q + 1)(s + q + 2) (K + theta)^-3 g(K) / 720.
    """
    if which not in (1, 2):
        raise DomainError("hilbert_ops.lemma_weight", f"which must be 1 or 2, got {which}")
    if theta <= 0 or index < 0:
        raise DomainError("hilbert_ops.lemma_weight", "need theta > 0 and index >= 0")
    if not (-1.0 < alpha < 1.0 and -1.0 < beta < 1.0):
        raise DomainError(
            "hilbert_ops.lemma_weight", f"need -1 < alpha, beta < 1, got {alpha}, {beta}"
        )
    prefactor, offset, s, q = _lemma_exponents(theta, alpha, beta, index, which)
    p = s + q

    def g(x):
        return (x + offset) ** (-s) * (x + theta) ** (-q)

    cutoff = max(64, 2 * index + 16)
    while True:
        remainder = p * (p + 1.0) * (p + 2.0) * (cutoff + theta) ** -3 * g(cutoff) / 720.0
        if prefactor * remainder <= 0.5 * tol:
            break
        cutoff *= 2
    head = float(np.sum(g(np.arange(cutoff, dtype=float))))
    # integral of g over [K, inf); with z = 1 / (x + theta) it is
    # z^(p - 2) (1 + d z)^-s over [0, 1/(K + theta)]
    d = offset - theta
    upper = 1.0 / (cutoff + theta)
    tail_integral, quad_err = integrate.quad(
        lambda z: (1.0 + d * z) ** (-s),
        0.0,
        upper,
        weight="alg",
        wvar=(p - 2.0, 0.0),
        epsabs=1e-15,
        epsrel=1e-13,
    )
    g_k = float(g(cutoff))
    g_prime = -g_k * (s / (cutoff + offset) + q / (cutoff + theta))
    tail = tail_integral + 0.5 * g_k - g_prime / 12.0
    value = prefactor * (head + tail)
    bound = prefactor * (remainder + quad_err)
    logger.debug(
        "lemma_weight w%d(%d) theta=%g alpha=%g beta=%g: K=%d value=%.17g remainder<=%.3g",
        which,
        index,
        theta,
        alpha,
        beta,
        cutoff,
        value,
        bound,
    )
    return value, bound


def _require_hcheck(T: TruncatedOperator, operation: str) -> None:
    if T.spec.kind is not OperatorKind.H_CHECK:
        raise DomainError(operation, f"expected an hcheck truncation, got {T.spec.kind.value}")


def weighted_row_sums(T: TruncatedOperator) -> np.ndarray:
    """Partial sums over k < N of w1(n), read off the hcheck matrix."""
    _require_hcheck(T, "hilbert_ops.weighted_row_sums")
    theta, beta = T.spec.theta, T.spec.beta
    idx = np.arange(T.dim) + theta
    return matvec(T, idx**-0.5) * idx ** (0.5 * (1.0 - 2.0 * beta))


def weighted_column_sums(T: TruncatedOperator) -> np.ndarray:
    """Partial sums over n < N of w2(k), read off the hcheck matrix."""
    _require_hcheck(T, "hilbert_ops.weighted_column_sums")
    theta, alpha = T.spec.theta, T.spec.alpha
    idx = np.arange(T.dim) + theta
    return rmatvec(T, idx**-0.5) * idx ** (0.5 * (1.0 + 2.0 * alpha))
