"""
Disk-space model for decreasing coefficient sequences.

A space X_p with property (star) contains a decreasing nonnegative sequence
exactly when sum_{n >= 1} n^G a_n^p is finite; the operator

    b_n = sum_k a_k / (k + n + 1)^lambda

acts on such sequences. Only the witness family needed for the lambda >= 1
necessity scan is modelled here.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import BoundViolation, DomainError
from .models import XpModel, XpSeq
from .numeric_config import stream_block_rows

logger = logging.getLogger(__name__)


def xp_norm_p(a: XpSeq, model: XpModel) -> float:
    """sum_{1 <= n < N} n^G a_n^p (n = 0 is excluded)."""
    if len(a) < 2:
        return 0.0
    n = np.arange(1, len(a), dtype=float)
    return float(np.sum(n**model.g_x * a.values[1:] ** model.p))


def apply_hhat(a: XpSeq, lam: float, out_len: int) -> XpSeq:
    """b_n = sum_{k < N} a_k / (k + n + 1)^lambda for n < out_len."""
    if not lam > 0:
        raise DomainError("experiments.apply_hhat", f"lambda must be > 0, got {lam}")
    if out_len < 1:
        raise DomainError("experiments.apply_hhat", f"out_len must be >= 1, got {out_len}")
    cols = len(a)
    kernel = (np.arange(out_len + cols, dtype=float) + 1.0) ** (-lam)
    k = np.arange(cols)
    out = np.empty(out_len)
    step = stream_block_rows(cols)
    for start in range(0, out_len, step):
        rows = np.arange(start, min(start + step, out_len))
        out[rows] = kernel[rows[:, None] + k[None, :]] @ a.values
    # the kernel is decreasing in n, so the image is nonincreasing
    if np.any(np.diff(out) > 1e-12 * max(out[0], 0.0)):
        raise BoundViolation("experiments.apply_hhat", "image is not nonincreasing")
    return XpSeq(values=out)


def make_f_hat(eps: float, model: XpModel, n: int) -> XpSeq:
    """a_0 = (eps/(1+eps))^(1/p), a_k = (eps/(1+eps))^(1/p) k^(-(G + 1 + eps)/p)."""
    if not eps > 0:
        raise DomainError("experiments.make_f_hat", f"eps must be > 0, got {eps}")
    if n < 1:
        raise DomainError("experiments.make_f_hat", f"N must be >= 1, got {n}")
    lead = (eps / (1.0 + eps)) ** (1.0 / model.p)
    k = np.arange(n, dtype=float)
    k[0] = 1.0
    return XpSeq(values=lead * k ** (-(model.g_x + 1.0 + eps) / model.p))


def witness_eps(model: XpModel, lam: float, default: float = 0.1) -> float:
    """Half the admissible margin p(1 - lambda) below lambda = 1, else ``default``."""
    if lam < 1.0:
        return 0.5 * model.p * (1.0 - lam)
    return default
