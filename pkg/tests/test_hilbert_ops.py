"""Tests for truncated Hilbert-type operators."""

import math
from unittest.mock import patch

import numpy as np
import pytest
from scipy import integrate

from fock_hilbert_lab.errors import DomainError, MissingMomentError, NonConvergenceError
from fock_hilbert_lab.fock_space import norm, to_orthonormal
from fock_hilbert_lab.hilbert_ops import (
    apply,
    build_truncated,
    entry,
    image_norm,
    kernel_vector,
    lemma_beta_bound,
    lemma_weight,
    matvec,
    op_norm,
    rmatvec,
    streamed_op_norm,
    tail_norm,
    top_singular_value,
    weighted_column_sums,
    weighted_row_sums,
)
from fock_hilbert_lab.models import Atoms, CoeffVec, MomentTable, OperatorSpec, PowerDensity
from fock_hilbert_lab.radial_measure import moment_table

DIRAC_AT_ZERO = Atoms(((0.0, 1.0),))


# ---------------------------------------------------------------------------
# Entries and assembly
# ---------------------------------------------------------------------------


def test_hilbert_matrix_block():
    spec = OperatorSpec.h_lambda(1.0, theta=1.0, alpha=0.0, beta=0.0)
    T = build_truncated(spec, 2)
    np.testing.assert_allclose(T.entries, [[1.0, 0.5], [0.5, 1.0 / 3.0]])
    assert op_norm(T) == pytest.approx((4.0 + math.sqrt(13.0)) / 6.0, rel=1e-10)


def test_kernel_vectors_per_kind():
    np.testing.assert_allclose(
        kernel_vector(OperatorSpec.h_lambda(2.0, 1.0, 0.0, 0.0), 3), [1.0, 0.5, 0.2]
    )
    check = OperatorSpec.h_check(0.5, -0.5, 0.5)
    np.testing.assert_allclose(kernel_vector(check, 3), (np.arange(3) + 1.0) ** -1.5)
    hmu = OperatorSpec.h_mu(PowerDensity(1.0, 1.0), 1.0, 0.0, 0.0)
    np.testing.assert_allclose(kernel_vector(hmu, 4), [1.0, 0.5, 1.0 / 3.0, 0.25])
    hlm = OperatorSpec.h_lambda_mu(2.0, PowerDensity(1.0, 1.0), 1.0, 0.0, 0.0)
    # integral of t^m (1 - t) dt = 1 / ((m + 1)(m + 2))
    np.testing.assert_allclose(kernel_vector(hlm, 3), [0.5, 1.0 / 6.0, 1.0 / 12.0])
    with pytest.raises(DomainError):
        kernel_vector(hmu, 0)


def test_lebesgue_hmu_matches_h_one():
    # moments of dt are 1/(m + 1), the H_1 kernel
    h1 = build_truncated(OperatorSpec.h_lambda(1.0, 2.0, 0.3, 0.1), 16)
    hmu = build_truncated(OperatorSpec.h_mu(PowerDensity(1.0, 1.0), 2.0, 0.3, 0.1), 16)
    np.testing.assert_allclose(hmu.entries, h1.entries, rtol=1e-13)


def test_entry_agrees_with_assembled_matrix():
    spec = OperatorSpec.h_check(1.5, -0.25, 0.5)
    T = build_truncated(spec, 6)
    for n in range(6):
        for k in range(6):
            assert entry(spec, n, k) == pytest.approx(T.entries[n, k], rel=1e-14)


def test_entry_needs_covering_moments():
    spec = OperatorSpec.h_mu(PowerDensity(1.0, 1.0), 1.0, 0.0, 0.0)
    table = moment_table(spec.measure, 4)
    assert entry(spec, 2, 2, table) == pytest.approx(0.2)
    with pytest.raises(MissingMomentError) as exc_info:
        entry(spec, 3, 2, table)
    assert "hilbert_ops.entry" in str(exc_info.value)
    with pytest.raises(MissingMomentError):
        entry(spec, 0, 0)
    with pytest.raises(DomainError):
        entry(spec, -1, 0, MomentTable(source="x", values=[1.0, 1.0]))


def test_build_truncated_checks_kernel_length():
    spec = OperatorSpec.h_lambda(1.0, 1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        build_truncated(spec, 4, kernel=np.ones(6))
    with pytest.raises(DomainError):
        build_truncated(spec, 0)
    T = build_truncated(spec, 3, kernel=kernel_vector(spec, 20))
    assert T.kernel.size == 5


def _random_spec(rng: np.random.Generator) -> OperatorSpec:
    theta = rng.uniform(0.2, 4.0)
    alpha, beta = rng.uniform(-0.9, 0.9, 2)
    if rng.integers(2):
        return OperatorSpec.h_lambda(rng.uniform(0.5, 2.0), theta, alpha, beta)
    return OperatorSpec.h_mu(PowerDensity(1.0, rng.uniform(0.5, 3.0)), theta, alpha, beta)


def test_truncation_is_symmetric_when_weights_mirror():
    rng = np.random.default_rng(11)
    for _ in range(20):
        alpha = rng.uniform(-0.9, 0.9)
        spec = OperatorSpec.h_lambda(rng.uniform(0.5, 2.0), rng.uniform(0.2, 4.0), alpha, -alpha)
        M = build_truncated(spec, 24).entries
        np.testing.assert_allclose(M, M.T, rtol=1e-14)


def test_smaller_truncation_is_the_leading_block():
    rng = np.random.default_rng(12)
    for _ in range(20):
        spec = _random_spec(rng)
        dim = int(rng.integers(2, 40))
        inner_block = build_truncated(spec, dim - 1).entries
        np.testing.assert_allclose(
            inner_block, build_truncated(spec, dim).entries[:-1, :-1], rtol=1e-12
        )


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def test_streamed_products_match_dense():
    spec = OperatorSpec.h_check(1.0, 0.2, -0.3)
    T = build_truncated(spec, 50)
    x = np.linspace(-1.0, 1.0, 50)
    dense_mv, dense_rmv = T.entries @ x, T.entries.T @ x
    with patch("fock_hilbert_lab.hilbert_ops.fits_dense", return_value=False), patch(
        "fock_hilbert_lab.hilbert_ops.stream_block_rows", return_value=7
    ):
        np.testing.assert_allclose(matvec(T, x), dense_mv, rtol=1e-13)
        np.testing.assert_allclose(rmatvec(T, x), dense_rmv, rtol=1e-13)
    with pytest.raises(DomainError):
        matvec(T, np.ones(3))


def test_apply_is_hankel_action_on_scaled_coefficients():
    spec = OperatorSpec.h_lambda(0.8, theta=2.0, alpha=0.4, beta=-0.2)
    f = CoeffVec.from_taylor([1.0, -0.5j, 0.25, 2.0])
    g = apply(spec, f, 5)
    kernel = kernel_vector(spec, 8)
    expected = np.array([sum(kernel[n + k] * f.scaled[k] for k in range(4)) for n in range(5)])
    np.testing.assert_allclose(g.scaled, expected, rtol=1e-13)
    assert image_norm(spec, f, 5) == pytest.approx(norm(g, spec.target), rel=1e-12)


def test_apply_agrees_with_matrix_on_random_draws():
    rng = np.random.default_rng(13)
    for _ in range(200):
        spec = _random_spec(rng)
        dim = int(rng.integers(1, 30))
        f = CoeffVec(scaled=rng.normal(size=dim) + 1j * rng.normal(size=dim))
        u = to_orthonormal(f, spec.source).values
        expected = build_truncated(spec, dim).entries @ u
        got = to_orthonormal(apply(spec, f, dim), spec.target).values
        scale = np.max(np.abs(expected))
        np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-12 * scale)
        assert image_norm(spec, f, dim) == pytest.approx(np.linalg.norm(expected), rel=1e-10)


def test_apply_rejects_short_kernel():
    spec = OperatorSpec.h_lambda(1.0, 1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        apply(spec, CoeffVec.from_taylor([1.0, 1.0]), 4, kernel=np.ones(3))
    with pytest.raises(DomainError):
        apply(spec, CoeffVec.from_taylor([1.0]), 0)


def test_image_norm_bounded_by_op_norm():
    spec = OperatorSpec.h_check(1.0, 0.0, 0.5)
    T = build_truncated(spec, 32)
    f = CoeffVec(scaled=1.0 / (np.arange(32) + 1.0))
    assert image_norm(spec, f, 32) <= op_norm(T) * norm(f, spec.source) * (1.0 + 1e-10)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def test_dirac_at_origin_norm():
    spec = OperatorSpec.h_mu(DIRAC_AT_ZERO, theta=4.0, alpha=0.0, beta=1.0)
    assert op_norm(build_truncated(spec, 8)) == pytest.approx(2.0, rel=1e-12)


def test_zero_measure_has_zero_norm():
    spec = OperatorSpec.h_mu(Atoms(), 1.0, 0.0, 0.0)
    assert op_norm(build_truncated(spec, 8)) == 0.0


def test_power_iteration_matches_svd():
    spec = OperatorSpec.h_lambda(0.7, theta=1.5, alpha=-0.3, beta=0.4)
    T = build_truncated(spec, 40)
    expected = np.linalg.norm(T.entries, 2)
    assert op_norm(T) == pytest.approx(expected, rel=1e-9)


def test_streamed_norm_matches_dense():
    spec = OperatorSpec.h_check(1.0, 0.0, 0.0)
    T = build_truncated(spec, 64)
    with patch("fock_hilbert_lab.hilbert_ops.stream_block_rows", return_value=5):
        streamed = streamed_op_norm(T)
    assert streamed == pytest.approx(op_norm(T), rel=1e-10)


def test_op_norm_streams_past_dense_limit(caplog):
    spec = OperatorSpec.h_lambda(1.0, 1.0, 0.0, 0.0)
    T = build_truncated(spec, 16)
    with patch("fock_hilbert_lab.hilbert_ops.fits_dense", return_value=False):
        with caplog.at_level("INFO", logger="fock_hilbert_lab.hilbert_ops"):
            value = op_norm(T)
    assert value == pytest.approx(np.linalg.norm(T.entries, 2), rel=1e-9)
    assert "streaming" in caplog.text


def test_hilbert_matrix_norms_grow_below_pi():
    spec = OperatorSpec.h_lambda(1.0, 1.0, 0.0, 0.0)
    norms = [op_norm(build_truncated(spec, n)) for n in (2, 8, 64, 512)]
    assert all(b > a for a, b in zip(norms, norms[1:]))
    assert norms[-1] < math.pi


def test_top_singular_value_of_diagonal():
    assert top_singular_value(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-12)


def test_power_iteration_validation():
    matrix = np.array([[1.0, 0.5], [0.5, 1.0 / 3.0]])
    with pytest.raises(DomainError):
        top_singular_value(matrix, tol=0.0)
    with pytest.raises(NonConvergenceError):
        top_singular_value(matrix, cap=1)
    assert top_singular_value(np.zeros((3, 3))) == 0.0


def test_tail_norm_edges_and_monotonicity():
    spec = OperatorSpec.h_mu(PowerDensity(1.0, 2.0), 1.0, 0.0, 0.0)
    n_big = 128
    full = op_norm(build_truncated(spec, n_big))
    assert tail_norm(spec, 0, n_big) == pytest.approx(full, rel=1e-10)
    assert tail_norm(spec, n_big, n_big) == 0.0
    tails = [tail_norm(spec, k, n_big) for k in (4, 16, 64)]
    assert tails[0] > tails[1] > tails[2] > 0
    with pytest.raises(DomainError):
        tail_norm(spec, n_big + 1, n_big)


# ---------------------------------------------------------------------------
# Lemma weights
# ---------------------------------------------------------------------------


def test_lemma_beta_bound_symmetric_case():
    assert lemma_beta_bound(0.0, 0.0) == pytest.approx(math.pi)


def _brute_w1(theta, alpha, beta, n, terms=2_000_000):
    s = 1.0 + 0.5 * (beta - alpha)
    q = 0.5 * (1.0 + alpha)

    def g(x):
        return (x + n + 2.0 * theta) ** (-s) * (x + theta) ** (-q)

    k = np.arange(terms, dtype=float)
    head = float(np.sum(g(k)))
    tail, _ = integrate.quad(g, terms, np.inf, epsabs=1e-14)
    return (n + theta) ** (0.5 * (1.0 - beta)) * (head + tail + 0.5 * g(float(terms)))


@pytest.mark.parametrize(
    "theta, alpha, beta, n",
    [(1.0, 0.0, 0.0, 0), (0.5, 0.3, -0.2, 7), (2.0, -0.6, 0.6, 30)],
)
def test_lemma_weight_matches_long_partial_sum(theta, alpha, beta, n):
    value, remainder = lemma_weight(theta, alpha, beta, n, which=1)
    assert remainder < 1e-10
    assert value == pytest.approx(_brute_w1(theta, alpha, beta, n), rel=1e-9)


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.0), (0.5, -0.5), (-0.8, 0.9)])
def test_lemma_weights_obey_beta_bounds(alpha, beta):
    theta = 1.0
    b_const = lemma_beta_bound(alpha, beta)
    for index in (0, 1, 10, 100):
        w1, r1 = lemma_weight(theta, alpha, beta, index, which=1)
        w2, r2 = lemma_weight(theta, alpha, beta, index, which=2)
        assert w1 + r1 <= b_const * (index + theta) ** (-beta)
        assert w2 + r2 <= b_const * (index + theta) ** alpha


def test_lemma_weight_validation():
    with pytest.raises(DomainError):
        lemma_weight(1.0, 0.0, 0.0, 0, which=3)
    with pytest.raises(DomainError):
        lemma_weight(1.0, 1.0, 0.0, 0)
    with pytest.raises(DomainError):
        lemma_weight(0.0, 0.0, 0.0, 0)


def test_weighted_sums_are_partial_lemma_weights():
    theta, alpha, beta = 1.0, 0.2, -0.1
    T = build_truncated(OperatorSpec.h_check(theta, alpha, beta), 64)
    rows = weighted_row_sums(T)
    cols = weighted_column_sums(T)
    for index in (0, 5, 63):
        assert rows[index] < lemma_weight(theta, alpha, beta, index, which=1)[0]
        assert cols[index] < lemma_weight(theta, alpha, beta, index, which=2)[0]
    idx = np.arange(64) + theta
    assert np.all(rows * idx**beta <= lemma_beta_bound(alpha, beta))
    assert np.all(cols * idx ** (-alpha) <= lemma_beta_bound(alpha, beta))


def test_weighted_sums_require_hcheck():
    T = build_truncated(OperatorSpec.h_lambda(1.0, 1.0, 0.0, 0.0), 4)
    with pytest.raises(DomainError):
        weighted_row_sums(T)
    with pytest.raises(DomainError):
        weighted_column_sums(T)
