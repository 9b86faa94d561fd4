"""Tests for the adaptive quadrature driver."""

import numpy as np
import pytest

from fock_hilbert_lab.errors import FinitenessError, QuadratureError
from fock_hilbert_lab.numeric_config import QUADRATURE_MAX_KAPPA
from fock_hilbert_lab.quadrature import integrate_to_one, kappa_for_exponent, probe_decay_exponent


def test_constant_integrand():
    result = integrate_to_one(np.ones_like)
    assert result.value[0] == pytest.approx(1.0, abs=1e-13)
    assert result.error <= 1e-12
    assert result.panels >= 8


def test_lower_limit():
    result = integrate_to_one(lambda t: 2.0 * t, lower=0.5)
    assert result.value[0] == pytest.approx(0.75, abs=1e-13)


def test_empty_interval():
    assert integrate_to_one(np.ones_like, lower=1.0).value[0] == 0.0


def test_vector_valued_integrand_shares_panels():
    powers = np.arange(4, dtype=float)[:, None]
    result = integrate_to_one(lambda t: t[None, :] ** powers)
    np.testing.assert_allclose(result.value, [1.0, 0.5, 1.0 / 3.0, 0.25], atol=1e-13)


@pytest.mark.parametrize("exponent, expected", [(-0.5, 2.0), (-0.75, 4.0)])
def test_endpoint_singularity_with_substitution(exponent, expected):
    kappa = kappa_for_exponent(exponent)
    result = integrate_to_one(lambda t: (1.0 - t) ** exponent, kappa=kappa, tol=1e-11)
    assert result.value[0] == pytest.approx(expected, rel=1e-9)


def test_kappa_for_exponent():
    assert kappa_for_exponent(None) == 1
    assert kappa_for_exponent(0.0) == 1
    assert kappa_for_exponent(-0.5) == 2
    assert kappa_for_exponent(-0.75) == 4
    assert kappa_for_exponent(-0.999) == QUADRATURE_MAX_KAPPA


def test_kappa_rejects_nonintegrable_exponent():
    with pytest.raises(FinitenessError) as exc_info:
        kappa_for_exponent(-1.0)
    assert exc_info.value.operation == "radial_measure.moment"


def test_probe_decay_exponent():
    assert probe_decay_exponent(lambda t: 3.0 * (1.0 - t) ** 0.3) == pytest.approx(0.3, abs=1e-8)
    assert probe_decay_exponent(lambda t: (1.0 - t) ** -0.5) == pytest.approx(-0.5, abs=1e-8)
    assert probe_decay_exponent(np.zeros_like) is None


def test_budget_exhaustion_raises():
    with pytest.raises(QuadratureError) as exc_info:
        integrate_to_one(lambda t: (1.0 - t) ** -0.9, kappa=1, budget=20)
    assert "20 panels" in str(exc_info.value)


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureError):
        integrate_to_one(lambda t: np.full_like(t, np.nan), operation="radial_measure.tail_mass")
