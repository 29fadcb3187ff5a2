#!/usr/bin/env python3
"""
Tests for the Hankel and modified Bessel evaluators.
"""

import numpy as np
import pytest
from scipy import special

from finite_differences import derivative
from kernel_errors import DomainError
from special_functions import (
    SWITCH_RADIUS,
    HalfIntegerOrder,
    bessel_k,
    hankel1,
    hankel1_derivative,
    hankel1_power_series,
    sqrt_upper,
)


def test_sqrt_upper_branch():
    """Test the root choice of sqrt_upper"""
    assert sqrt_upper(4.0) == pytest.approx(2.0)
    assert sqrt_upper(-1.0) == pytest.approx(1j)
    assert sqrt_upper(-1j) == pytest.approx(complex(-np.sqrt(0.5), np.sqrt(0.5)))
    roots = sqrt_upper(np.array([1j, -4.0, -1.0 - 1e-3j]))
    assert np.all(roots.imag >= 0)
    np.testing.assert_allclose(roots ** 2, [1j, -4.0, -1.0 - 1e-3j], rtol=1e-14)


def test_sqrt_upper_rejects_zero():
    """Test that the root is undefined at the origin"""
    with pytest.raises(DomainError):
        sqrt_upper(0.0)


def test_half_integer_order():
    """Test order construction and validation"""
    assert HalfIntegerOrder.for_dimension(2).value == 0.0
    assert HalfIntegerOrder.for_dimension(3).value == 0.5
    assert HalfIntegerOrder.from_value(1.5).twice_order == 3
    with pytest.raises(DomainError):
        HalfIntegerOrder.from_value(0.3)
    with pytest.raises(DomainError):
        HalfIntegerOrder.for_dimension(1)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 2.0, 2.5])
def test_hankel1_matches_scipy(nu):
    """Test H^(1) against scipy on both sides of the switch radius"""
    z = np.array([0.05, 0.7, 3.0, 11.9, 12.1, 30.0, 2.0 + 1.0j, 5.0 + 5.0j, 0.3j, 20.0 + 0.5j])
    np.testing.assert_allclose(hankel1(nu, z), special.hankel1(nu, z), rtol=1e-8)


@pytest.mark.parametrize("nu", [0, 1, 2])
@pytest.mark.parametrize("angle", [0.5 * np.pi, 0.75 * np.pi, 0.1 * np.pi])
def test_hankel1_integer_order_off_the_real_axis(nu, angle):
    """Test integer-order H^(1) where J and Y cancel, below the switch radius"""
    radii = np.linspace(0.5, SWITCH_RADIUS - 0.01, 40)
    z = radii * np.exp(1j * angle)
    np.testing.assert_allclose(hankel1(nu, z), special.hankel1(nu, z), rtol=1e-10)
    np.testing.assert_allclose(hankel1_derivative(nu, z), special.h1vp(nu, z), rtol=1e-10)


def test_hankel1_scalar_in_scalar_out():
    """Test that a scalar argument returns a scalar"""
    value = hankel1(0.5, 1.0)
    assert np.ndim(value) == 0
    assert value == pytest.approx(special.hankel1(0.5, 1.0), rel=1e-13)


def test_hankel1_negative_half_order():
    """Test the reflection H_{-nu} = exp(i pi nu) H_nu"""
    z = np.array([0.5, 2.0 + 1.0j])
    np.testing.assert_allclose(hankel1(-0.5, z), np.exp(0.5j * np.pi) * hankel1(0.5, z), rtol=1e-13)


def test_hankel1_domain():
    """Test the rejection of z = 0 and of the lower half plane"""
    with pytest.raises(DomainError):
        hankel1(0.0, 0.0)
    with pytest.raises(DomainError):
        hankel1(1.0, 1.0 - 1.0j)
    with pytest.raises(DomainError):
        hankel1(0.25, 1.0)


def test_hankel1_derivative_identity():
    """Test H_0' = -H_1 and agreement with finite differences"""
    z = np.array([0.4, 1.0j, 3.0 + 2.0j])
    np.testing.assert_allclose(hankel1_derivative(0.0, z), -hankel1(1.0, z), rtol=1e-12)
    for nu in (0.5, 1.0, 2.0):
        numeric = derivative(lambda w: hankel1(nu, w), 2.5 + 0.5j, 1e-3)
        assert hankel1_derivative(nu, 2.5 + 0.5j) == pytest.approx(numeric, rel=1e-9)


def test_hankel1_power_series_half_order():
    """Test the half-order power series against the closed form"""
    z = np.array([0.1, 1.0, 4.0 + 1.0j])
    for nu in (0.5, 1.5):
        np.testing.assert_allclose(hankel1_power_series(nu, z), special.hankel1(nu, z), rtol=1e-10)


def test_hankel1_small_argument_growth():
    """Test |H_nu(z)| ~ Gamma(nu)/pi (2/|z|)^nu as z -> 0"""
    z = 1e-4
    for nu in (0.5, 1.0, 1.5):
        leading = special.gamma(nu) / np.pi * (2.0 / z) ** nu
        assert abs(hankel1(nu, z)) == pytest.approx(leading, rel=1e-3)
    assert abs(hankel1(0.0, z)) == pytest.approx(2.0 / np.pi * np.log(2.0 / z), rel=0.1)


def test_hankel1_large_argument_envelope():
    """Test |H_nu(z)| sqrt(|z|) exp(Im z) stays near sqrt(2/pi)"""
    z = np.array([SWITCH_RADIUS * 2.0, 50.0 + 3.0j, 200.0 + 10.0j])
    for nu in (0.0, 0.5, 1.0):
        envelope = np.abs(hankel1(nu, z)) * np.sqrt(np.abs(z)) * np.exp(z.imag)
        np.testing.assert_allclose(envelope, np.sqrt(2.0 / np.pi), rtol=0.05)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
def test_bessel_k_matches_scipy(nu):
    """Test K_nu over the series, quadrature and asymptotic ranges"""
    x = np.array([1e-3, 0.5, 1.9, 2.1, 8.0, 16.9, 17.1, 40.0])
    np.testing.assert_allclose(bessel_k(nu, x), special.kv(nu, x), rtol=1e-8)


def test_bessel_k_scalar_and_symmetry():
    """Test scalar output and K_{-nu} = K_nu"""
    assert bessel_k(0.0, 1.0) == pytest.approx(0.42102443824070834, rel=1e-12)
    assert bessel_k(-1.5, 2.0) == pytest.approx(bessel_k(1.5, 2.0), rel=1e-14)
    with pytest.raises(DomainError):
        bessel_k(0.0, -1.0)
