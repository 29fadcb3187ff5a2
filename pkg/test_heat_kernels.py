#!/usr/bin/env python3
"""
Tests for the time-dependent tensor E and the representations built on it.
"""

import numpy as np
import pytest
from scipy import integrate, special

from finite_differences import central_gradient, laplacian
from heat_kernels import (
    heat_kernel,
    laplace_conv,
    laplace_mode_coefficients,
    oseen_heat_integral,
    oseen_heat_tensor,
    periodized_gamma_perp,
    scaled_lower_gamma,
    stokes_heat_integral,
    stokes_heat_tensor,
    upper_gamma,
)
from kernel_errors import DomainError, SingularPointError
from mode_kernels import conv_laplace_mode, mode_matrices
from steady_kernels import KernelParams, gamma_stokes, laplace_hessian


def test_incomplete_gamma_helpers():
    """Test the scaled lower and the unregularized upper incomplete gamma"""
    u = np.array([1e-6, 5e-4, 0.3, 4.0])
    for a in (0.5, 1.0, 1.5, 2.5):
        expected = special.gammainc(a, u) * special.gamma(a) / u ** a
        np.testing.assert_allclose(scaled_lower_gamma(a, u), expected, rtol=1e-12)
    assert scaled_lower_gamma(1.5, 0.0) == pytest.approx(1.0 / 1.5)
    assert upper_gamma(0.0, 2.0) == pytest.approx(special.exp1(2.0))
    assert upper_gamma(1.0, 2.0) == pytest.approx(np.exp(-2.0))


def test_heat_kernel_normalization():
    """Test that H_s has unit mass in two dimensions"""
    s = 0.3

    def radial(r):
        return 2.0 * np.pi * r * heat_kernel(s, np.array([r, 0.0]), 2)

    mass, _ = integrate.quad(radial, 0.0, np.inf)
    assert mass == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_stokes_heat_tensor_small_time_limit(n):
    """Test E(s, x) -> grad grad Gamma_L(x) as s -> 0+"""
    params = KernelParams(n=n)
    x = np.array([0.6, -0.8, 0.5][:n])
    np.testing.assert_allclose(stokes_heat_tensor(1e-4, x, n), laplace_hessian(x, params), rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_stokes_heat_tensor_is_solenoidal_heat_solution(n):
    """Test div_y E = 0 and d_s E = Laplace_y E"""
    y = np.array([0.7, 0.4, -0.3][:n])
    s = 0.4
    h = 1e-3
    gradient = central_gradient(lambda p: stokes_heat_tensor(s, p, n), y, h)
    assert np.max(np.abs(np.einsum("iij->j", gradient))) < 1e-9
    rate = (stokes_heat_tensor(s + h, y, n) - stokes_heat_tensor(s - h, y, n)) / (2.0 * h)
    np.testing.assert_allclose(rate, laplacian(lambda p: stokes_heat_tensor(s, p, n), y, h), atol=1e-6)


def test_stokes_heat_tensor_rejects_nonpositive_time():
    """Test that E needs s > 0"""
    with pytest.raises(DomainError):
        stokes_heat_tensor(0.0, np.ones(3), 3)


def test_oseen_heat_tensor_is_advected():
    """Test E(s, x - lam s e_1) against the Stokes tensor"""
    params = KernelParams(n=2, lam=0.7)
    s = 1.3
    x = np.array([1.0, 0.5])
    shifted = x - np.array([params.lam * s, 0.0])
    np.testing.assert_allclose(oseen_heat_tensor(s, x, params), stokes_heat_tensor(s, shifted, 2))


@pytest.mark.parametrize("n", [2, 3])
def test_stokes_heat_integral_matches_quadrature(n):
    """Test the closed-form time integral of E"""
    x = np.array([0.9, 0.3, -0.4][:n])
    upper = 7.0

    def integrand(s):
        return stokes_heat_tensor(s, x, n)

    numeric, _ = integrate.quad_vec(integrand, 0.0, upper, epsabs=1e-13, epsrel=1e-11, points=[0.05, 0.5])
    np.testing.assert_allclose(stokes_heat_integral(upper, x, n), numeric, rtol=1e-9, atol=1e-12)
    with pytest.raises(SingularPointError):
        stokes_heat_integral(upper, np.zeros(n), n)


def test_stokes_heat_integral_recovers_steady_tensor():
    """Test int_0^inf E ds = Gamma^S in three dimensions"""
    x = np.array([1.0, 0.5, -0.2])
    np.testing.assert_allclose(stokes_heat_integral(1e12, x, 3), gamma_stokes(x, KernelParams(n=3)), rtol=1e-5)


def test_oseen_heat_integral_quadrature_branch():
    """Test the panel quadrature against the Stokes closed form"""
    params = KernelParams(n=3)
    points = np.array([[1.0, 0.0, 0.0], [0.3, 0.4, 0.0]])
    upper = 10.0 * params.period
    panels = oseen_heat_integral(upper, points, params, omegas=[0.0])[0]
    np.testing.assert_allclose(panels.real, stokes_heat_integral(upper, points, 3), rtol=1e-8, atol=1e-12)
    closed = oseen_heat_integral(upper, points, params)
    np.testing.assert_allclose(closed, stokes_heat_integral(upper, points, 3))


@pytest.mark.parametrize("n", [2, 3])
def test_laplace_mode_coefficients_match_closed_form(n):
    """Test c^k = -G^k against the closed-form Stokes mode kernels"""
    params = KernelParams(n=n)
    x = np.array([1.2, -0.5, 0.4][:n])
    ks = [1, 2, -3]
    table = laplace_mode_coefficients(ks, x, params)
    np.testing.assert_allclose(table["coefficients"], -mode_matrices(ks, x, params), rtol=1e-7, atol=1e-10)
    assert table["quadrature_error"] < 1e-6
    with pytest.raises(DomainError):
        laplace_mode_coefficients([0], x, params)


def test_laplace_conv_matches_partial_fractions():
    """Test the time-domain conv representation for lambda = 0"""
    params = KernelParams(n=3)
    x = np.array([0.8, 0.6, 0.0])
    for k in (1, -2):
        expected = conv_laplace_mode(k, x, params, "partial_fractions")
        assert laplace_conv(k, x, params) == pytest.approx(expected, rel=1e-8)


def test_periodized_gamma_perp_time_mean_vanishes():
    """Test that the periodized kernel has zero mean over a period"""
    params = KernelParams(n=3, lam=0.5)
    x = np.array([1.0, 0.5, 0.0])
    nodes, weights = np.polynomial.legendre.leggauss(40)
    times = 0.5 * params.period * (nodes + 1.0)
    values = periodized_gamma_perp(times[:, None], x[None], params)
    mean = np.tensordot(weights, values, axes=(0, 0)) / 2.0
    assert np.max(np.abs(mean)) < 1e-5


def test_periodized_gamma_perp_jump_midpoint():
    """Test that t = 0 returns the midpoint of the one-sided limits"""
    params = KernelParams(n=3)
    x = np.array([1.0, 0.0, 0.0])
    at_zero = periodized_gamma_perp(0.0, x, params)
    left = periodized_gamma_perp(params.period - 1e-7, x, params)
    right = periodized_gamma_perp(1e-7, x, params)
    np.testing.assert_allclose(at_zero, 0.5 * (left + right), atol=2e-6)
    np.testing.assert_allclose(periodized_gamma_perp(params.period + 0.3, x, params),
                               periodized_gamma_perp(0.3, x, params))
