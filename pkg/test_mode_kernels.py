#!/usr/bin/env python3
"""
Tests for the per-mode Helmholtz kernels, the conv evaluators and G^k.
"""

import numpy as np
import pytest

from finite_differences import central_gradient, laplacian
from kernel_errors import DomainError, MethodUnavailableError
from mode_kernels import (
    alpha,
    conv_laplace_mode,
    gamma_helmholtz,
    gamma_mode,
    grid_plan,
    helmholtz_hessian,
    mode_kernel,
    mode_matrices,
    spectral_gap,
    spectral_gap_closed_form,
    truncated_laplace_symbol,
)
from steady_kernels import KernelParams, gamma_laplace, laplace_hessian


def test_alpha_root_in_upper_half_plane():
    """Test alpha(k) and its square root for both signs of k"""
    params = KernelParams(n=3, lam=1.0, period=2.0 * np.pi)
    for k in (1, -1, 5):
        a = alpha(k, params)
        assert a.value == pytest.approx(complex(0.25, k))
        assert a.root ** 2 == pytest.approx(-a.value)
        assert a.root.imag > 0


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0, 3.0])
def test_spectral_gap_negative_and_closed_form(lam):
    """Test g(k) < 0 and the stable closed formula"""
    params = KernelParams(n=2, lam=lam, period=1.0)
    for k in (1, -2, 17, 5000):
        gap = spectral_gap(k, params)
        assert gap < 0
        assert spectral_gap_closed_form(k, params) == pytest.approx(gap, rel=1e-10)
    with pytest.raises(DomainError):
        spectral_gap(0, params)


def test_spectral_gap_large_k_asymptotics():
    """Test g(k) ~ -sqrt(pi |k| / T) for large |k|"""
    params = KernelParams(n=3, lam=1.0, period=2.0)
    k = 10 ** 8
    assert spectral_gap_closed_form(k, params) / np.sqrt(np.pi * k / params.period) == pytest.approx(-1.0, rel=1e-3)


def test_gamma_helmholtz_three_dimensional_closed_form():
    """Test Gamma^alpha_H = exp(i kappa r) / (4 pi r) for n = 3"""
    params = KernelParams(n=3)
    a = alpha(2, params)
    x = np.array([0.4, 1.0, -0.3])
    r = np.linalg.norm(x)
    expected = np.exp(1j * a.root * r) / (4.0 * np.pi * r)
    assert gamma_helmholtz(a, x, params) == pytest.approx(expected, rel=1e-12)


def test_gamma_helmholtz_rejects_real_nonpositive_alpha():
    """Test that alpha on the nonpositive real axis is refused"""
    params = KernelParams(n=2)
    with pytest.raises(DomainError):
        gamma_helmholtz(-1.0 + 0j, np.array([1.0, 0.0]), params)
    with pytest.raises(DomainError):
        gamma_helmholtz(0j, np.array([1.0, 0.0]), params)
    with pytest.raises(DomainError):
        gamma_mode(0, np.array([1.0, 0.0]), params)


@pytest.mark.parametrize("n", [2, 3])
def test_helmholtz_hessian_matches_finite_differences(n):
    """Test the Hessian of Gamma^alpha_H"""
    params = KernelParams(n=n)
    a = alpha(1, params)
    x = np.array([0.9, -0.4, 0.6][:n])
    numeric = central_gradient(lambda p: central_gradient(lambda q: gamma_helmholtz(a, q, params), p, 1e-3),
                               x, 1e-3)
    np.testing.assert_allclose(helmholtz_hessian(a, x, params), numeric, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("n,lam", [(2, 0.0), (2, 1.0), (3, 0.7)])
def test_gamma_mode_solves_mode_equation(n, lam):
    """Test (-Laplace + lam d_1 + i beta k) Gamma^{k,lam}_H = 0 off the origin"""
    params = KernelParams(n=n, lam=lam)
    k = 2
    x = np.array([0.7, 0.5, -0.2][:n])
    h = 5e-3

    def kernel(p):
        return gamma_mode(k, p, params)

    residual = -laplacian(kernel, x, h) + lam * central_gradient(kernel, x, h)[0] \
        + 1j * params.beta * k * kernel(x)
    assert abs(residual) < 1e-5 * abs(kernel(x))


def test_conv_methods_agree_for_stokes():
    """Test partial fractions against the grid and quadrature conv"""
    params = KernelParams(n=3)
    x = np.array([1.5, 0.5, -1.0])
    for k in (1, -3):
        exact = conv_laplace_mode(k, x, params, "partial_fractions")
        assert conv_laplace_mode(k, x, params, "quadrature") == pytest.approx(exact, rel=1e-8)

    params = KernelParams(n=2)
    x = np.array([1.5, -1.0])
    for k in (1, -3):
        exact = conv_laplace_mode(k, x, params, "partial_fractions")
        grid, metadata = conv_laplace_mode(k, x, params, "grid_fft", return_metadata=True)
        assert grid == pytest.approx(exact, rel=1e-3)
        assert metadata["method"] == "grid_fft"
        assert metadata["points_per_axis"] % 2 == 0


def test_conv_method_errors():
    """Test the unavailable and unknown conv methods"""
    x = np.array([1.0, 0.0])
    with pytest.raises(MethodUnavailableError):
        conv_laplace_mode(1, x, KernelParams(n=2, lam=1.0), "partial_fractions")
    with pytest.raises(MethodUnavailableError):
        conv_laplace_mode(1, x, KernelParams(n=2), "spline")
    with pytest.raises(DomainError):
        conv_laplace_mode(0, x, KernelParams(n=2))


@pytest.mark.slow
def test_oseen_conv_satisfies_mode_equation():
    """Test (-Laplace + lam d_1 + i beta k) conv = Gamma_L for lambda != 0"""
    params = KernelParams(n=2, lam=1.0)
    k = 1
    x = np.array([1.5, 1.2])
    h = 5e-2

    def conv(p):
        return conv_laplace_mode(k, p, params, "quadrature")

    applied = -laplacian(conv, x, h) + params.lam * central_gradient(conv, x, h)[0] \
        + 1j * params.beta * k * conv(x)
    assert abs(applied - gamma_laplace(x, params)) < 1e-4 * abs(gamma_laplace(x, params))


def test_truncated_laplace_symbol():
    """Test the truncated symbol against its elementary form and at rho = 0"""
    rho = np.array([0.0, 0.01, 0.3, 2.0, 7.5])
    radius = 5.0
    expected = np.where(rho > 0, (1.0 - np.cos(rho * radius)) / np.where(rho > 0, rho, 1.0) ** 2,
                        radius ** 2 / 2.0)
    np.testing.assert_allclose(truncated_laplace_symbol(rho, radius, 3), expected, rtol=1e-6)
    two_d = truncated_laplace_symbol(np.array([0.0, 1e-3]), radius, 2)
    assert two_d[1] == pytest.approx(two_d[0], rel=1e-4)


def test_grid_plan_resolves_the_mode():
    """Test that the grid box holds the truncation ball"""
    params = KernelParams(n=3)
    plan = grid_plan(2, params, r_max=4.0)
    assert plan.box_edge > 2.0 * plan.truncation_radius
    assert plan.points_per_axis % 2 == 0
    assert plan.max_wavenumber >= 4.0 * np.sqrt(params.beta * 2) or plan.capped


@pytest.mark.parametrize("n", [2, 3])
def test_mode_kernel_backends_agree(n):
    """Test closed_form, quadrature and finite_difference backends for lambda = 0"""
    params = KernelParams(n=n)
    x = np.array([1.1, -0.6, 0.4][:n])
    closed = mode_kernel(1, x, params, backend="closed_form")
    assert closed.backend == "closed_form"
    assert mode_kernel(1, x, params).backend == "closed_form"
    quadrature = mode_kernel(1, x, params, backend="quadrature")
    np.testing.assert_allclose(quadrature.g, closed.g, rtol=1e-6, atol=1e-9)
    differences = mode_kernel(1, x, params, backend="finite_difference")
    np.testing.assert_allclose(differences.g, closed.g, rtol=1e-4, atol=1e-6)


def test_mode_kernel_structure():
    """Test G^k = delta trace - Hessian, symmetry and divergence"""
    params = KernelParams(n=3)
    x = np.array([0.8, 0.7, -0.5])
    sample = mode_kernel(2, x, params)
    trace = np.trace(sample.second_derivs)
    np.testing.assert_allclose(sample.g, trace * np.eye(3) - sample.second_derivs)
    np.testing.assert_allclose(sample.g, sample.g.T, atol=1e-14)
    gradient = central_gradient(lambda p: mode_matrices([2], p, params)[0], x, 1e-3)
    assert np.max(np.abs(np.einsum("iij->j", gradient))) < 1e-8


def test_mode_kernel_errors():
    """Test mode 0, unknown backends and closed_form with lambda != 0"""
    x = np.array([1.0, 0.0])
    with pytest.raises(DomainError):
        mode_kernel(0, x, KernelParams(n=2))
    with pytest.raises(MethodUnavailableError):
        mode_kernel(1, x, KernelParams(n=2), backend="magic")
    with pytest.raises(MethodUnavailableError):
        mode_kernel(1, x, KernelParams(n=2, lam=1.0), backend="closed_form")


def test_mode_matrices_batch_and_far_field():
    """Test batched shapes and -i beta k G^k -> grad grad Gamma_L far away"""
    params = KernelParams(n=3)
    points = np.array([[30.0, 0.0, 0.0], [0.0, 20.0, 20.0]])
    ks = np.array([1, 2])
    values = mode_matrices(ks, points, params)
    assert values.shape == (2, 2, 3, 3)
    scaled = -1j * params.beta * ks[:, None, None, None] * values
    np.testing.assert_allclose(scaled, np.broadcast_to(laplace_hessian(points, params), scaled.shape),
                               rtol=1e-5, atol=1e-10)


def test_mode_matrices_oseen_uses_quadrature():
    """Test that lambda != 0 mode matrices equal the quadrature backend"""
    params = KernelParams(n=2, lam=0.8)
    x = np.array([1.0, 0.5])
    expected = mode_kernel(-1, x, params).g
    np.testing.assert_allclose(mode_matrices([-1], x, params)[0], expected, rtol=1e-10)


@pytest.mark.slow
def test_grid_fft_three_dimensional_accuracy():
    """Test the capped three-dimensional grid against partial fractions"""
    params = KernelParams(n=3)
    for k in (1, 4):
        for x in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 4.0, 0.0]), 2.0 * np.ones(3) / np.sqrt(3.0)):
            exact = conv_laplace_mode(k, x, params, "partial_fractions")
            grid = conv_laplace_mode(k, x, params, "grid_fft")
            assert abs(grid - exact) < 1e-3 * abs(exact)
