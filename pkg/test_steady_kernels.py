#!/usr/bin/env python3
"""
Tests for the steady Laplace, Stokes and Oseen kernels.
"""

import numpy as np
import pytest

from finite_differences import central_gradient, laplacian
from kernel_errors import DomainError, SingularPointError
from steady_kernels import (
    KernelParams,
    gamma_laplace,
    gamma_oseen,
    gamma_stokes,
    laplace_gradient,
    laplace_hessian,
    laplace_third_derivative,
    oseen_scalar_kernel,
    pressure_kernel,
    psi_oseen,
    steady_velocity_kernel,
    unit_sphere_area,
)


def test_kernel_params_validation():
    """Test the parameter record and its derived quantities"""
    params = KernelParams(n=3, lam=0.0, period=2.0)
    assert params.beta == pytest.approx(np.pi)
    assert params.is_stokes
    assert params.order.value == 0.5
    assert unit_sphere_area(2) == pytest.approx(2.0 * np.pi)
    assert unit_sphere_area(3) == pytest.approx(4.0 * np.pi)
    with pytest.raises(DomainError):
        KernelParams(n=1)
    with pytest.raises(DomainError):
        KernelParams(period=0.0)
    with pytest.raises(DomainError):
        KernelParams(lam=float("inf"))


def test_gamma_laplace_values():
    """Test the Laplace kernel in two and three dimensions"""
    assert gamma_laplace(np.array([2.0, 0.0]), KernelParams(n=2)) == pytest.approx(-np.log(2.0) / (2.0 * np.pi))
    assert gamma_laplace(np.array([0.0, 2.0, 0.0]), KernelParams(n=3)) == pytest.approx(1.0 / (8.0 * np.pi))
    with pytest.raises(SingularPointError):
        gamma_laplace(np.zeros(3), KernelParams(n=3))
    with pytest.raises(DomainError):
        gamma_laplace(np.ones(2), KernelParams(n=3))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_laplace_derivatives_match_finite_differences(n):
    """Test gradient, Hessian and third derivative of Gamma_L"""
    params = KernelParams(n=n)
    x = np.linspace(0.6, 1.2, n)
    h = 1e-3
    np.testing.assert_allclose(laplace_gradient(x, params),
                               central_gradient(lambda p: gamma_laplace(p, params), x, h), rtol=1e-8)
    np.testing.assert_allclose(laplace_hessian(x, params),
                               central_gradient(lambda p: laplace_gradient(p, params), x, h), atol=1e-9)
    np.testing.assert_allclose(laplace_third_derivative(x, params),
                               central_gradient(lambda p: laplace_hessian(p, params), x, h), atol=1e-8)
    assert np.trace(laplace_hessian(x, params)) == pytest.approx(0.0, abs=1e-12)


def test_gamma_stokes_reference_values():
    """Test the Stokes tensor at e_1 in three dimensions"""
    params = KernelParams(n=3)
    tensor = gamma_stokes(np.array([1.0, 0.0, 0.0]), params)
    expected = np.diag([2.0, 1.0, 1.0]) / (8.0 * np.pi)
    np.testing.assert_allclose(tensor, expected, rtol=1e-14)
    np.testing.assert_allclose(pressure_kernel(np.array([1.0, 0.0, 0.0]), params),
                               [1.0 / (4.0 * np.pi), 0.0, 0.0], atol=1e-15)


def test_gamma_stokes_batch_shape():
    """Test that stacks of points broadcast"""
    params = KernelParams(n=2)
    points = np.random.default_rng(3).uniform(0.5, 2.0, size=(4, 5, 2))
    values = gamma_stokes(points, params)
    assert values.shape == (4, 5, 2, 2)
    np.testing.assert_allclose(values, np.swapaxes(values, -1, -2))
    np.testing.assert_allclose(values[1, 2], gamma_stokes(points[1, 2], params))


@pytest.mark.parametrize("n", [2, 3])
def test_gamma_stokes_solves_stokes_system(n):
    """Test -Laplace Gamma + grad gamma = 0 and div Gamma = 0 off the origin"""
    params = KernelParams(n=n)
    x = np.array([0.8, -0.5, 0.3][:n])
    h = 1e-2
    gradient = central_gradient(lambda p: gamma_stokes(p, params), x, h)
    divergence = np.einsum("iij->j", gradient)
    residual = -laplacian(lambda p: gamma_stokes(p, params), x, h) \
        + central_gradient(lambda p: pressure_kernel(p, params), x, h)
    assert np.max(np.abs(divergence)) < 1e-6
    assert np.max(np.abs(residual)) < 1e-5


@pytest.mark.parametrize("n", [2, 3])
def test_oseen_scalar_kernel(n):
    """Test -Laplace Y + lam d_1 Y = 0 and the reflection Y(x) = -Psi(-x_1, x')"""
    params = KernelParams(n=n, lam=1.5)
    x = np.array([0.7, 0.4, -0.2][:n])
    value, grad, hess = oseen_scalar_kernel(x, params)
    h = 1e-3
    np.testing.assert_allclose(grad, central_gradient(lambda p: oseen_scalar_kernel(p, params)[0], x, h),
                               rtol=1e-7)
    np.testing.assert_allclose(hess, central_gradient(lambda p: oseen_scalar_kernel(p, params)[1], x, h),
                               rtol=1e-6, atol=1e-9)
    assert -np.trace(hess) + params.lam * grad[0] == pytest.approx(0.0, abs=1e-10)
    mirrored = x * np.r_[-1.0, np.ones(n - 1)]
    assert value == pytest.approx(-psi_oseen(mirrored, params), rel=1e-12)


def test_psi_oseen_requires_lambda():
    """Test that Psi is undefined for the Stokes system"""
    with pytest.raises(DomainError):
        psi_oseen(np.array([1.0, 0.0, 0.0]), KernelParams(n=3))
    with pytest.raises(DomainError):
        gamma_oseen(np.array([1.0, 0.0, 0.0]), KernelParams(n=3))


def test_psi_oseen_negative_lambda_reflection():
    """Test that a negative lambda mirrors the kernel in x_1"""
    x = np.array([1.2, 0.3, -0.4])
    mirrored = x * np.array([-1.0, 1.0, 1.0])
    assert psi_oseen(x, KernelParams(n=3, lam=-0.8)) == pytest.approx(
        psi_oseen(mirrored, KernelParams(n=3, lam=0.8)), rel=1e-13)


def test_gamma_oseen_stokes_limit():
    """Test Gamma^O -> Gamma^S as lambda -> 0 in three dimensions"""
    x = np.array([2.0, 1.0, 0.0])
    stokes = gamma_stokes(x, KernelParams(n=3))
    oseen = gamma_oseen(x, KernelParams(n=3, lam=1e-6))
    assert np.max(np.abs(oseen - stokes)) < 1e-3


@pytest.mark.slow
def test_gamma_oseen_solves_oseen_system():
    """Test (-Laplace + lam d_1) Gamma^O + grad gamma = 0 and div Gamma^O = 0"""
    params = KernelParams(n=3, lam=1.0)
    x = np.array([2.0, 1.0, 0.0])
    h = 1e-2
    gradient = central_gradient(lambda p: gamma_oseen(p, params), x, h)
    residual = -laplacian(lambda p: gamma_oseen(p, params), x, h) + params.lam * gradient[0] \
        + central_gradient(lambda p: pressure_kernel(p, params), x, h)
    assert np.max(np.abs(np.einsum("iij->j", gradient))) < 1e-4
    assert np.max(np.abs(residual)) < 1e-4


def test_gamma_oseen_wake():
    """Test that the Oseen tensor is larger downstream than upstream"""
    params = KernelParams(n=3, lam=1.0)
    downstream = np.abs(gamma_oseen(np.array([8.0, 0.5, 0.0]), params)).max()
    upstream = np.abs(gamma_oseen(np.array([-8.0, 0.5, 0.0]), params)).max()
    assert upstream < 0.5 * downstream


def test_steady_velocity_kernel_dispatch():
    """Test that the steady kernel picks Stokes or Oseen from lambda"""
    x = np.array([1.0, 2.0])
    np.testing.assert_allclose(steady_velocity_kernel(x, KernelParams(n=2)), gamma_stokes(x, KernelParams(n=2)))
    oseen = KernelParams(n=2, lam=0.5)
    np.testing.assert_allclose(steady_velocity_kernel(x, oseen), gamma_oseen(x, oseen))


def test_gamma_oseen_on_the_flow_axis():
    """Test that points on the x_1-axis evaluate on both sides of the origin"""
    params = KernelParams(n=3, lam=1.0)
    for x in (np.array([2.0, 0.0, 0.0]), np.array([-2.0, 0.0, 0.0])):
        tensor = gamma_oseen(x, params)
        assert np.all(np.isfinite(tensor))
        np.testing.assert_allclose(tensor, tensor.T, atol=1e-12)
    with pytest.raises(SingularPointError):
        gamma_oseen(np.zeros(3), params)
