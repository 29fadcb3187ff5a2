#!/usr/bin/env python3
"""
Tests for the finite-difference helpers on polynomials and exponentials.
"""

import numpy as np
import pytest

from finite_differences import central_gradient, derivative, laplacian, richardson_hessian


def cubic(x):
    return x[0] ** 3 + 2.0 * x[0] * x[1] ** 2 - x[1]


def test_richardson_hessian_cubic():
    """Test the Hessian of a cubic, exact up to roundoff"""
    x = np.array([0.3, -0.7])
    expected = np.array([[6.0 * x[0], 4.0 * x[1]], [4.0 * x[1], 4.0 * x[0]]])
    np.testing.assert_allclose(richardson_hessian(cubic, x, 0.1), expected, atol=1e-9)


def test_richardson_hessian_array_valued():
    """Test that array-valued functions keep their trailing shape"""
    def func(x):
        return np.array([np.exp(x[0] + x[1]), np.sin(x[0])])

    x = np.array([0.2, 0.1])
    hessian = richardson_hessian(func, x, 0.05)
    assert hessian.shape == (2, 2, 2)
    np.testing.assert_allclose(hessian[:, :, 0], np.full((2, 2), np.exp(0.3)), rtol=1e-8)
    assert hessian[0, 0, 1] == pytest.approx(-np.sin(0.2), rel=1e-8)
    assert hessian[1, 1, 1] == pytest.approx(0.0, abs=1e-9)


def test_central_gradient_and_laplacian():
    """Test fourth-order gradient and Laplacian of a Gaussian"""
    def gaussian(x):
        return np.exp(-np.dot(x, x))

    x = np.array([0.4, -0.2, 0.1])
    value = gaussian(x)
    np.testing.assert_allclose(central_gradient(gaussian, x, 1e-2), -2.0 * x * value, rtol=1e-7)
    expected = (4.0 * np.dot(x, x) - 6.0) * value
    assert laplacian(gaussian, x, 1e-2) == pytest.approx(expected, rel=1e-6)


def test_derivative_complex_argument():
    """Test the scalar derivative along a complex argument"""
    z = 0.5 + 1.5j
    assert derivative(np.exp, z, 1e-3) == pytest.approx(np.exp(z), rel=1e-10)
