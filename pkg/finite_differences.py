"""
Central finite-difference helpers with Richardson extrapolation.

Used for second derivatives of numerically defined kernels and for the
residual checks of the verification suite. The callables take a point of
shape (n,) and may return arrays of any shape.
"""

from typing import Callable

import numpy as np


def _hessian_once(func: Callable, x: np.ndarray, h: float) -> np.ndarray:
    n = x.size
    eye = np.eye(n)
    center = np.asarray(func(x))
    out = np.empty((n, n) + center.shape, dtype=np.result_type(center, float))
    for j in range(n):
        plus = np.asarray(func(x + h * eye[j]))
        minus = np.asarray(func(x - h * eye[j]))
        out[j, j] = (plus - 2.0 * center + minus) / h ** 2
        for l in range(j + 1, n):
            pp = np.asarray(func(x + h * (eye[j] + eye[l])))
            pm = np.asarray(func(x + h * (eye[j] - eye[l])))
            mp = np.asarray(func(x - h * (eye[j] - eye[l])))
            mm = np.asarray(func(x - h * (eye[j] + eye[l])))
            out[j, l] = out[l, j] = (pp - pm - mp + mm) / (4.0 * h ** 2)
    return out


def richardson_hessian(func: Callable, x, h: float, levels: int = 2) -> np.ndarray:
    """Hessian[j, l, ...] of func at x, central differences, Richardson over h, h/2, ..."""
    x = np.asarray(x, dtype=float)
    tables = [_hessian_once(func, x, h / 2 ** level) for level in range(levels)]
    # error expansion in h^2, h^4, ...
    for order in range(1, levels):
        factor = 4.0 ** order
        tables = [(factor * fine - coarse) / (factor - 1.0) for coarse, fine in zip(tables, tables[1:])]
    return tables[0]


def central_gradient(func: Callable, x, h: float) -> np.ndarray:
    """Fourth-order central gradient[j, ...]."""
    x = np.asarray(x, dtype=float)
    eye = np.eye(x.size)
    rows = []
    for j in range(x.size):
        step = h * eye[j]
        rows.append(
            (-np.asarray(func(x + 2 * step)) + 8 * np.asarray(func(x + step))
             - 8 * np.asarray(func(x - step)) + np.asarray(func(x - 2 * step))) / (12.0 * h)
        )
    return np.stack(rows)


def laplacian(func: Callable, x, h: float) -> np.ndarray:
    """Fourth-order central Laplacian."""
    x = np.asarray(x, dtype=float)
    eye = np.eye(x.size)
    center = np.asarray(func(x))
    total = np.zeros_like(center, dtype=np.result_type(center, float))
    for j in range(x.size):
        step = h * eye[j]
        total = total + (
            -np.asarray(func(x + 2 * step)) + 16 * np.asarray(func(x + step)) - 30 * center
            + 16 * np.asarray(func(x - step)) - np.asarray(func(x - 2 * step))
        ) / (12.0 * h ** 2)
    return total


def derivative(func: Callable, z, h: float):
    """Fourth-order central derivative of a scalar function of one (complex) variable."""
    return (-func(z + 2 * h) + 8 * func(z + h) - 8 * func(z - h) + func(z - 2 * h)) / (12.0 * h)
