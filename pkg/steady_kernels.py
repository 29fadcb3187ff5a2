"""
Steady fundamental solutions of the Laplace, Stokes and Oseen systems.

All evaluators accept a single point of shape (n,) or a stack of points
of shape (..., n) and broadcast over the leading axes.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate, special

from kernel_errors import DomainError, SingularPointError
from special_functions import HalfIntegerOrder, bessel_k

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelParams:
    """
    Fixes every kernel formula.

    Attributes:
        n: spatial dimension (>= 2)
        lam: Oseen parameter; 0 selects the Stokes system
        period: time period T > 0
    """

    n: int = 3
    lam: float = 0.0
    period: float = 2.0 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n}")
        if not np.isfinite(self.lam):
            raise DomainError("lambda must be finite")
        if not self.period > 0:
            raise DomainError(f"period must be positive, got {self.period}")

    @property
    def beta(self) -> float:
        """Base angular frequency 2*pi/T."""
        return 2.0 * np.pi / self.period

    @property
    def order(self) -> HalfIntegerOrder:
        return HalfIntegerOrder.for_dimension(self.n)

    @property
    def sphere_area(self) -> float:
        return unit_sphere_area(self.n)

    @property
    def is_stokes(self) -> bool:
        return self.lam == 0.0


def unit_sphere_area(n: int) -> float:
    """omega_n = 2 pi^{n/2} / Gamma(n/2), the area of the unit sphere in R^n."""
    if n < 2:
        raise DomainError(f"dimension must be >= 2, got {n}")
    return 2.0 * np.pi ** (n / 2.0) / special.gamma(n / 2.0)


def as_points(x, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Validate points and return (points with shape (..., n), radii)."""
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1:] != (n,):
        raise DomainError(f"points must have trailing dimension {n}, got shape {pts.shape}")
    r = np.asarray(np.linalg.norm(pts, axis=-1))
    if np.any(r == 0):
        raise SingularPointError("kernel evaluated at the origin")
    return pts, r


def radial_hessian(pts: np.ndarray, r: np.ndarray, d1_over_r, d2) -> np.ndarray:
    """
    Hessian of a radial profile f(|x|) given f'(r)/r and f''(r).

    d_j d_l f = (f'/r) delta_jl + (f'' - f'/r) x_j x_l / r^2
    """
    n = pts.shape[-1]
    unit = pts / r[..., None]
    outer = unit[..., :, None] * unit[..., None, :]
    d1_over_r = np.asarray(d1_over_r)
    d2 = np.asarray(d2)
    return d1_over_r[..., None, None] * np.eye(n) + (d2 - d1_over_r)[..., None, None] * outer


def gamma_laplace(x, params: KernelParams) -> np.ndarray:
    """Fundamental solution of -Laplace: -(1/2pi) log|x| (n=2), |x|^{2-n}/((n-2) omega_n)."""
    _, r = as_points(x, params.n)
    if params.n == 2:
        return -np.log(r) / (2.0 * np.pi)
    return r ** (2 - params.n) / ((params.n - 2) * params.sphere_area)


def laplace_gradient(x, params: KernelParams) -> np.ndarray:
    pts, r = as_points(x, params.n)
    return -pts / (params.sphere_area * r[..., None] ** params.n)


def laplace_hessian(x, params: KernelParams) -> np.ndarray:
    """d_j d_l Gamma_L = (n x_j x_l/|x|^2 - delta_jl) / (omega_n |x|^n)."""
    pts, r = as_points(x, params.n)
    n = params.n
    unit = pts / r[..., None]
    outer = unit[..., :, None] * unit[..., None, :]
    return (n * outer - np.eye(n)) / (params.sphere_area * r[..., None, None] ** n)


def laplace_third_derivative(x, params: KernelParams) -> np.ndarray:
    """T[..., m, j, l] = d_m d_j d_l Gamma_L."""
    pts, r = as_points(x, params.n)
    n = params.n
    eye = np.eye(n)
    rr = r[..., None, None, None]
    xm = pts[..., :, None, None]
    xj = pts[..., None, :, None]
    xl = pts[..., None, None, :]
    first = n * (eye[:, :, None] * xl + eye[:, None, :] * xj) * rr ** (-n - 2)
    second = -n * (n + 2) * xm * xj * xl * rr ** (-n - 4)
    third = n * eye[None, :, :] * xm * rr ** (-n - 2)
    return (first + second + third) / params.sphere_area


def gamma_stokes(x, params: KernelParams) -> np.ndarray:
    """Steady Stokes tensor Gamma^S_ij, symmetric."""
    pts, r = as_points(x, params.n)
    n = params.n
    outer = pts[..., :, None] * pts[..., None, :] / r[..., None, None] ** n
    if n == 2:
        diag = np.log(1.0 / r)
    else:
        diag = r ** (2 - n) / (n - 2)
    return (diag[..., None, None] * np.eye(n) + outer) / (2.0 * params.sphere_area)


def pressure_kernel(x, params: KernelParams) -> np.ndarray:
    """gamma_i = x_i / (omega_n |x|^n)."""
    pts, r = as_points(x, params.n)
    return pts / (params.sphere_area * r[..., None] ** params.n)


def screened_profile(r: np.ndarray, mu: float, params: KernelParams):
    """
    Radial profile of the fundamental solution of -Laplace + mu^2.

    Returns (f, f'/r, f'') with f = (1/2pi) (mu/(2 pi r))^nu K_nu(mu r).
    """
    nu = params.order.value
    c = (mu / (2.0 * np.pi)) ** nu / (2.0 * np.pi)
    z = mu * r
    k0 = bessel_k(nu, z)
    k1 = bessel_k(nu + 1.0, z)
    k2 = bessel_k(nu + 2.0, z)
    f = c * r ** (-nu) * k0
    d1_over_r = -c * mu * r ** (-nu - 1.0) * k1
    d2 = d1_over_r + c * mu * mu * r ** (-nu) * k2
    return np.asarray(f), np.asarray(d1_over_r), np.asarray(d2)


def psi_oseen(x, params: KernelParams) -> np.ndarray:
    """
    Psi(x) = -(1/2pi) (lam/(4 pi |x|))^{(n-2)/2} K_{(n-2)/2}(lam |x|/2) exp(-lam x_1/2).

    Negative lam is handled by the reflection x_1 -> -x_1 of the |lam| kernel,
    which amounts to |lam| inside the Bessel factor.
    """
    if params.lam == 0.0:
        raise DomainError("psi_oseen requires lambda != 0")
    pts, r = as_points(x, params.n)
    mu = abs(params.lam) / 2.0
    f, _, _ = screened_profile(r, mu, params)
    return -f * np.exp(-params.lam * pts[..., 0] / 2.0)


def oseen_scalar_kernel(x, params: KernelParams):
    """
    Fundamental solution Y of -Laplace + lam d_1 with its gradient and Hessian.

    Y(x) = exp(lam x_1/2) Y_mu(|x|) with mu = |lam|/2, i.e. Y(x) = -Psi(-x_1, x').
    """
    pts, r = as_points(x, params.n)
    n = params.n
    mu = abs(params.lam) / 2.0
    half = params.lam / 2.0
    f, d1_over_r, d2 = screened_profile(r, mu, params)
    envelope = np.asarray(np.exp(half * pts[..., 0]))
    grad_radial = d1_over_r[..., None] * pts
    hess_radial = radial_hessian(pts, r, d1_over_r, d2)

    e1 = np.zeros(n)
    e1[0] = 1.0
    value = envelope * f
    grad = envelope[..., None] * (grad_radial + half * f[..., None] * e1)
    cross = grad_radial[..., :, None] * e1[None, :] + e1[:, None] * grad_radial[..., None, :]
    hess = envelope[..., None, None] * (
        hess_radial + half * cross + half * half * f[..., None, None] * np.outer(e1, e1)
    )
    return value, grad, hess


def _difference_hessian(points: np.ndarray, params: KernelParams) -> np.ndarray:
    """Hessian of Gamma_L - Y along a batch of points."""
    _, _, hess_y = oseen_scalar_kernel(points, params)
    return laplace_hessian(points, params) - hess_y


def _transverse_block(x: np.ndarray, params: KernelParams, epsabs: float) -> np.ndarray:
    """d_i d_j Phi for i, j >= 2, integrated from the far end of the x_1-line."""
    n = params.n
    lam = params.lam
    transverse = x[1:]

    def integrand(y1):
        point = np.concatenate(([y1], transverse))
        return _difference_hessian(point, params)[1:, 1:]

    if x[0] <= 0.0:
        block, err = integrate.quad_vec(integrand, -np.inf, x[0], epsabs=epsabs, epsrel=1e-10, limit=400)
        block = -block / lam
    else:
        block, err = integrate.quad_vec(integrand, x[0], np.inf, epsabs=epsabs, epsrel=1e-10, limit=400)
        block = block / lam
    logger.debug("Oseen transverse block at %s: quadrature error %.2e", x, err)
    return block.reshape(n - 1, n - 1)


def gamma_oseen(x, params: KernelParams, epsabs: float = 1e-12) -> np.ndarray:
    """
    Steady Oseen tensor for -Laplace u + lam d_1 u + grad p = f.

    Gamma^O = delta Y - d d Phi with d_1 Phi = -(Gamma_L - Y)/lam in closed
    form; the transverse block d_i d_j Phi (i, j >= 2) is the x_1-antiderivative
    of d_i d_j (Gamma_L - Y), taken from the end of the line that avoids the
    origin.
    """
    if params.lam == 0.0:
        raise DomainError("gamma_oseen requires lambda != 0; use gamma_stokes")
    pts, _ = as_points(x, params.n)
    n = params.n
    flat = pts.reshape(-1, n)
    out = np.empty((flat.shape[0], n, n))

    value_y, grad_y, _ = oseen_scalar_kernel(flat, params)
    grad_g = laplace_gradient(flat, params) - grad_y
    for idx, point in enumerate(flat):
        phi_hess = np.empty((n, n))
        phi_hess[0, :] = -grad_g[idx] / params.lam
        phi_hess[:, 0] = phi_hess[0, :]
        phi_hess[1:, 1:] = _transverse_block(point, params, epsabs)
        out[idx] = value_y[idx] * np.eye(n) - phi_hess
    return out.reshape(pts.shape[:-1] + (n, n))


def steady_velocity_kernel(x, params: KernelParams) -> np.ndarray:
    """Gamma^S for lam = 0, Gamma^O otherwise."""
    if params.is_stokes:
        return gamma_stokes(x, params)
    return gamma_oseen(x, params)
