"""
Per-frequency kernels of the time-periodic problem.

For a mode k != 0 the time-Fourier coefficient of the velocity kernel is
built from the Helmholtz-type fundamental solution

    Gamma^{k,lam}_H(x) = Gamma^alpha_H(x) exp(lam x_1 / 2),
    alpha(k) = (lam/2)^2 + i (2 pi / T) k,

through the convolution conv = Gamma_L * Gamma^{k,lam}_H and the matrix
G^k = (delta Laplace - grad grad) conv.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import special

from finite_differences import richardson_hessian
from heat_kernels import laplace_conv, laplace_mode_coefficients
from kernel_errors import DomainError, MethodUnavailableError
from special_functions import hankel1, sqrt_upper
from steady_kernels import (KernelParams, as_points, gamma_laplace, laplace_hessian,
                            radial_hessian, screened_profile)

logger = logging.getLogger(__name__)

CONV_METHODS = ("partial_fractions", "grid_fft", "quadrature")
MODE_BACKENDS = ("auto", "closed_form", "quadrature", "finite_difference", "grid_fft")

# grid_fft sizing
GRID_DECAY_LENGTHS = 14.0
GRID_MIN_WAVENUMBER = 12.0
GRID_PEAK_POINTS = 8
GRID_MAX_POINTS = {2: 2048, 3: 160}
GRID_MAX_POINTS_HIGH_DIM = 24


@dataclass(frozen=True)
class Alpha:
    """alpha(k) = (lam/2)^2 + i beta k and its upper-half-plane root sqrt(-alpha)."""

    k: int
    value: complex
    root: complex


def alpha(k: int, params: KernelParams) -> Alpha:
    value = complex((params.lam / 2.0) ** 2, params.beta * k)
    # alpha vanishes only for (k, lam) = (0, 0); the root is then 0
    root = complex(sqrt_upper(-value)) if value != 0 else 0j
    return Alpha(k=int(k), value=value, root=root)


def spectral_gap(k: int, params: KernelParams) -> float:
    """g(k) = |lam|/2 - Im sqrt(-alpha(k)), negative for every k != 0."""
    if k == 0:
        raise DomainError("spectral gap is defined for k != 0 only")
    return abs(params.lam) / 2.0 - alpha(k, params).root.imag


def spectral_gap_closed_form(k: int, params: KernelParams) -> float:
    """
    Same quantity from the real closed formula

        Im sqrt(-alpha) = (|lam|/2) (1/sqrt 2) [(1 + omega^2/(lam/2)^4)^{1/2} + 1]^{1/2}

    (and sqrt(|omega|/2) for lam = 0). Stable for very large |k|.
    """
    if k == 0:
        raise DomainError("spectral gap is defined for k != 0 only")
    omega = params.beta * k
    half = abs(params.lam) / 2.0
    if half == 0.0:
        return -np.sqrt(abs(omega) / 2.0)
    ratio = omega / half ** 2
    root_imag = half / np.sqrt(2.0) * np.sqrt(np.hypot(1.0, ratio) + 1.0)
    # half - root_imag loses digits for large ratio; rewrite as a quotient
    return (half ** 2 - root_imag ** 2) / (half + root_imag)


def _root_of(a: Union[Alpha, complex]) -> Tuple[complex, complex]:
    if isinstance(a, Alpha):
        return a.value, a.root
    value = complex(a)
    if value == 0:
        raise DomainError("alpha = 0 has no Helmholtz kernel")
    return value, complex(sqrt_upper(-value))


def helmholtz_profile(root, r, params: KernelParams):
    """
    Radial profile of Gamma^alpha_H and its derivatives.

    f = (i/4) (kappa/(2 pi))^nu r^{-nu} H_nu(kappa r), kappa = sqrt(-alpha).
    Returns (f, f'/r, f''); root and r broadcast against each other.
    """
    nu = params.order.value
    kappa = np.asarray(root, dtype=complex)
    r = np.asarray(r, dtype=float)
    c = 0.25j * (kappa / (2.0 * np.pi)) ** nu
    z = kappa * r
    h0 = hankel1(nu, z)
    h1 = hankel1(nu + 1.0, z)
    h2 = hankel1(nu + 2.0, z)
    f = c * r ** (-nu) * h0
    d1_over_r = -c * kappa * r ** (-nu - 1.0) * h1
    d2 = d1_over_r + c * kappa ** 2 * r ** (-nu) * h2
    return np.asarray(f), np.asarray(d1_over_r), np.asarray(d2)


def gamma_helmholtz(a: Union[Alpha, complex], x, params: KernelParams):
    """
    Fundamental solution of -Laplace + alpha,

        Gamma^alpha_H(x) = (i/4) (sqrt(-alpha)/(2 pi |x|))^{(n-2)/2} H^(1)_{(n-2)/2}(sqrt(-alpha)|x|).

    Args:
        a: Alpha (or a complex alpha with Im != 0 or Re > 0)
        x: point(s) of shape (..., n), x != 0
        params: fixes n

    Returns:
        Complex value(s), one per point.
    """
    value, root = _root_of(a)
    if value.imag == 0 and value.real <= 0:
        raise DomainError(f"alpha = {value} lies on the nonpositive real axis")
    _, r = as_points(x, params.n)
    f, _, _ = helmholtz_profile(root, r, params)
    return f[()] if f.ndim == 0 else f


def helmholtz_hessian(a: Union[Alpha, complex], x, params: KernelParams) -> np.ndarray:
    """d_j d_l Gamma^alpha_H, shape (..., n, n)."""
    _, root = _root_of(a)
    pts, r = as_points(x, params.n)
    _, d1_over_r, d2 = helmholtz_profile(root, r, params)
    return radial_hessian(pts, r, d1_over_r, d2)


def gamma_mode(k: int, x, params: KernelParams):
    """Gamma^{k,lam}_H(x) = Gamma^alpha_H(x) exp(lam x_1 / 2)."""
    if k == 0:
        raise DomainError("mode index must be nonzero")
    pts, _ = as_points(x, params.n)
    base = gamma_helmholtz(alpha(k, params), pts, params)
    if params.lam == 0.0:
        return base
    return base * np.exp(0.5 * params.lam * pts[..., 0])


# --------------------------------------------------------------------------
# grid_fft: truncated Laplace kernel on a periodic box
# --------------------------------------------------------------------------

def truncated_laplace_symbol(rho, radius: float, n: int) -> np.ndarray:
    """
    Fourier transform of Gamma_L restricted to the ball |y| < radius.

    Smooth in rho, finite at rho = 0, and equal to 1/rho^2 up to
    oscillating terms. A periodic FFT with this symbol reproduces the
    free-space convolution at all points within the box that see the
    whole ball.
    """
    rho = np.asarray(rho, dtype=float)
    z = rho * radius
    safe = np.where(rho > 0, rho, 1.0)
    zs = np.where(rho > 0, z, 1.0)
    if n == 2:
        values = (1.0 - special.j0(zs)) / safe ** 2 - radius * np.log(radius) * special.j1(zs) / safe
        at_zero = radius ** 2 / 4.0 - radius ** 2 * np.log(radius) / 2.0
    else:
        mu = n / 2.0 - 2.0
        c = 1.0 / ((n - 2) * (2.0 * np.pi ** (n / 2.0) / special.gamma(n / 2.0)))
        bracket = 1.0 / (2.0 ** mu * special.gamma(mu + 1.0)) - zs ** (-mu) * special.jv(mu, zs)
        values = (2.0 * np.pi) ** (n / 2.0) * c * bracket / safe ** 2
        at_zero = radius ** 2 / (2.0 * (n - 2))
    return np.where(rho > 0, values, at_zero)


@dataclass(frozen=True)
class GridPlan:
    """Box and resolution used by the grid_fft backend for one mode."""

    box_edge: float
    points_per_axis: int
    truncation_radius: float
    screening: float
    capped: bool

    @property
    def spacing(self) -> float:
        return self.box_edge / self.points_per_axis

    @property
    def max_wavenumber(self) -> float:
        return np.pi / self.spacing


def grid_plan(k: int, params: KernelParams, r_max: float) -> GridPlan:
    """
    Size the box and grid for a mode.

    The convolution is wanted for |x| <= r_max. The mode kernel decays like
    exp(g(k)|x|), so it is cut at D = GRID_DECAY_LENGTHS/|g(k)|; the Laplace
    kernel is truncated at R = r_max + D and the box edge must exceed 2R.
    The resolvent peak of width sqrt(|omega|) gets GRID_PEAK_POINTS samples.
    """
    decay = -spectral_gap(k, params)
    omega = abs(params.beta * k)
    radius = r_max + GRID_DECAY_LENGTHS / decay
    box = max(2.1 * radius, 2.0 * np.pi * GRID_PEAK_POINTS / np.sqrt(omega))
    k_max = max(GRID_MIN_WAVENUMBER, 4.0 * np.sqrt(omega), 2.0 * abs(params.lam))
    points = 2 * int(np.ceil(k_max * box / (2.0 * np.pi)))
    cap = GRID_MAX_POINTS.get(params.n, GRID_MAX_POINTS_HIGH_DIM)
    capped = points > cap
    if capped:
        logger.warning("grid_fft: %d points per axis requested for k=%d, capped at %d",
                       points, k, cap)
        points = cap
    return GridPlan(box_edge=float(box), points_per_axis=points, truncation_radius=float(radius),
                    screening=float(max(decay, 1.0)), capped=capped)


@lru_cache(maxsize=4)
def _grid_symbol(k: int, params: KernelParams, plan: GridPlan) -> Tuple[np.ndarray, np.ndarray]:
    """
    Remainder symbol G_R(xi) (R(xi) - S(xi)) on the FFT wavenumber grid.

    R = 1/(|xi|^2 + i omega + i lam xi_1) is the mode resolvent and
    S = 1/(|xi|^2 + a^2) a screened Laplacian whose convolution with Gamma_L
    is known in closed form. The difference decays fast enough for the
    truncated grid.
    """
    n = params.n
    wavenumbers = 2.0 * np.pi * np.fft.fftfreq(plan.points_per_axis, d=plan.spacing)
    axes = np.meshgrid(*([wavenumbers] * n), indexing="ij", sparse=True)
    rho_sq = sum(axis ** 2 for axis in axes)
    resolvent = 1.0 / (rho_sq + 1j * (params.beta * k + params.lam * axes[0]))
    screened = 1.0 / (rho_sq + plan.screening ** 2)
    symbol = truncated_laplace_symbol(np.sqrt(rho_sq), plan.truncation_radius, n) * (resolvent - screened)
    logger.debug("grid_fft symbol for k=%d: %d^%d points, box %.2f", k, plan.points_per_axis, n, plan.box_edge)
    return symbol, wavenumbers


def _trig_sum(symbol: np.ndarray, wavenumbers: np.ndarray, x: np.ndarray, derivs: Tuple[int, ...] = ()) -> complex:
    """(1/L^n) sum_xi symbol(xi) prod_d (i xi_d)^{m_d} exp(i xi . x), contracted axis by axis."""
    n = x.size
    box = 2.0 * np.pi / abs(wavenumbers[1])
    values = symbol
    for d in range(n):
        phase = np.exp(1j * wavenumbers * x[d])
        for _ in range(derivs.count(d)):
            phase = phase * 1j * wavenumbers
        values = np.tensordot(phase, values, axes=([0], [0]))
    return complex(values) / box ** n


def _grid_fft(k: int, x: np.ndarray, params: KernelParams, with_hessian: bool):
    r = float(np.linalg.norm(x))
    plan = grid_plan(k, params, r_max=max(4.0, float(np.ceil(r))))
    symbol, wavenumbers = _grid_symbol(k, params, plan)
    a = plan.screening
    # closed-form part: Gamma_L * Y_a = (Gamma_L - Y_a) / a^2
    yukawa, d1_over_r, d2 = screened_profile(np.asarray(r), a, params)
    value = (gamma_laplace(x, params) - yukawa) / a ** 2 + _trig_sum(symbol, wavenumbers, x)

    on_node = bool(np.all(np.abs(x / plan.spacing - np.round(x / plan.spacing)) < 1e-9))
    metadata = {
        "method": "grid_fft",
        "box_edge": plan.box_edge,
        "points_per_axis": plan.points_per_axis,
        "truncation_radius": plan.truncation_radius,
        "capped": plan.capped,
        "evaluation": "node" if on_node else "trigonometric_interpolation",
    }
    if not on_node:
        logger.debug("grid_fft: x=%s is off the grid nodes, using trigonometric interpolation", x)
    if not with_hessian:
        return value, None, metadata

    n = params.n
    hessian = (laplace_hessian(x, params) - radial_hessian(x, np.asarray(r), d1_over_r, d2)) / a ** 2
    hessian = hessian.astype(complex)
    for j in range(n):
        for l in range(j, n):
            hessian[j, l] += _trig_sum(symbol, wavenumbers, x, (j, l))
            hessian[l, j] = hessian[j, l]
    return value, hessian, metadata


def conv_laplace_mode(k: int, x, params: KernelParams, method: str = "partial_fractions",
                      return_metadata: bool = False):
    """
    (Gamma_L * Gamma^{k,lam}_H)(x) at a single point.

    Args:
        k: mode index, k != 0
        x: point of shape (n,), x != 0
        params: kernel parameters
        method: 'partial_fractions' (exact, lam = 0 only), 'grid_fft'
            (truncated-kernel FFT, relative accuracy about 1e-4 for lam = 0)
            or 'quadrature' (time-domain representation, about 1e-8)
        return_metadata: also return a dict describing the evaluation

    Returns:
        Complex value, or (value, metadata) when return_metadata is set.
    """
    if k == 0:
        raise DomainError("mode index must be nonzero")
    if method not in CONV_METHODS:
        raise MethodUnavailableError(f"unknown conv method {method!r}; choose from {CONV_METHODS}")
    pts, _ = as_points(x, params.n)
    if pts.ndim != 1:
        raise DomainError("conv_laplace_mode takes a single point of shape (n,)")

    if method == "partial_fractions":
        if params.lam != 0.0:
            raise MethodUnavailableError("partial_fractions requires lambda = 0")
        value = complex((gamma_laplace(pts, params) - gamma_helmholtz(alpha(k, params), pts, params))
                        / (1j * params.beta * k))
        metadata = {"method": method}
    elif method == "grid_fft":
        value, _, metadata = _grid_fft(k, pts, params, with_hessian=False)
    else:
        value = laplace_conv(k, pts, params)
        metadata = {"method": method}
    return (value, metadata) if return_metadata else value


@dataclass
class ModeKernelSample:
    """conv, its Hessian and G^k = delta trace - Hessian at one point for one mode."""

    k: int
    x: np.ndarray
    conv: complex
    second_derivs: np.ndarray
    g: np.ndarray
    backend: str
    metadata: Dict = field(default_factory=dict)

    @staticmethod
    def assemble(second_derivs: np.ndarray) -> np.ndarray:
        n = second_derivs.shape[-1]
        trace = np.trace(second_derivs, axis1=-2, axis2=-1)
        return trace[..., None, None] * np.eye(n) - second_derivs


def _closed_form_second_derivs(k: int, pts: np.ndarray, params: KernelParams) -> np.ndarray:
    return (laplace_hessian(pts, params) - helmholtz_hessian(alpha(k, params), pts, params)) / (1j * params.beta * k)


def mode_kernel(k: int, x, params: KernelParams, backend: str = "auto",
                conv_method: Optional[str] = None, fd_step: Optional[float] = None) -> ModeKernelSample:
    """
    G^k(x) = (delta_jl Laplace - d_j d_l)(Gamma_L * Gamma^{k,lam}_H)(x).

    Backends:
        closed_form: Hessians of Gamma_L and Gamma^alpha_H (lam = 0)
        quadrature: time-Fourier coefficients of the heat representation
        finite_difference: Richardson central differences of conv_laplace_mode
        grid_fft: spectral differentiation on the truncated-kernel grid
        auto: closed_form for lam = 0, quadrature otherwise
    """
    if k == 0:
        raise DomainError("mode index must be nonzero")
    if backend not in MODE_BACKENDS:
        raise MethodUnavailableError(f"unknown backend {backend!r}; choose from {MODE_BACKENDS}")
    pts, r = as_points(x, params.n)
    if pts.ndim != 1:
        raise DomainError("mode_kernel takes a single point of shape (n,)")
    if backend == "auto":
        backend = "closed_form" if params.is_stokes else "quadrature"
    n = params.n
    metadata: Dict = {}

    if backend == "closed_form":
        if not params.is_stokes:
            raise MethodUnavailableError("closed_form backend requires lambda = 0")
        conv = conv_laplace_mode(k, pts, params, "partial_fractions")
        second = _closed_form_second_derivs(k, pts, params)
    elif backend == "quadrature":
        table = laplace_mode_coefficients([k], pts, params)
        g = -table["coefficients"][0]
        second = np.trace(g) / (n - 1) * np.eye(n) - g
        conv = laplace_conv(k, pts, params)
        metadata["quadrature_error"] = table["quadrature_error"]
    elif backend == "finite_difference":
        method = conv_method or ("partial_fractions" if params.is_stokes else "quadrature")
        step = fd_step or 0.05 * float(r)
        conv = conv_laplace_mode(k, pts, params, method)
        second = richardson_hessian(lambda p: conv_laplace_mode(k, p, params, method), pts, step)
        metadata.update({"conv_method": method, "step": step})
    else:
        conv, second, metadata = _grid_fft(k, pts, params, with_hessian=True)

    return ModeKernelSample(k=int(k), x=pts, conv=complex(conv), second_derivs=np.asarray(second),
                            g=ModeKernelSample.assemble(np.asarray(second)), backend=backend,
                            metadata=metadata)


def mode_matrices(ks, x, params: KernelParams) -> np.ndarray:
    """
    G^k(x) for many modes and points at once, shape (len(ks), ..., n, n).

    Closed form for lam = 0; per-point heat quadrature otherwise.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    if np.any(ks == 0):
        raise DomainError("mode index must be nonzero")
    pts, r = as_points(x, params.n)
    n = params.n
    if params.is_stokes:
        roots = np.array([alpha(int(k), params).root for k in ks])
        expand = (slice(None),) + (None,) * r.ndim
        f, d1_over_r, d2 = helmholtz_profile(roots[expand], r[None, ...], params)
        hess_h = radial_hessian(pts[None, ...], np.broadcast_to(r, f.shape), d1_over_r, d2)
        iw = (1j * params.beta * ks)[expand + (None, None)]
        second = (laplace_hessian(pts, params)[None, ...] - hess_h) / iw
        return ModeKernelSample.assemble(second)

    flat = pts.reshape(-1, n)
    out = np.empty((ks.size, flat.shape[0], n, n), dtype=complex)
    for idx, point in enumerate(flat):
        out[:, idx] = -laplace_mode_coefficients(ks, point, params)["coefficients"]
    return out.reshape((ks.size,) + pts.shape[:-1] + (n, n))
