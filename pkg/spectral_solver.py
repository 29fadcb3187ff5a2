"""
Time-periodic Stokes/Oseen solver on a discrete torus.

Solves (d_t - Laplace + lam d_1) u + grad p = f, div u = 0 mode by mode with
the multiplier

    u^(k, xi) = P(xi) f^(k, xi) / (|xi|^2 + i (beta k + lam xi_1)),
    p^(k, xi) = -i xi . f^(k, xi) / |xi|^2,

and provides the real-space convolution with the whole-space kernels as an
independent check, built-in forcing scenarios, and the W^{1,2,q} ratio
diagnostic.

Field layout: values[t, x_1, ..., x_n, component], x_j = -L/2 + j L/N,
t_j = j T/N_t.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy import fft, stats

from heat_kernels import oseen_heat_integral
from kernel_errors import (ContractError, DegenerateInputError, DomainError, SingularPointError,
                           ZeroModeError)
from mode_kernels import mode_matrices
from steady_kernels import KernelParams, gamma_stokes, pressure_kernel

logger = logging.getLogger(__name__)

REPRESENTATIONS = ("physical", "fourier")


@dataclass(frozen=True)
class GridSpec:
    """Discrete torus: N_t samples of [0, T), N_x samples per axis of [-L/2, L/2)^n."""

    n: int = 2
    n_t: int = 8
    n_x: int = 32
    box_edge: float = 16.0
    period: float = 2.0 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {self.n}")
        for name in ("n_t", "n_x"):
            value = getattr(self, name)
            if int(value) != value or value < 4 or value % 2:
                raise DomainError(f"{name} must be an even integer >= 4, got {value}")
        if not self.box_edge > 0 or not self.period > 0:
            raise DomainError("box edge and period must be positive")

    @property
    def spacing(self) -> float:
        return self.box_edge / self.n_x

    @property
    def beta(self) -> float:
        return 2.0 * np.pi / self.period

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_t) * self.period / self.n_t

    @property
    def coordinates(self) -> np.ndarray:
        return -0.5 * self.box_edge + np.arange(self.n_x) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """xi = 2 pi m / L in FFT order."""
        return 2.0 * np.pi * fft.fftfreq(self.n_x, d=self.spacing)

    @property
    def frequencies(self) -> np.ndarray:
        """Integer mode indices k in FFT order."""
        return np.rint(fft.fftfreq(self.n_t, d=1.0 / self.n_t)).astype(int)

    def field_shape(self, components: int) -> Tuple[int, ...]:
        return (self.n_t,) + (self.n_x,) * self.n + (components,)

    def points(self) -> np.ndarray:
        """Spatial nodes, shape (N_x, ..., N_x, n)."""
        axes = np.meshgrid(*([self.coordinates] * self.n), indexing="ij")
        return np.stack(axes, axis=-1)

    def node_index(self, x) -> Tuple[int, ...]:
        """Index of the grid node at x; raises if x is not a node."""
        x = np.asarray(x, dtype=float)
        position = (x + 0.5 * self.box_edge) / self.spacing
        index = np.rint(position)
        if np.any(np.abs(position - index) > 1e-9) or np.any(index < 0) or np.any(index >= self.n_x):
            raise DomainError(f"{x} is not a grid node")
        return tuple(int(i) for i in index)


@dataclass
class TPField:
    """Complex field values[t, x..., component] in physical or Fourier representation."""

    values: np.ndarray
    representation: str = "physical"

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ContractError(f"unknown representation {self.representation!r}")
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def components(self) -> int:
        return self.values.shape[-1]

    def check(self, grid: GridSpec, representation: Optional[str] = None,
              components: Optional[int] = None):
        if representation and self.representation != representation:
            raise ContractError(f"expected {representation} field, got {self.representation}")
        expected = grid.field_shape(components or self.components)
        if self.values.shape != expected:
            raise ContractError(f"field shape {self.values.shape} does not match grid {expected}")


def _spatial_axes(grid: GridSpec) -> Tuple[int, ...]:
    return tuple(range(1, grid.n + 1))


def _phase_signs(grid: GridSpec) -> np.ndarray:
    """(-1)^(m_1 + ... + m_n): the grid starts at -L/2, not at 0."""
    sign = (-1.0) ** np.arange(grid.n_x)
    total = np.ones((1,) * (grid.n + 2))
    for axis in range(grid.n):
        shape = [1] * (grid.n + 2)
        shape[axis + 1] = grid.n_x
        total = total * sign.reshape(shape)
    return total


def dft_forward(tp_field: TPField, grid: GridSpec, workers: Optional[int] = None) -> TPField:
    """
    Coefficients c(k, xi) of f(t, x) = sum c(k, xi) exp(i (beta k t + xi . x)).

    Normalized as grid means in time and space, so a plane wave has a unit
    coefficient; dft_inverse is the exact inverse.
    """
    tp_field.check(grid, "physical")
    axes = (0,) + _spatial_axes(grid)
    count = grid.n_t * grid.n_x ** grid.n
    values = fft.fftn(tp_field.values, axes=axes, workers=workers) / count
    return TPField(values * _phase_signs(grid), "fourier")


def dft_inverse(tp_field: TPField, grid: GridSpec, workers: Optional[int] = None) -> TPField:
    tp_field.check(grid, "fourier")
    axes = (0,) + _spatial_axes(grid)
    count = grid.n_t * grid.n_x ** grid.n
    values = fft.ifftn(tp_field.values * _phase_signs(grid), axes=axes, workers=workers) * count
    return TPField(values, "physical")


def _wavevectors(grid: GridSpec) -> np.ndarray:
    """xi on the grid, shape (1, N_x, ..., N_x, n)."""
    axes = np.meshgrid(*([grid.wavenumbers] * grid.n), indexing="ij")
    return np.stack(axes, axis=-1)[None]


def _mode_indices(grid: GridSpec) -> np.ndarray:
    return grid.frequencies.reshape((grid.n_t,) + (1,) * grid.n)


def _nyquist_mask(grid: GridSpec) -> np.ndarray:
    """True on modes carrying a Nyquist index in time or any spatial axis."""
    mask = np.zeros((grid.n_t,) + (grid.n_x,) * grid.n, dtype=bool)
    mask[grid.n_t // 2] = True
    for axis in range(grid.n):
        index = [slice(None)] * (grid.n + 1)
        index[axis + 1] = grid.n_x // 2
        mask[tuple(index)] = True
    return mask


def _zero_mode_index(grid: GridSpec) -> Tuple[int, ...]:
    return (0,) * (grid.n + 1)


def _denominator(k, xi, params: KernelParams) -> np.ndarray:
    k = np.asarray(k)
    xi = np.asarray(xi, dtype=float)
    return np.sum(xi * xi, axis=-1) + 1j * (params.beta * k + params.lam * xi[..., 0])


def multiplier_m(k, xi, params: KernelParams) -> np.ndarray:
    """M(k, xi) = (1 - delta(k)) / (|xi|^2 + i (beta k + lam xi_1))."""
    k = np.asarray(k)
    denom = _denominator(k, xi, params)
    values = np.where(k == 0, 0.0, 1.0 / np.where(k == 0, 1.0, denom))
    return values[()] if values.ndim == 0 else values


def full_resolvent(k, xi, params: KernelParams) -> np.ndarray:
    """1 / (|xi|^2 + i (beta k + lam xi_1)), undefined at (k, xi) = (0, 0)."""
    k = np.asarray(k)
    xi = np.asarray(xi, dtype=float)
    at_zero = (k == 0) & (np.sum(xi * xi, axis=-1) == 0)
    if np.any(at_zero):
        raise ZeroModeError("full resolvent requested at (k, xi) = (0, 0)")
    values = 1.0 / _denominator(k, xi, params)
    return values[()] if values.ndim == 0 else values


def helmholtz_project(xi, v) -> Tuple[np.ndarray, bool]:
    """
    P(xi) v = v - xi (xi . v) / |xi|^2.

    Returns (projected vector(s), zero_mode) where zero_mode reports that
    some xi = 0 and v was passed through unchanged there.
    """
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v)
    rho_sq = np.sum(xi * xi, axis=-1)
    inverse = np.divide(1.0, rho_sq, out=np.zeros_like(rho_sq), where=rho_sq > 0)
    dot = np.sum(xi * v, axis=-1)
    return v - xi * (dot * inverse)[..., None], bool(np.any(rho_sq == 0))


@dataclass
class SolveResult:
    """Velocity, pressure and certification metrics of a torus solve."""

    u: TPField
    p: TPField
    residual_linf: float
    relative_residual: float
    divergence_linf: float
    zero_mode_report: Dict = field(default_factory=dict)


def solve_tp(f: TPField, params: KernelParams, grid: GridSpec, workers: Optional[int] = None) -> SolveResult:
    """
    Solve the time-periodic Stokes/Oseen system for a real forcing on the torus.

    The (k, xi) = (0, 0) velocity mode is set to zero and the spatial mean of
    the forcing at k = 0 is reported. Nyquist modes of f are dropped so that
    the solution of a real forcing stays real; their size is reported too.
    """
    f.check(grid, "physical", grid.n)
    scale = float(np.max(np.abs(f.values))) if f.values.size else 0.0
    if np.max(np.abs(f.values.imag), initial=0.0) > 1e-12 * max(scale, 1.0):
        raise ContractError("forcing must be real-valued")
    if params.n != grid.n or not np.isclose(params.period, grid.period):
        raise ContractError("kernel parameters and grid disagree on dimension or period")

    forcing = dft_forward(f, grid, workers).values
    nyquist = _nyquist_mask(grid)
    nyquist_content = float(np.max(np.abs(forcing[nyquist]), initial=0.0))
    forcing[nyquist] = 0.0
    origin = _zero_mode_index(grid)
    mean_force = forcing[origin].real.copy()

    xi = _wavevectors(grid)
    k = _mode_indices(grid)
    rho_sq = np.sum(xi * xi, axis=-1)
    inverse = np.divide(1.0, rho_sq, out=np.zeros_like(rho_sq), where=rho_sq > 0)
    dot = np.sum(xi * forcing, axis=-1)
    projected = forcing - xi * (dot * inverse)[..., None]

    denom = _denominator(k, xi, params)
    denom[origin] = 1.0
    velocity = projected / denom[..., None]
    velocity[origin] = 0.0
    pressure = (-1j * dot * inverse)[..., None]

    u = dft_inverse(TPField(velocity, "fourier"), grid, workers)
    p = dft_inverse(TPField(pressure, "fourier"), grid, workers)

    # residual against the forcing the solver actually inverted
    target = forcing.copy()
    target[origin] = 0.0
    target = dft_inverse(TPField(target, "fourier"), grid, workers).values
    applied = operator_apply(u, p, params, grid, workers).values
    residual = float(np.max(np.abs(applied - target)))
    divergence = dft_inverse(TPField(np.sum(1j * xi * velocity, axis=-1, keepdims=True), "fourier"),
                             grid, workers).values
    divergence_linf = float(np.max(np.abs(divergence)))

    applied_zero_mode = bool(np.any(np.abs(mean_force) > 1e-14 * max(scale, 1e-300)))
    if applied_zero_mode:
        logger.warning("forcing has nonzero spatial mean at k = 0 (%s); velocity zero mode set to 0",
                       np.array2string(mean_force, precision=3))
    logger.info("solve_tp: residual %.2e, divergence %.2e", residual, divergence_linf)
    return SolveResult(
        u=u,
        p=p,
        residual_linf=residual,
        relative_residual=residual / scale if scale > 0 else residual,
        divergence_linf=divergence_linf,
        zero_mode_report={
            "mean_force": mean_force.tolist(),
            "applied": applied_zero_mode,
            "policy": "velocity and pressure zero modes set to 0",
            "nyquist_dropped": nyquist_content,
        },
    )


def operator_apply(u: TPField, p: TPField, params: KernelParams, grid: GridSpec,
                   workers: Optional[int] = None) -> TPField:
    """(d_t - Laplace + lam d_1) u + grad p, in the representation of u."""
    if u.representation != p.representation:
        raise ContractError("u and p must share a representation")
    u.check(grid, components=grid.n)
    p.check(grid, components=1)
    physical = u.representation == "physical"
    u_hat = dft_forward(u, grid, workers).values if physical else u.values
    p_hat = dft_forward(p, grid, workers).values if physical else p.values

    xi = _wavevectors(grid)
    symbol = _denominator(_mode_indices(grid), xi, params)
    result = symbol[..., None] * u_hat + 1j * xi * p_hat
    out = TPField(result, "fourier")
    return dft_inverse(out, grid, workers) if physical else out


def split_steady_periodic(u: TPField) -> Tuple[np.ndarray, TPField]:
    """(time mean, zero-mean remainder) of a physical field."""
    if u.representation != "physical":
        raise ContractError("split_steady_periodic needs a physical field")
    steady = u.values.mean(axis=0)
    return steady, TPField(u.values - steady[None], "physical")


def field_decay_slope(values: np.ndarray, grid: GridSpec, axis: int = 0,
                      r_min: float = 1.0, r_max: Optional[float] = None) -> Dict:
    """
    Log-log slope of |values| along the positive half of a coordinate axis.

    values has shape (N_x, ..., N_x, components) or a leading time axis, in
    which case the maximum over time is used.
    """
    values = np.abs(np.asarray(values))
    magnitude = np.sqrt(np.sum(values ** 2, axis=-1))
    if magnitude.ndim == grid.n + 1:
        magnitude = magnitude.max(axis=0)
    coords = grid.coordinates
    r_max = r_max or 0.5 * grid.box_edge - grid.spacing
    chosen = np.nonzero((coords >= r_min) & (coords <= r_max))[0]
    if chosen.size < 2:
        raise DomainError("fewer than two grid nodes in the fitting range")
    index = [grid.n_x // 2] * grid.n
    samples = []
    for j in chosen:
        index[axis] = j
        samples.append(magnitude[tuple(index)])
    samples = np.asarray(samples)
    fit = stats.linregress(np.log(coords[chosen]), np.log(samples))
    return {"slope": float(fit.slope), "radii": coords[chosen], "magnitudes": samples}


# --------------------------------------------------------------------------
# forcing scenarios
# --------------------------------------------------------------------------

class ForcingScenario:
    """
    Real forcing given by its time-Fourier modes.

    f(t, y) = g_0(y) + 2 Re sum_{k >= 1} g_k(y) exp(i beta k t), each g_k
    supported in the ball of support_radius around center.
    """

    name = "forcing"

    def __init__(self, n: int, period: float = 2.0 * np.pi, support_radius: float = 1.0):
        self.n = n
        self.period = period
        self.support_radius = support_radius
        self.center = np.zeros(n)

    def time_modes(self, y: np.ndarray) -> Dict[int, np.ndarray]:
        raise NotImplementedError

    def sample(self, t, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        modes = self.time_modes(y)
        total = np.zeros(np.broadcast_shapes(t.shape, y.shape[:-1]) + (self.n,))
        beta = 2.0 * np.pi / self.period
        for k, g in modes.items():
            if k == 0:
                total = total + g.real
            else:
                total = total + 2.0 * (g * np.exp(1j * beta * k * t)[..., None]).real
        return total

    def on_grid(self, grid: GridSpec) -> TPField:
        points = grid.points()
        times = grid.times.reshape((grid.n_t,) + (1,) * grid.n)
        return TPField(self.sample(times, points[None]), "physical")


def bump_profile(y: np.ndarray, radius: float, power: int):
    """phi = (1 - |y|^2/R^2)^p inside the ball, with its gradient."""
    rho_sq = np.sum(y * y, axis=-1) / radius ** 2
    inside = rho_sq < 1.0
    base = np.where(inside, 1.0 - rho_sq, 0.0)
    phi = base ** power
    grad = (-2.0 * power / radius ** 2) * (base ** (power - 1))[..., None] * y
    return phi, grad


class BumpForcing(ForcingScenario):
    """f = phi(y) (steady_weight + periodic_weight cos(beta k t)) e_axis."""

    name = "bump"

    def __init__(self, n: int, period: float = 2.0 * np.pi, radius: float = 1.0, power: int = 8,
                 axis: int = 0, steady_weight: float = 1.0, periodic_weight: float = 1.0, mode: int = 1):
        super().__init__(n, period, radius)
        self.power = power
        self.axis = axis
        self.steady_weight = steady_weight
        self.periodic_weight = periodic_weight
        self.mode = mode

    def time_modes(self, y):
        phi, _ = bump_profile(np.asarray(y, dtype=float) - self.center, self.support_radius, self.power)
        direction = np.eye(self.n)[self.axis]
        profile = phi[..., None] * direction
        return {0: self.steady_weight * profile + 0j, self.mode: 0.5 * self.periodic_weight * profile + 0j}


class SolenoidalBumpForcing(ForcingScenario):
    """f = (d_2 phi, -d_1 phi, 0, ...) cos(beta k t); divergence-free with zero mean."""

    name = "solenoidal_bump"

    def __init__(self, n: int, period: float = 2.0 * np.pi, radius: float = 1.0, power: int = 8,
                 mode: int = 1):
        super().__init__(n, period, radius)
        self.power = power
        self.mode = mode

    def time_modes(self, y):
        _, grad = bump_profile(np.asarray(y, dtype=float) - self.center, self.support_radius, self.power)
        swirl = np.zeros(grad.shape)
        swirl[..., 0] = grad[..., 1]
        swirl[..., 1] = -grad[..., 0]
        return {self.mode: 0.5 * swirl + 0j}


class GaussianForcing(ForcingScenario):
    """Gaussian bump modulated in time, cut off at `cutoff` widths."""

    name = "gaussian_bump"

    def __init__(self, n: int, period: float = 2.0 * np.pi, width: float = 0.5, axis: int = 0,
                 steady_weight: float = 0.0, mode: int = 1, cutoff: float = 6.0):
        super().__init__(n, period, cutoff * width)
        self.width = width
        self.axis = axis
        self.steady_weight = steady_weight
        self.mode = mode

    def time_modes(self, y):
        y = np.asarray(y, dtype=float) - self.center
        rho_sq = np.sum(y * y, axis=-1)
        profile = np.where(rho_sq < self.support_radius ** 2, np.exp(-rho_sq / self.width ** 2), 0.0)
        vector = profile[..., None] * np.eye(self.n)[self.axis]
        return {0: self.steady_weight * vector + 0j, self.mode: 0.5 * vector + 0j}


class ZeroForcing(ForcingScenario):
    name = "zero"

    def time_modes(self, y):
        return {0: np.zeros(np.shape(y), dtype=complex)}


def manufactured_solution(grid: GridSpec, params: KernelParams, seed: int = 0, n_modes: int = 4) -> Dict:
    """
    Band-limited divergence-free u*, pressure p* and the matching forcing.

    u* = sum A cos(beta k t + xi . x + theta) with A perpendicular to xi,
    p* = sum b cos(beta k t + eta . x + theta'), eta != 0, and
    f = (d_t - Laplace + lam d_1) u* + grad p* evaluated analytically.
    """
    rng = np.random.default_rng(seed)
    n = grid.n
    times = grid.times.reshape((grid.n_t,) + (1,) * n)
    points = grid.points()[None]
    beta = grid.beta
    u = np.zeros(grid.field_shape(n))
    p = np.zeros(grid.field_shape(1))
    f = np.zeros(grid.field_shape(n))
    k_band = grid.n_t // 2 - 1
    m_band = grid.n_x // 2 - 1

    def draw_wave():
        while True:
            m = rng.integers(-m_band, m_band + 1, size=n)
            if np.any(m != 0):
                return int(rng.integers(-k_band, k_band + 1)), 2.0 * np.pi * m / grid.box_edge

    for _ in range(n_modes):
        k, xi = draw_wave()
        amplitude, _ = helmholtz_project(xi, rng.standard_normal(n))
        phase = beta * k * times + np.tensordot(points, xi, axes=([-1], [0])) + rng.uniform(0, 2 * np.pi)
        u += amplitude * np.cos(phase)[..., None]
        rate = beta * k + params.lam * xi[0]
        f += amplitude * (np.dot(xi, xi) * np.cos(phase) - rate * np.sin(phase))[..., None]

        k, eta = draw_wave()
        weight = rng.standard_normal()
        phase = beta * k * times + np.tensordot(points, eta, axes=([-1], [0])) + rng.uniform(0, 2 * np.pi)
        p += weight * np.cos(phase)[..., None]
        f -= weight * eta * np.sin(phase)[..., None]

    return {"f": TPField(f, "physical"), "u": TPField(u, "physical"), "p": TPField(p, "physical")}


# --------------------------------------------------------------------------
# real-space convolution with the whole-space kernels
# --------------------------------------------------------------------------

def ball_quadrature(center, radius: float, n: int, radial: int = 32, angular: int = 64):
    """
    Nodes and weights on the ball |y - center| < radius.

    Polar (n = 2) or spherical (n = 3) product rules with Gauss-Legendre in
    the radius (and polar cosine) and the trapezoid rule in the azimuth;
    a masked tensor Gauss-Legendre cube otherwise.
    """
    center = np.asarray(center, dtype=float)
    r, wr = np.polynomial.legendre.leggauss(radial)
    r = 0.5 * radius * (r + 1.0)
    wr = 0.5 * radius * wr
    phi = 2.0 * np.pi * np.arange(angular) / angular
    wphi = 2.0 * np.pi / angular
    if n == 2:
        rr, pp = np.meshgrid(r, phi, indexing="ij")
        nodes = np.stack((rr * np.cos(pp), rr * np.sin(pp)), axis=-1).reshape(-1, 2)
        weights = (wr * r)[:, None] * np.full(angular, wphi)[None, :]
        return nodes + center, weights.ravel()
    if n == 3:
        c, wc = np.polynomial.legendre.leggauss(max(angular // 2, 2))
        rr, cc, pp = np.meshgrid(r, c, phi, indexing="ij")
        ss = np.sqrt(1.0 - cc ** 2)
        nodes = np.stack((rr * cc, rr * ss * np.cos(pp), rr * ss * np.sin(pp)), axis=-1).reshape(-1, 3)
        weights = (wr * r ** 2)[:, None, None] * wc[None, :, None] * np.full(angular, wphi)[None, None, :]
        return nodes + center, weights.ravel()
    g, wg = np.polynomial.legendre.leggauss(radial)
    axes = np.meshgrid(*([radius * g] * n), indexing="ij")
    nodes = np.stack(axes, axis=-1).reshape(-1, n)
    weights = np.prod(np.stack(np.meshgrid(*([radius * wg] * n), indexing="ij"), axis=-1), axis=-1).ravel()
    inside = np.sum(nodes * nodes, axis=-1) < radius ** 2
    return nodes[inside] + center, weights[inside]


def convolve_realspace(forcing: ForcingScenario, t: float, x, params: KernelParams,
                       radial: int = 32, angular: int = 64, horizon_periods: int = 64) -> Dict:
    """
    u(t, x) = Gamma * mean_t f + Gamma_perp * f and p(t, x) = gamma * f(t, .).

    Each forcing time mode g_k is integrated against the matching kernel
    coefficient: Gamma for k = 0 and c^k for k != 0 (closed form for lam = 0,
    time transform of the Oseen heat tensor otherwise). x must lie outside
    the forcing support.
    """
    x = np.asarray(x, dtype=float)
    n = params.n
    if x.shape != (n,):
        raise DomainError(f"x must have shape ({n},)")
    if np.linalg.norm(x - forcing.center) <= forcing.support_radius:
        raise SingularPointError("evaluation point lies inside the forcing support")
    nodes, weights = ball_quadrature(forcing.center, forcing.support_radius, n, radial, angular)
    offsets = x - nodes
    modes = forcing.time_modes(nodes)
    horizon = horizon_periods * params.period
    if not params.is_stokes:
        horizon += 2.0 * (np.linalg.norm(x) + forcing.support_radius) / abs(params.lam)

    steady = np.zeros(n)
    nonzero_mean = False
    if 0 in modes:
        mean_force = modes[0].real
        total = np.abs(np.einsum("q,qj->j", weights, mean_force))
        nonzero_mean = bool(np.any(total > 1e-12 * max(np.abs(mean_force).max(), 1e-300)))
        if nonzero_mean:
            logger.warning("forcing has nonzero spatial mean at k = 0; the whole-space result "
                           "differs from the torus zero-mode policy")
        if params.is_stokes:
            kernel = gamma_stokes(offsets, params)
        else:
            kernel = oseen_heat_integral(horizon, offsets, params)
        steady = np.einsum("q,qij,qj->i", weights, kernel, mean_force)

    periodic = np.zeros(n)
    responses = {}
    beta = params.beta
    for k, g in modes.items():
        if k == 0:
            continue
        if params.is_stokes:
            coefficient = -mode_matrices([k], offsets, params)[0]
        else:
            coefficient = oseen_heat_integral(horizon, offsets, params, omegas=[beta * k])[0]
        response = np.einsum("q,qij,qj->i", weights, coefficient, g)
        responses[k] = response
        periodic = periodic + 2.0 * (response * np.exp(1j * beta * k * t)).real

    pressure = float(np.einsum("q,qj,qj->", weights, pressure_kernel(offsets, params),
                               forcing.sample(t, nodes)))
    return {
        "u": steady + periodic,
        "u_steady": steady,
        "u_periodic": periodic,
        "p": pressure,
        "periodic_modes": responses,
        "nonzero_mean": nonzero_mean,
        "quadrature_nodes": int(weights.size),
    }


# --------------------------------------------------------------------------
# W^{1,2,q} ratio diagnostic
# --------------------------------------------------------------------------

def multi_indices(n: int, order: int = 2) -> List[Tuple[int, ...]]:
    """All alpha in N^n with |alpha| <= order."""
    return [alpha for alpha in product(range(order + 1), repeat=n) if sum(alpha) <= order]


def _lq_norm(values: np.ndarray, grid: GridSpec, q: float) -> float:
    """(mean_t sum_x |v|^q dx^n)^{1/q} with the Euclidean norm over components."""
    magnitude = np.sqrt(np.sum(np.abs(values) ** 2, axis=-1))
    return float((np.mean(np.sum(magnitude.reshape(grid.n_t, -1) ** q, axis=1)) * grid.spacing ** grid.n) ** (1.0 / q))


def sobolev_ratio(f: TPField, params: KernelParams, grid: GridSpec, q: float = 2.0,
                  workers: Optional[int] = None) -> float:
    """
    ||Gamma_perp * f||_{W^{1,2,q}} / ||f||_q on the torus.

    Gamma_perp * f is applied spectrally with M(k, xi) P(xi); the norm sums
    ||d_t w||_q^q and ||d^alpha w||_q^q over |alpha| <= 2.
    """
    f.check(grid, "physical", grid.n)
    if np.max(np.abs(f.values.imag), initial=0.0) > 1e-12 * max(float(np.max(np.abs(f.values))), 1.0):
        raise ContractError("forcing must be real-valued")
    denominator = _lq_norm(f.values.real, grid, q)
    if denominator == 0:
        raise DegenerateInputError("||f||_q = 0")

    coefficients = dft_forward(f, grid, workers).values
    coefficients[_nyquist_mask(grid)] = 0.0
    xi = _wavevectors(grid)
    k = _mode_indices(grid)
    projected, _ = helmholtz_project(xi, coefficients)
    w_hat = multiplier_m(k, xi, params)[..., None] * projected

    terms = [1j * params.beta * k[..., None] * w_hat]
    for alpha in multi_indices(grid.n):
        factor = np.prod([(1j * xi[..., d]) ** power for d, power in enumerate(alpha)], axis=0)
        terms.append(factor[..., None] * w_hat)
    total = 0.0
    for term in terms:
        physical = dft_inverse(TPField(term, "fourier"), grid, workers).values.real
        total += _lq_norm(physical, grid, q) ** q
    return total ** (1.0 / q) / denominator


def sobolev_symbol_ratio(k: int, xi, v, params: KernelParams, q: float = 2.0) -> float:
    """Closed-form ratio for the single real mode f = v cos(beta k t + xi . x)."""
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v, dtype=float)
    projected, _ = helmholtz_project(xi, v)
    symbol = abs(multiplier_m(k, xi, params))
    weight = abs(params.beta * k) ** q + sum(
        abs(np.prod(xi ** np.asarray(alpha))) ** q for alpha in multi_indices(xi.size))
    return float((weight * symbol ** q * np.linalg.norm(projected) ** q / np.linalg.norm(v) ** q) ** (1.0 / q))


def plane_wave_field(grid: GridSpec, k: int, m, v) -> TPField:
    """v cos(beta k t + xi . x) with xi = 2 pi m / L."""
    xi = 2.0 * np.pi * np.asarray(m, dtype=float) / grid.box_edge
    times = grid.times.reshape((grid.n_t,) + (1,) * grid.n)
    phase = grid.beta * k * times + np.tensordot(grid.points(), xi, axes=([-1], [0]))[None]
    return TPField(np.asarray(v, dtype=float) * np.cos(phase)[..., None], "physical")


def random_band_limited_fields(grid: GridSpec, seed: int, count: int, k_band: int = 2,
                               m_band: int = 3) -> Iterator[TPField]:
    """
    Seeded random real fields with modes |k| <= k_band, |m_j| <= m_band.

    The draw depends only on the seed and the bands, so the same continuous
    fields are produced on any grid that resolves the bands.
    """
    if k_band >= grid.n_t // 2 or m_band >= grid.n_x // 2:
        raise DomainError("grid does not resolve the requested bands")
    rng = np.random.default_rng(seed)
    times = grid.times.reshape((grid.n_t,) + (1,) * grid.n)
    points = grid.points()
    waves = [(k, np.asarray(m)) for k in range(0, k_band + 1)
             for m in product(range(-m_band, m_band + 1), repeat=grid.n)]
    for _ in range(count):
        values = np.zeros(grid.field_shape(grid.n))
        for k, m in waves:
            cos_amp, sin_amp = rng.standard_normal((2, grid.n))
            xi = 2.0 * np.pi * m / grid.box_edge
            phase = grid.beta * k * times + np.tensordot(points, xi, axes=([-1], [0]))[None]
            values += cos_amp * np.cos(phase)[..., None] + sin_amp * np.sin(phase)[..., None]
        yield TPField(values, "physical")
