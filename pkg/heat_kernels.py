"""
Time-dependent Stokes/Oseen tensor and the representations built on it.

E(s, y) is the velocity response at time s > 0 to an impulsive point force
at the origin:

    E(s, y) = I H_s(y) + Q_s(y),   Q_s = int_s^inf grad grad H_tau d tau,

with H_s the heat kernel. For the Oseen system the response is carried
downstream, E(s, x - lam s e_1). From E we get

    * the Fourier coefficients in time of the periodic kernel (Laplace
      transform at s -> i omega),
    * the periodized time-domain kernel T sum_m E(t + m T, .).
"""

import logging
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import integrate, special

from kernel_errors import DomainError, SingularPointError
from steady_kernels import KernelParams, as_points, gamma_laplace, laplace_hessian

logger = logging.getLogger(__name__)

_SMALL_ARGUMENT = 1e-3
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)


def scaled_lower_gamma(a: float, u) -> np.ndarray:
    """gamma(a, u) / u^a, continuous down to u = 0."""
    shape = np.shape(u)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    small = u < _SMALL_ARGUMENT
    if small.any():
        us = u[small]
        term = np.ones_like(us) / a
        total = term.copy()
        for k in range(1, 12):
            term = term * us / (a + k)
            total = total + term
        out[small] = np.exp(-us) * total
    big = ~small
    if big.any():
        ub = u[big]
        out[big] = special.gammainc(a, ub) * special.gamma(a) / ub ** a
    return out.reshape(shape)


def upper_gamma(a: float, u) -> np.ndarray:
    """Unregularized Gamma(a, u) for a >= 0, u > 0."""
    u = np.asarray(u, dtype=float)
    if a == 0:
        return special.exp1(u)
    return special.gammaincc(a, u) * special.gamma(a)


def heat_kernel(s, y, n: int) -> np.ndarray:
    """H_s(y) = (4 pi s)^{-n/2} exp(-|y|^2 / 4s)."""
    s = np.asarray(s, dtype=float)
    rho_sq = np.sum(np.asarray(y) ** 2, axis=-1)
    return (4.0 * np.pi * s) ** (-n / 2.0) * np.exp(-rho_sq / (4.0 * s))


def stokes_heat_tensor(s, y, n: int) -> np.ndarray:
    """
    E(s, y) for the Stokes system, shape s.shape-broadcast-with y[..., 0] + (n, n).

    E = (4s)^{-n/2} pi^{-n/2} [I (e^{-U} - g(n/2, U)/2) + (y y^T / 4s) g(n/2 + 1, U)]
    with U = |y|^2/4s and g the scaled lower incomplete gamma.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("heat tensor requires s > 0")
    y = np.asarray(y, dtype=float)
    rho_sq = np.sum(y * y, axis=-1)
    s_b = np.broadcast_to(s, np.broadcast_shapes(s.shape, rho_sq.shape))
    u = rho_sq / (4.0 * s_b)
    prefactor = (4.0 * np.pi * s_b) ** (-n / 2.0)
    diag = prefactor * (np.exp(-u) - 0.5 * scaled_lower_gamma(n / 2.0, u))
    rank_one = prefactor * scaled_lower_gamma(n / 2.0 + 1.0, u) / (4.0 * s_b)
    outer = y[..., :, None] * y[..., None, :]
    return diag[..., None, None] * np.eye(n) + rank_one[..., None, None] * outer


def oseen_heat_tensor(s, x, params: KernelParams) -> np.ndarray:
    """E(s, x - lam s e_1)."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    shift = np.zeros(params.n)
    shift[0] = params.lam
    y = x - s[..., None] * shift
    return stokes_heat_tensor(s, y, params.n)


def stokes_heat_integral(upper, x, n: int) -> np.ndarray:
    """
    int_0^S E(s, x) ds in closed form (Stokes, x != 0).

    Uses int_0^S H ds = pi^{-n/2} rho^{2-n} Gamma(n/2 - 1, U_S) / 4 and
    int_0^S Q ds = S Q_S + int_0^S s grad grad H ds.
    """
    x = np.asarray(x, dtype=float)
    rho_sq = np.sum(x * x, axis=-1)
    if np.any(rho_sq == 0):
        raise SingularPointError("time integral of the heat tensor diverges at x = 0")
    upper = np.asarray(upper, dtype=float)
    rho = np.sqrt(rho_sq)
    u = rho_sq / (4.0 * upper)
    pi_n = np.pi ** (-n / 2.0)
    heat_int = pi_n * rho ** (2.0 - n) * upper_gamma(n / 2.0 - 1.0, u) / 4.0
    outer_int = pi_n * rho ** (-n) * upper_gamma(n / 2.0, u) / 4.0
    q_at_upper = stokes_heat_tensor(upper, x, n) - heat_kernel(upper, x, n)[..., None, None] * np.eye(n)
    outer = x[..., :, None] * x[..., None, :]
    return (
        0.5 * heat_int[..., None, None] * np.eye(n)
        + outer_int[..., None, None] * outer
        + upper[..., None, None] * q_at_upper
    )


def _graded_breaks(end: float, levels: int) -> np.ndarray:
    """0 followed by end * 2^-j, j = levels-1 ... 0."""
    return np.concatenate(([0.0], end * 2.0 ** (-np.arange(levels, dtype=float)[::-1])))


def _gauss_rule(breaks: np.ndarray):
    a = breaks[:-1, None]
    b = breaks[1:, None]
    nodes = 0.5 * (b - a) * _GAUSS_NODES + 0.5 * (a + b)
    weights = 0.5 * (b - a) * _GAUSS_WEIGHTS
    return nodes.ravel(), weights.ravel()


def oseen_heat_integral(upper: float, x, params: KernelParams,
                        omegas: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    int_0^S E(s, x - lam s e_1) ds for a batch of points.

    Closed form for lam = 0; otherwise composite Gauss-Legendre on panels
    graded toward s = 0 down to the smallest |x|^2, then panels per period.

    With omegas the weight exp(-i omega s) is included, one complex table per
    omega of shape (len(omegas), ..., n, n), and the part beyond S is closed
    by one integration by parts (omega = 0 entries get no tail).
    """
    pts, r = as_points(x, params.n)
    n = params.n
    if params.is_stokes and omegas is None:
        return stokes_heat_integral(np.full(pts.shape[:-1], upper), pts, n)
    period = params.period
    smallest = max(float(np.min(r)) ** 2 / 16.0, 1e-300)
    levels = max(8, int(np.ceil(np.log2(period / smallest))) + 2)
    per_period = 1
    if omegas is not None:
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        per_period = max(1, int(np.ceil(np.max(np.abs(omegas)) * period / (4.0 * np.pi))))
    tail_breaks = np.arange(1.0 + 1.0 / per_period, upper / period + 1.0, 1.0 / per_period) * period
    breaks = np.concatenate((_graded_breaks(period, levels), tail_breaks))
    breaks = np.unique(np.append(breaks[breaks < upper], upper))
    flat = pts.reshape(-1, n)
    if flat.shape[0] <= 64 and not params.is_stokes:
        # split at each point's closest approach to the origin
        closest = flat[:, 0] / params.lam
        breaks = np.unique(np.concatenate((breaks, closest[(closest > 0) & (closest < upper)])))
    nodes, weights = _gauss_rule(breaks)
    if omegas is None:
        out = np.zeros((1, flat.shape[0], n, n))
        phases = np.ones((1, nodes.size))
    else:
        out = np.zeros((omegas.size, flat.shape[0], n, n), dtype=complex)
        phases = np.exp(-1j * np.outer(omegas, nodes))
    chunk = max(1, 200000 // flat.shape[0])
    for start in range(0, nodes.size, chunk):
        s = nodes[start:start + chunk]
        w = weights[start:start + chunk] * phases[:, start:start + chunk]
        values = oseen_heat_tensor(s[None, :], flat[:, None, :], params)
        out += np.einsum("wq,pqjl->wpjl", w, values)
    if omegas is None:
        return out[0].reshape(pts.shape[:-1] + (n, n))

    e_end = oseen_heat_tensor(upper, flat, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(omegas != 0, np.exp(-1j * omegas * upper) / (1j * omegas), 0.0)
    out += factor[:, None, None, None] * e_end[None]
    return out.reshape((omegas.size,) + pts.shape[:-1] + (n, n))


def periodized_gamma_perp(t, x, params: KernelParams, n_periods: int = 64) -> np.ndarray:
    """
    Gamma_perp(t, x) = T sum_{m>=0} E(t + mT) - int_0^inf E ds.

    The sum runs over n_periods periods and the remainder is closed with the
    Euler-Maclaurin estimate (T/2 - t) E(n_periods T). t is reduced modulo T;
    at t = 0 the midpoint of the jump is returned. t of shape (...,) broadcasts
    against points of shape (..., n).
    """
    pts, _ = as_points(x, params.n)
    n = params.n
    period = params.period
    t = np.mod(np.asarray(t, dtype=float), period)
    shape = np.broadcast_shapes(t.shape, pts.shape[:-1])
    horizon = n_periods * period
    # the time integral depends on x only
    total = -np.broadcast_to(oseen_heat_integral(horizon, pts, params), shape + (n, n)).copy()
    t = np.broadcast_to(t, shape)
    pts = np.broadcast_to(pts, shape + (n,))

    on_jump = t == 0.0
    first = np.where(on_jump, period, t)
    weight = np.where(on_jump, 0.0, period)
    total += weight[..., None, None] * oseen_heat_tensor(first, pts, params)
    for m in range(1, n_periods):
        total += period * oseen_heat_tensor(t + m * period, pts, params)
    if on_jump.any():
        # E(0+, x) = grad grad Gamma_L(x), counted with half weight
        total[on_jump] += 0.5 * period * laplace_hessian(pts[on_jump], params)
    total += (0.5 * period - t)[..., None, None] * oseen_heat_tensor(np.full(shape, horizon), pts, params)
    return total


def _heat_tensor_rate(s: float, x: np.ndarray, params: KernelParams, h: float) -> np.ndarray:
    return (oseen_heat_tensor(s + h, x, params) - oseen_heat_tensor(s - h, x, params)) / (2.0 * h)


def laplace_mode_coefficients(ks: Sequence[int], x, params: KernelParams,
                              periods: int = 6, epsabs: float = 1e-11) -> Dict:
    """
    c^k(x) = int_0^inf E(s, x - lam s e_1) exp(-i omega_k s) ds for all k at once.

    These are the time-Fourier coefficients of the periodic kernel. The
    integral is cut at S = periods * T + 2|x|/|lam| and the remainder is
    closed by two integrations by parts.
    """
    pts, r = as_points(x, params.n)
    if pts.ndim != 1:
        raise DomainError("laplace_mode_coefficients takes a single point")
    ks = np.asarray(ks, dtype=int)
    if np.any(ks == 0):
        raise DomainError("mode index must be nonzero")
    omega = params.beta * ks
    upper = periods * params.period
    if not params.is_stokes:
        upper += 2.0 * float(r) / abs(params.lam)
    n = params.n

    def integrand(s):
        e = oseen_heat_tensor(s, pts, params)
        phase = np.exp(-1j * omega * s)
        values = phase[:, None, None] * e[None, :, :]
        return np.stack((values.real, values.imag))

    points = [p for p in (float(r) ** 2 / (8.0 * n), float(r) ** 2 / (2.0 * n), float(r) ** 2)
              if 0 < p < upper]
    if not params.is_stokes and 0 < pts[0] / params.lam < upper:
        points.append(pts[0] / params.lam)
    body, err = integrate.quad_vec(integrand, 0.0, upper, epsabs=epsabs, epsrel=1e-10,
                                   points=sorted(points), limit=4000, norm="max")
    coeffs = body[0] + 1j * body[1]

    step = 1e-3 * upper
    e_end = oseen_heat_tensor(upper, pts, params)
    de_end = _heat_tensor_rate(upper, pts, params, step)
    iw = 1j * omega[:, None, None]
    tail = np.exp(-1j * omega * upper)[:, None, None] * (e_end / iw + de_end / iw ** 2)
    logger.debug("laplace mode coefficients at %s: quad error %.2e, tail %.2e",
                 pts, err, np.abs(tail).max())
    return {"ks": ks, "coefficients": coeffs + tail, "quadrature_error": float(err)}


def laplace_conv(k: int, x, params: KernelParams, periods: int = 6, epsabs: float = 1e-12) -> complex:
    """
    (Gamma_L * Gamma^{k,lam}_H)(x) from its time-domain representation.

    conv = [Gamma_L(x) + int_0^inf e^{-i omega s} g'(s) ds] / (i omega), with
    g'(s) = -H_s(y) - lam d_1 (Gamma_L * H_s)(y), y = x - lam s e_1.
    """
    pts, r = as_points(x, params.n)
    if k == 0:
        raise DomainError("mode index must be nonzero")
    n = params.n
    omega = params.beta * k
    lam = params.lam
    upper = periods * params.period
    if lam != 0.0:
        upper += 2.0 * float(r) / abs(lam)

    def rate(s):
        s = np.asarray(s, dtype=float)
        y = pts - np.multiply.outer(s, np.eye(n)[0] * lam)
        rho_sq = np.sum(y * y, axis=-1)
        u = rho_sq / (4.0 * s)
        heat = (4.0 * np.pi * s) ** (-n / 2.0) * np.exp(-u)
        # d_1 (Gamma_L * H_s)(y) = -y_1 (4 s)^{-n/2} pi^{-n/2} g(n/2, u) / 2
        drift = -0.5 * y[..., 0] * (4.0 * np.pi * s) ** (-n / 2.0) * scaled_lower_gamma(n / 2.0, u)
        return -heat - lam * drift

    def integrand(s):
        value = rate(s) * np.exp(-1j * omega * s)
        return np.array([value.real, value.imag])

    points = [p for p in (float(r) ** 2 / (8.0 * n), float(r) ** 2 / (2.0 * n), float(r) ** 2)
              if 0 < p < upper]
    if lam != 0.0 and 0 < pts[0] / lam < upper:
        points.append(pts[0] / lam)
    body, _ = integrate.quad_vec(integrand, 0.0, upper, epsabs=epsabs, epsrel=1e-11,
                                 points=sorted(points), limit=4000)
    integral = body[0] + 1j * body[1]
    step = 1e-3 * upper
    end = float(rate(upper))
    slope = float((rate(upper + step) - rate(upper - step)) / (2.0 * step))
    iw = 1j * omega
    integral += np.exp(-iw * upper) * (end / iw + slope / iw ** 2)
    return complex((gamma_laplace(pts, params) + integral) / iw)
