"""
Purely periodic part of the time-periodic velocity kernel.

Gamma_perp(t, x) = sum_{k != 0} c^k(x) exp(i beta k t), c^k = -G^k, is the
kernel that remains after the steady Stokes/Oseen tensor is removed. Its mode
sum is only conditionally convergent (c^k ~ A0/(i omega) + A1/(i omega)^2),
so the two leading asymptotic terms are summed in closed form with
Bernoulli polynomials and only the remainder is truncated.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import special, stats

from heat_kernels import laplace_mode_coefficients, periodized_gamma_perp
from kernel_errors import DomainError, QuadratureResolutionError
from mode_kernels import mode_matrices
from steady_kernels import (KernelParams, as_points, laplace_hessian, laplace_third_derivative,
                            steady_velocity_kernel)

logger = logging.getLogger(__name__)

PERP_METHODS = ("modes", "heat")

# finest probe shell the near-origin quadrature resolves
PROBE_RESOLUTION = 1e-4

_FD_STENCIL = np.array([-2.0, -1.0, 1.0, 2.0])
_FD_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


@dataclass(frozen=True)
class TruncationSpec:
    """
    Mode cutoff for the synthesis.

    Attributes:
        k_max: largest mode index ever summed (>= 1)
        tail_tol: the sum stops at the first k whose remainder coefficient
            has max-norm below this value
    """

    k_max: int = 48
    tail_tol: float = 1e-7

    def __post_init__(self):
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise DomainError(f"k_max must be an integer >= 1, got {self.k_max}")
        if not self.tail_tol > 0:
            raise DomainError(f"tail_tol must be positive, got {self.tail_tol}")


def reduce_time(t, period: float) -> np.ndarray:
    """t modulo T in [0, T)."""
    return np.mod(np.asarray(t, dtype=float), period)


def sawtooth_sums(t, period: float):
    """
    S_m(t) = sum_{k != 0} exp(i beta k t)/(i beta k)^m for m = 1, 2.

    S_1 = T/2 - t on (0, T) with the midpoint 0 at t = 0,
    S_2 = -(T^2/2) B_2(t/T).
    """
    tau = reduce_time(t, period)
    u = tau / period
    s1 = np.where(tau == 0.0, 0.0, 0.5 * period - tau)
    s2 = -0.5 * period ** 2 * (u * u - u + 1.0 / 6.0)
    return s1, s2


def _composite_gauss(breaks: np.ndarray, order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    return (0.5 * (b - a) * nodes + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * weights).ravel()


@dataclass
class ModeTable:
    """
    Coefficients c^k for k = 1..k_max at a batch of points.

    Negative modes follow from c^{-k} = conj(c^k). Trailing component axes
    are arbitrary: (n, n) for the kernel, (n, n, n) for its gradient.
    """

    params: KernelParams
    trunc: TruncationSpec
    coefficients: np.ndarray  # (k_max, P, *components)
    leading: np.ndarray  # A0, (P, *components)
    drift: np.ndarray  # A1
    attained_k: int = 0
    last_mode_norm: float = 0.0
    truncation_warning: bool = False

    def __post_init__(self):
        self._truncate()

    @property
    def omegas(self) -> np.ndarray:
        return self.params.beta * np.arange(1, self.coefficients.shape[0] + 1)

    def _expand(self, values: np.ndarray) -> np.ndarray:
        return values.reshape(values.shape + (1,) * (self.coefficients.ndim - 1))

    def remainder(self) -> np.ndarray:
        iw = self._expand(1j * self.omegas)
        return self.coefficients - self.leading[None] / iw - self.drift[None] / iw ** 2

    def _truncate(self):
        norms = np.abs(self.remainder()).reshape(self.coefficients.shape[0], -1).max(axis=1)
        below = np.nonzero(norms < self.trunc.tail_tol)[0]
        if below.size:
            self.attained_k = int(below[0]) + 1
            self.truncation_warning = False
        else:
            self.attained_k = self.coefficients.shape[0]
            self.truncation_warning = True
            logger.warning("mode remainder still %.2e > %.1e at k_max = %d",
                           norms[-1], self.trunc.tail_tol, self.attained_k)
        self.last_mode_norm = float(norms[self.attained_k - 1])

    def synthesize(self, t) -> np.ndarray:
        """Real Gamma_perp values, shape (len(t), P, *components)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s1, s2 = sawtooth_sums(t, self.params.period)
        ks = np.arange(1, self.attained_k + 1)
        phases = np.exp(1j * self.params.beta * np.outer(reduce_time(t, self.params.period), ks))
        rest = np.tensordot(phases, self.remainder()[: self.attained_k], axes=([1], [0]))
        lead = s1.reshape((-1,) + (1,) * self.leading.ndim) * self.leading[None]
        drift = s2.reshape((-1,) + (1,) * self.drift.ndim) * self.drift[None]
        return lead + drift + 2.0 * rest.real

    def parseval_norms(self, include_tail: bool = True) -> np.ndarray:
        """
        L^2 time norms per component with the normalized time measure.

        sum_{k != 0} |c^k|^2, where the modes past the attained cutoff are
        replaced by their asymptotic terms and summed through polygamma values.
        """
        head = 2.0 * np.sum(np.abs(self.coefficients[: self.attained_k]) ** 2, axis=0)
        if include_tail:
            start = self.attained_k + 1
            beta = self.params.beta
            head = head + 2.0 * np.abs(self.leading) ** 2 * special.polygamma(1, start) / beta ** 2
            head = head + np.abs(self.drift) ** 2 * special.polygamma(3, start) / (3.0 * beta ** 4)
        return np.sqrt(head)

    def quadrature_norms(self, r: float, order: int = 8) -> np.ndarray:
        """L^r time norms per component by composite Gauss-Legendre on (0, T)."""
        period = self.params.period
        panels = max(16, 2 * self.attained_k)
        nodes, weights = _composite_gauss(np.linspace(0.0, period, panels + 1), order)
        values = self.synthesize(nodes)
        mean = np.tensordot(weights, np.abs(values) ** r, axes=([0], [0])) / period
        return mean ** (1.0 / r)

    @classmethod
    def combine(cls, tables: Sequence["ModeTable"], weights: Sequence[float]) -> "ModeTable":
        first = tables[0]
        return cls(
            params=first.params,
            trunc=first.trunc,
            coefficients=sum(w * tab.coefficients for tab, w in zip(tables, weights)),
            leading=sum(w * tab.leading for tab, w in zip(tables, weights)),
            drift=sum(w * tab.drift for tab, w in zip(tables, weights)),
        )


def _coefficient_rows(points: np.ndarray, params: KernelParams, k_max: int,
                      workers: Optional[int]) -> np.ndarray:
    """c^k at flat points, shape (k_max, P, n, n)."""
    ks = np.arange(1, k_max + 1)
    if params.is_stokes:
        return -mode_matrices(ks, points, params)

    def one(point):
        return laplace_mode_coefficients(ks, point, params)["coefficients"]

    if workers and workers > 1 and points.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, points))
    else:
        rows = [one(point) for point in points]
    return np.stack(rows, axis=1)


def build_mode_table(x, params: KernelParams, trunc: Optional[TruncationSpec] = None,
                     workers: Optional[int] = None) -> ModeTable:
    """Mode table of Gamma_perp at points x of shape (..., n), flattened to P points."""
    trunc = trunc or TruncationSpec()
    pts, _ = as_points(x, params.n)
    flat = pts.reshape(-1, params.n)
    coefficients = _coefficient_rows(flat, params, trunc.k_max, workers)
    leading = laplace_hessian(flat, params)
    drift = -params.lam * laplace_third_derivative(flat, params)[:, 0]
    table = ModeTable(params=params, trunc=trunc, coefficients=coefficients, leading=leading, drift=drift)
    logger.debug("mode table at %d points: K = %d, last remainder %.2e",
                 flat.shape[0], table.attained_k, table.last_mode_norm)
    return table


def build_gradient_table(x, params: KernelParams, trunc: Optional[TruncationSpec] = None,
                         workers: Optional[int] = None, relative_step: float = 1e-2) -> ModeTable:
    """
    Mode table of grad Gamma_perp, components (d, j, l) = d_d Gamma_perp_jl.

    Fourth-order central differences in x applied to whole tables; the
    coefficients, A0 and A1 are all linear in the same stencil.
    """
    trunc = trunc or TruncationSpec()
    pts, r = as_points(x, params.n)
    n = params.n
    flat = pts.reshape(-1, n)
    steps = relative_step * r.reshape(-1)
    offsets = np.eye(n)[None, :, None, :] * (steps[:, None, None, None] * _FD_STENCIL[None, None, :, None])
    shifted = flat[:, None, None, :] + offsets  # (P, d, s, n)
    base = build_mode_table(shifted.reshape(-1, n), params, replace(trunc, tail_tol=np.inf), workers)

    def differentiate(values: np.ndarray, lead_axes: int) -> np.ndarray:
        shape = values.shape[:lead_axes] + (flat.shape[0], n, _FD_STENCIL.size, n, n)
        values = values.reshape(shape)
        scale = steps.reshape((1,) * lead_axes + (-1, 1, 1, 1))
        return np.tensordot(values, _FD_WEIGHTS, axes=([lead_axes + 2], [0])) / scale

    return ModeTable(
        params=params,
        trunc=trunc,
        coefficients=differentiate(base.coefficients, 1),
        leading=differentiate(base.leading, 0),
        drift=differentiate(base.drift, 0),
    )


def gamma_perp(t, x, params: KernelParams, trunc: Optional[TruncationSpec] = None,
               method: str = "modes", workers: Optional[int] = None, n_periods: int = 64) -> Dict:
    """
    Gamma_perp(t, x), the periodic part of the velocity kernel.

    Args:
        t: time(s), reduced modulo T; at t = 0 the midpoint of the jump is returned
        x: point(s) of shape (..., n), x != 0
        params: kernel parameters
        trunc: mode cutoff ('modes' only)
        method: 'modes' (Fourier synthesis) or 'heat' (periodized heat representation)

    Returns:
        Dict with 'value' of shape t.shape + x.shape[:-1] + (n, n), 'attained_k',
        'last_mode_norm', 'truncation_warning' and 'method'.
    """
    if method not in PERP_METHODS:
        raise DomainError(f"unknown method {method!r}; choose from {PERP_METHODS}")
    pts, _ = as_points(x, params.n)
    t = np.asarray(t, dtype=float)
    n = params.n
    if method == "heat":
        value = periodized_gamma_perp(t.reshape(t.shape + (1,) * (pts.ndim - 1)), pts, params, n_periods)
        return {"value": value, "attained_k": None, "last_mode_norm": None,
                "truncation_warning": False, "method": method}

    table = build_mode_table(pts, params, trunc, workers)
    value = table.synthesize(t.ravel()).reshape(t.shape + pts.shape[:-1] + (n, n))
    return {
        "value": value,
        "attained_k": table.attained_k,
        "last_mode_norm": table.last_mode_norm,
        "truncation_warning": table.truncation_warning,
        "method": method,
    }


def gamma_perp_time_norm(x, params: KernelParams, trunc: Optional[TruncationSpec] = None,
                         r: float = 2.0, method: str = "parseval", include_tail: bool = True,
                         workers: Optional[int] = None) -> Dict:
    """
    ||Gamma_perp(., x)||_{L^r(T)}, maximum over the tensor components.

    r = 2 defaults to Parseval; method='quadrature' uses Gauss-Legendre in
    time for any r >= 1.
    """
    if r < 1:
        raise DomainError(f"time exponent must be >= 1, got {r}")
    if method not in ("parseval", "quadrature"):
        raise DomainError(f"unknown norm method {method!r}")
    if method == "parseval" and r != 2:
        method = "quadrature"
    pts, _ = as_points(x, params.n)
    table = build_mode_table(pts, params, trunc, workers)
    per_component = table.parseval_norms(include_tail) if method == "parseval" else table.quadrature_norms(r)
    norms = per_component.reshape(per_component.shape[0], -1).max(axis=1).reshape(pts.shape[:-1])
    return {
        "norm": norms[()] if norms.ndim == 0 else norms,
        "attained_k": table.attained_k,
        "last_mode_norm": table.last_mode_norm,
        "truncation_warning": table.truncation_warning,
        "method": method,
    }


def decay_fit(direction, radii, params: KernelParams, trunc: Optional[TruncationSpec] = None,
              deriv_order: int = 0, r: float = 2.0, workers: Optional[int] = None) -> Dict:
    """
    Least-squares slope of log ||D^a Gamma_perp(., rho e)||_{L^r(T)} against log rho.

    Returns:
        Dict with 'slope', 'intercept', 'r_value', 'stderr', the expected slope
        -(n + deriv_order), a DataFrame 'table' (radius, norm) and the
        truncation diagnostics of the underlying mode table.
    """
    if deriv_order not in (0, 1):
        raise DomainError(f"deriv_order must be 0 or 1, got {deriv_order}")
    direction = np.asarray(direction, dtype=float)
    length = np.linalg.norm(direction)
    if direction.shape != (params.n,) or length == 0:
        raise DomainError("direction must be a nonzero vector of length n")
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise DomainError("radii must be positive, strictly increasing, at least two values")

    points = radii[:, None] * (direction / length)[None, :]
    builder = build_gradient_table if deriv_order == 1 else build_mode_table
    table = builder(points, params, trunc, workers)
    if r == 2:
        per_component = table.parseval_norms()
    else:
        per_component = table.quadrature_norms(r)
    norms = per_component.reshape(radii.size, -1).max(axis=1)
    fit = stats.linregress(np.log(radii), np.log(norms))
    logger.info("decay fit n=%d lam=%g order=%d: slope %.3f (expected %d)",
                params.n, params.lam, deriv_order, fit.slope, -(params.n + deriv_order))
    return {
        "slope": float(fit.slope),
        "intercept": float(fit.intercept),
        "r_value": float(fit.rvalue),
        "stderr": float(fit.stderr),
        "expected_slope": -(params.n + deriv_order),
        "table": pd.DataFrame({"radius": radii, "norm": norms}),
        "attained_k": table.attained_k,
        "truncation_warning": table.truncation_warning,
    }


def _probe_breaks(shells: np.ndarray, outer: float, floor: float) -> np.ndarray:
    """Breakpoints on [0, outer]: 0, geometric from floor, and the shell radii."""
    levels = int(np.ceil(np.log2(outer / floor))) + 1
    geometric = outer * 2.0 ** (-np.arange(levels, dtype=float))
    return np.unique(np.concatenate(([0.0], geometric[geometric >= floor], shells, [outer])))


def _frobenius_power(values: np.ndarray, q: float, axes: int) -> np.ndarray:
    flat = values.reshape(values.shape[: values.ndim - axes] + (-1,))
    return np.linalg.norm(flat, axis=-1) ** q


def critical_exponent(n: int, deriv_order: int = 0) -> float:
    """(n + 2) / (n + a): |D^a Gamma_perp|^q is locally integrable exactly below it."""
    return (n + 2.0) / (n + deriv_order)


def probe_exponents(n: int, deriv_order: int = 0, offset: float = 0.4) -> Tuple[float, float]:
    """Exponents on either side of the critical one, the lower kept above 1."""
    critical = critical_exponent(n, deriv_order)
    low = critical - offset if critical - offset > 1.0 else 0.5 * (1.0 + critical)
    return low, critical + offset


def lq_probe(q: float, params: KernelParams, shells, deriv_order: int = 0,
             outer_radius: float = 1.0, order: int = 8, angular_nodes: int = 8,
             n_periods: int = 64) -> Dict:
    """
    Partial integrals of |D^a Gamma_perp|^q near the space-time origin.

    For each eps in shells the region {|x| <= outer_radius, t in (-T/2, T/2)}
    minus the parabolic cylinder {|x| < eps, |t| < eps^2} is integrated with
    the normalized time measure. Gamma_perp comes from the periodized heat
    representation, which has no mode truncation. For lam = 0 the Frobenius
    norm is radial; for lam != 0 it is axisymmetric about e_1.

    Returns:
        Dict with the DataFrame 'table' (eps, integral), the fitted 'slope' of
        log I against log eps, the 'critical_q' (n+2)/(n+a) and the
        'expected_slope' min(0, (n+2) - (n+a) q).
    """
    if deriv_order not in (0, 1):
        raise DomainError(f"deriv_order must be 0 or 1, got {deriv_order}")
    if not q > 1:
        raise DomainError(f"q must exceed 1, got {q}")
    shells = np.asarray(shells, dtype=float)
    if shells.size < 2 or np.any(np.diff(shells) >= 0):
        raise DomainError("shells must be strictly decreasing, at least two values")
    if shells[0] >= outer_radius or shells[-1] <= 0:
        raise DomainError("shells must lie in (0, outer_radius)")
    if shells[-1] < PROBE_RESOLUTION:
        raise QuadratureResolutionError(
            f"shell {shells[-1]:.1e} is finer than the probe resolution {PROBE_RESOLUTION:.0e}")

    n = params.n
    period = params.period
    smallest = shells[-1]
    r_breaks = _probe_breaks(shells, outer_radius, 1e-3 * smallest)
    t_half = _probe_breaks(shells ** 2, 0.5 * period, 1e-4 * smallest ** 2)
    t_breaks = np.concatenate((-t_half[:0:-1], t_half))
    r_nodes, r_weights = _composite_gauss(r_breaks, order)
    t_nodes, t_weights = _composite_gauss(t_breaks, order)

    if params.is_stokes:
        directions = np.eye(n)[:1]
        angle_weights = np.array([2.0 * np.pi ** (n / 2.0) / special.gamma(n / 2.0)])
    else:
        theta, theta_w = _composite_gauss(np.linspace(0.0, np.pi, 3), angular_nodes // 2)
        directions = np.zeros((theta.size, n))
        directions[:, 0] = np.cos(theta)
        directions[:, 1] = np.sin(theta)
        sub_sphere = 2.0 * np.pi ** ((n - 1) / 2.0) / special.gamma((n - 1) / 2.0)
        angle_weights = sub_sphere * np.sin(theta) ** (n - 2) * theta_w

    pts = r_nodes[None, :, None] * directions[:, None, :]  # (A, R, n)
    times = t_nodes[:, None, None]

    def evaluate(points):
        return periodized_gamma_perp(times, points[None], params, n_periods)

    if deriv_order == 0:
        density = _frobenius_power(evaluate(pts), q, 2)
    else:
        scale = np.minimum(r_nodes[None, :], np.sqrt(np.abs(t_nodes))[:, None])
        steps = 1e-3 * scale[:, None, :, None]  # (T, 1, R, 1)
        grads = []
        for d in range(n):
            shift = steps * np.eye(n)[d]
            plus = periodized_gamma_perp(times, pts[None] + shift, params, n_periods)
            minus = periodized_gamma_perp(times, pts[None] - shift, params, n_periods)
            grads.append((plus - minus) / (2.0 * steps[..., None]))
        density = _frobenius_power(np.stack(grads, axis=-3), q, 3)

    # density: (T, A, R)
    weights = (t_weights[:, None, None] / period) * angle_weights[None, :, None] \
        * (r_weights * r_nodes ** (n - 1))[None, None, :]
    cells = weights * density
    integrals = []
    for eps in shells:
        excluded = (np.abs(t_nodes)[:, None, None] < eps ** 2) & (r_nodes[None, None, :] < eps)
        integrals.append(float(np.sum(np.where(excluded, 0.0, cells))))
    integrals = np.asarray(integrals)

    fit = stats.linregress(np.log(shells), np.log(integrals))
    critical = critical_exponent(n, deriv_order)
    logger.info("lq probe n=%d q=%g order=%d: slope %.3f (critical q %.3f)",
                n, q, deriv_order, fit.slope, critical)
    return {
        "table": pd.DataFrame({"eps": shells, "integral": integrals}),
        "slope": float(fit.slope),
        "critical_q": critical,
        "expected_slope": min(0.0, (n + 2.0) - (n + deriv_order) * q),
        "bounded": bool(q < critical),
    }


def gamma_tp_velocity(t, x, params: KernelParams, trunc: Optional[TruncationSpec] = None,
                      method: str = "modes", workers: Optional[int] = None) -> Dict:
    """Full time-periodic velocity kernel Gamma(x) + Gamma_perp(t, x)."""
    perp = gamma_perp(t, x, params, trunc, method=method, workers=workers)
    steady = steady_velocity_kernel(x, params)
    result = dict(perp)
    result["steady"] = steady
    result["value"] = steady + perp["value"]
    return result
