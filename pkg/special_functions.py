"""
Complex special functions used by every kernel in the package.

The upper-half-plane square root, Hankel functions of the first kind
H^(1)_nu and the modified Bessel function K_nu, all restricted to the
orders nu in {0, 1/2, 1, 3/2, ...} that appear as nu = (n - 2) / 2.

Half-integer orders are evaluated from their elementary closed forms.
Integer orders use the J + iY power series inside SWITCH_RADIUS and the
large-argument asymptotic expansion outside it. Inside the radius, points
with Im z above SERIES_MAX_IMAG go through K_nu(-iz) instead: J and Y grow
like exp(Im z) there while H^(1) decays, and the series loses the difference.
"""

import logging
from dataclasses import dataclass
from math import factorial
from typing import Union

import numpy as np
from scipy import special

from kernel_errors import DomainError

logger = logging.getLogger(__name__)

# |z| at which integer-order Hankel switches from series to asymptotics
SWITCH_RADIUS = 12.0

# above this Im z the series cancels; H^(1)_nu(z) = (2/(pi i)) i^(-nu) K_nu(-iz)
SERIES_MAX_IMAG = 1.5

# K_nu switches: series below, cosh-integral trapezoid between, asymptotics above
K_SERIES_LIMIT = 2.0
K_ASYMPTOTIC_LIMIT = 17.0

_SERIES_TERMS = 80
_ASYMPTOTIC_TERMS = 60

ArrayLike = Union[complex, float, np.ndarray]


@dataclass(frozen=True)
class HalfIntegerOrder:
    """Order nu = twice_order / 2, stored exactly."""

    twice_order: int

    def __post_init__(self):
        if self.twice_order < 0:
            raise DomainError(f"order must be nonnegative, got {self.twice_order}/2")

    @property
    def value(self) -> float:
        return self.twice_order / 2.0

    @property
    def is_integer(self) -> bool:
        return self.twice_order % 2 == 0

    @classmethod
    def from_value(cls, nu: float) -> "HalfIntegerOrder":
        twice = 2.0 * float(nu)
        if abs(twice - round(twice)) > 1e-12:
            raise DomainError(f"order {nu} is not a multiple of 1/2")
        return cls(int(round(twice)))

    @classmethod
    def for_dimension(cls, n: int) -> "HalfIntegerOrder":
        """nu = (n - 2) / 2, the order attached to dimension n."""
        if n < 2:
            raise DomainError(f"dimension must be >= 2, got {n}")
        return cls(n - 2)


def _twice(nu: Union[HalfIntegerOrder, float, int]) -> int:
    """Signed twice-order; negative orders are allowed internally."""
    if isinstance(nu, HalfIntegerOrder):
        return nu.twice_order
    twice = 2.0 * float(nu)
    if abs(twice - round(twice)) > 1e-12:
        raise DomainError(f"order {nu} is not a multiple of 1/2")
    return int(round(twice))


def _unwrap(values: np.ndarray):
    return values[()] if values.ndim == 0 else values


def sqrt_upper(z: ArrayLike) -> ArrayLike:
    """
    Square root with nonnegative imaginary part.

    When both roots are real (z real positive) the root with positive
    real part is returned.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("sqrt_upper is undefined at z = 0")
    w = np.sqrt(z)
    flip = (w.imag < 0) | ((w.imag == 0) & (w.real < 0))
    return _unwrap(np.where(flip, -w, w))


def _check_argument(z: np.ndarray):
    if np.any(z == 0):
        raise DomainError("Hankel functions are singular at z = 0")
    if np.any(z.imag < -1e-13 * np.abs(z)):
        raise DomainError("hankel1 requires Im(z) >= 0")


def _half_integer_hankel(m: int, z: np.ndarray) -> np.ndarray:
    """H^(1)_{m+1/2}(z) for m >= 0 from the terminating spherical form."""
    total = np.zeros_like(z)
    for k in range(m + 1):
        coeff = factorial(m + k) / (factorial(k) * factorial(m - k))
        total = total + (1j ** k) * coeff / (2.0 * z) ** k
    return np.sqrt(2.0 / (np.pi * z)) * (-1j) ** (m + 1) * np.exp(1j * z) * total


def _integer_hankel_series(nu: int, z: np.ndarray) -> np.ndarray:
    """J_nu + i Y_nu from the ascending series (nu >= 0 integer)."""
    half = z / 2.0
    quarter_sq = half * half
    log_half = np.log(half)

    # J_nu and the digamma-weighted series share the same running term
    term = half ** nu / factorial(nu)
    psi_k = special.digamma(1.0)
    psi_nk = special.digamma(nu + 1.0)
    j_sum = term.copy()
    y_tail = (psi_k + psi_nk) * term
    for k in range(1, _SERIES_TERMS):
        term = term * (-quarter_sq) / (k * (k + nu))
        psi_k += 1.0 / k
        psi_nk += 1.0 / (k + nu)
        j_sum = j_sum + term
        y_tail = y_tail + (psi_k + psi_nk) * term

    y_head = np.zeros_like(z)
    if nu > 0:
        inv = half ** (-nu)
        for k in range(nu):
            y_head = y_head + factorial(nu - k - 1) / factorial(k) * quarter_sq ** k
        y_head = y_head * inv

    y_val = -y_head / np.pi + (2.0 / np.pi) * log_half * j_sum - y_tail / np.pi
    return j_sum + 1j * y_val


def _asymptotic_coefficients(nu: float, count: int) -> np.ndarray:
    coeffs = np.empty(count)
    coeffs[0] = 1.0
    four_nu_sq = 4.0 * nu * nu
    for k in range(1, count):
        coeffs[k] = coeffs[k - 1] * (four_nu_sq - (2 * k - 1) ** 2) / (8.0 * k)
    return coeffs


def _truncated_asymptotic_sum(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Sum coeffs[k] * w**k, stopping each entry at its smallest term."""
    total = np.zeros_like(w)
    term = np.ones_like(w)
    previous = np.full(w.shape, np.inf)
    active = np.ones(w.shape, dtype=bool)
    for k, c in enumerate(coeffs):
        if k > 0:
            term = term * w
        contribution = c * term
        size = np.abs(contribution)
        active &= size < previous
        if c == 0.0:
            break
        total = np.where(active, total + contribution, total)
        previous = np.where(active, size, previous)
        if not active.any():
            break
    return total


def _integer_hankel_asymptotic(nu: int, z: np.ndarray) -> np.ndarray:
    coeffs = _asymptotic_coefficients(float(nu), _ASYMPTOTIC_TERMS)
    phase = np.exp(1j * (z - nu * np.pi / 2.0 - np.pi / 4.0))
    series = _truncated_asymptotic_sum(coeffs, 1j / z)
    return np.sqrt(2.0 / (np.pi * z)) * phase * series


def _integer_hankel_rotated(nu: int, z: np.ndarray) -> np.ndarray:
    """H^(1)_nu(z) = (2/(pi i)) i^(-nu) K_nu(-iz) for Im z > 0."""
    return 2.0 / (np.pi * 1j) * (1j) ** (-nu) * _integer_k_quadrature(nu, -1j * z, step=0.01)


def _hankel_signed(twice: int, z: np.ndarray) -> np.ndarray:
    """H^(1) of order twice/2 for any sign of the order."""
    if twice < 0:
        # H_{-nu} = exp(i pi nu) H_nu
        return np.exp(1j * np.pi * (-twice) / 2.0) * _hankel_signed(-twice, z)
    if twice % 2 == 1:
        return _half_integer_hankel((twice - 1) // 2, z)
    nu = twice // 2
    inside = np.abs(z) < SWITCH_RADIUS
    rotated = inside & (z.imag > SERIES_MAX_IMAG)
    small = inside & ~rotated
    out = np.empty_like(z)
    if small.any():
        out[small] = _integer_hankel_series(nu, z[small])
    if rotated.any():
        out[rotated] = _integer_hankel_rotated(nu, z[rotated])
    if (~inside).any():
        out[~inside] = _integer_hankel_asymptotic(nu, z[~inside])
    return out


def hankel1(nu: Union[HalfIntegerOrder, float], z: ArrayLike) -> ArrayLike:
    """
    Hankel function of the first kind H^(1)_nu(z).

    Args:
        nu: half-integer order (HalfIntegerOrder or a float multiple of 1/2)
        z: complex argument(s) with Im(z) >= 0, z != 0

    Returns:
        Complex value(s) with the shape of z.
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_argument(z_arr)
    values = _hankel_signed(_twice(nu), z_arr.ravel()).reshape(z_arr.shape)
    return values[0] if np.ndim(z) == 0 else values


def hankel1_derivative(nu: Union[HalfIntegerOrder, float], z: ArrayLike) -> ArrayLike:
    """d/dz H^(1)_nu(z) = H^(1)_{nu-1}(z) - (nu/z) H^(1)_nu(z)."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_argument(z_arr)
    twice = _twice(nu)
    flat = z_arr.ravel()
    lower = _hankel_signed(twice - 2, flat)
    same = _hankel_signed(twice, flat)
    values = (lower - (twice / 2.0) / flat * same).reshape(z_arr.shape)
    return values[0] if np.ndim(z) == 0 else values


def hankel1_power_series(nu: float, z: ArrayLike) -> ArrayLike:
    """
    Reference H^(1)_nu from ascending J_{+-nu} series, any non-integer nu.

    Slow and only accurate for moderate |z|; used to cross-check the
    closed forms.
    """
    z = np.asarray(z, dtype=complex)
    if abs(nu - round(nu)) < 1e-12:
        return _unwrap(_integer_hankel_series(abs(int(round(nu))), np.atleast_1d(z)).reshape(z.shape))

    def bessel_j(order):
        half = z / 2.0
        total = np.zeros_like(z)
        term_base = -(half * half)
        power = np.ones_like(z)
        for k in range(_SERIES_TERMS):
            total = total + power * special.rgamma(k + order + 1.0) / factorial(k)
            power = power * term_base
        return half ** order * total

    j_pos = bessel_j(nu)
    j_neg = bessel_j(-nu)
    y = (j_pos * np.cos(nu * np.pi) - j_neg) / np.sin(nu * np.pi)
    return _unwrap(j_pos + 1j * y)


def _half_integer_k(m: int, x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x)
    for k in range(m + 1):
        total = total + factorial(m + k) / (factorial(k) * factorial(m - k)) / (2.0 * x) ** k
    return np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) * total


def _integer_k_series(nu: int, x: np.ndarray) -> np.ndarray:
    half = x / 2.0
    quarter_sq = half * half
    term = half ** nu / factorial(nu)
    psi_k = special.digamma(1.0)
    psi_nk = special.digamma(nu + 1.0)
    i_sum = term.copy()
    tail = (psi_k + psi_nk) * term
    for k in range(1, _SERIES_TERMS):
        term = term * quarter_sq / (k * (k + nu))
        psi_k += 1.0 / k
        psi_nk += 1.0 / (k + nu)
        i_sum = i_sum + term
        tail = tail + (psi_k + psi_nk) * term

    head = np.zeros_like(x)
    if nu > 0:
        for k in range(nu):
            head = head + factorial(nu - k - 1) / factorial(k) * (-quarter_sq) ** k
        head = 0.5 * half ** (-nu) * head
    sign = -1.0 if nu % 2 == 0 else 1.0
    return head + sign * np.log(half) * i_sum + (-sign) * 0.5 * tail


def _integer_k_quadrature(nu: int, x: np.ndarray, step: float = 0.05) -> np.ndarray:
    # trapezoid on int_0^inf exp(-x cosh t) cosh(nu t) dt; analytic integrand, Re x > 0
    t = np.arange(0.0, 8.0 + step, step)
    weights = np.full(t.shape, step)
    weights[0] = step / 2.0
    integrand = np.exp(-np.outer(x, np.cosh(t))) * np.cosh(nu * t)
    return integrand @ weights


def _integer_k_asymptotic(nu: int, x: np.ndarray) -> np.ndarray:
    coeffs = _asymptotic_coefficients(float(nu), _ASYMPTOTIC_TERMS)
    return np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) * _truncated_asymptotic_sum(coeffs, 1.0 / x)


def bessel_k(nu: Union[HalfIntegerOrder, float], x: ArrayLike) -> ArrayLike:
    """
    Modified Bessel function of the second kind K_nu(x) for x > 0.

    Args:
        nu: half-integer order; negative orders are folded by K_{-nu} = K_nu
        x: positive real argument(s)
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x_arr > 0)):
        raise DomainError("bessel_k requires x > 0")
    twice = abs(_twice(nu))
    flat = x_arr.ravel()
    if twice % 2 == 1:
        out = _half_integer_k((twice - 1) // 2, flat)
    else:
        order = twice // 2
        out = np.empty_like(flat)
        low = flat <= K_SERIES_LIMIT
        high = flat >= K_ASYMPTOTIC_LIMIT
        mid = ~(low | high)
        if low.any():
            out[low] = _integer_k_series(order, flat[low])
        if mid.any():
            out[mid] = _integer_k_quadrature(order, flat[mid])
        if high.any():
            out[high] = _integer_k_asymptotic(order, flat[high])
    out = out.reshape(x_arr.shape)
    return out[0] if np.ndim(x) == 0 else out
