"""Special-function kernel: log-Gamma, signed binomials, Legendre polynomials."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061

# zeta(k) - 1 for k = 2..39; the tail decays like 2**-k.
_ZETA_M1 = tuple(float(zeta(k) - 1.0) for k in range(2, 40))
_SERIES_RADIUS = 0.25
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign == 0`` means the value is exactly zero; ``log_magnitude`` is then
    ``-inf`` and carries no information.  A power of two can be held apart
    in ``binary_exponent`` so that large magnitudes round-trip exactly:
    the value is then ``sign * exp(log_magnitude - binary_exponent ln 2) * 2**binary_exponent``.
    """

    log_magnitude: float
    sign: int
    binary_exponent: int = 0
    log_mantissa: float | None = None

    @classmethod
    def from_float(cls, x: float) -> "SignedLogValue":
        if x == 0.0:
            return cls(-math.inf, 0)
        m, e = math.frexp(abs(x))
        lm = math.log(m)
        return cls(lm + e * _LN2, 1 if x > 0 else -1, e, lm)

    def _parts(self):
        if self.log_mantissa is not None:
            return self.log_mantissa, self.binary_exponent
        e = int(round(self.log_magnitude / _LN2))
        return self.log_magnitude - e * _LN2, e

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        lm, e = self._parts()
        return self.sign * math.ldexp(math.exp(lm), e)

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue(-math.inf, 0)
        (la, ea), (lb, eb) = self._parts(), other._parts()
        lm, e = la + lb, ea + eb
        return SignedLogValue(lm + e * _LN2, self.sign * other.sign, e, lm)


def _lgamma1p(z: float) -> float:
    """ln Gamma(1 + z) for small |z|, accurate relative to the result."""
    s = 0.0
    for i in range(len(_ZETA_M1) - 1, -1, -1):
        k = i + 2
        s += (-1) ** k * _ZETA_M1[i] * z ** k / k
    return -math.log1p(z) + z * (1.0 - EULER_GAMMA) + s


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0.

    Uses ``math.lgamma`` away from the zeros at x = 1 and x = 2 and a
    (zeta(k) - 1) power series near them, so the relative error stays
    near machine precision everywhere on (0, 200].
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma requires finite x > 0, got {x!r}")
    if abs(x - 1.0) < _SERIES_RADIUS:
        return _lgamma1p(x - 1.0)
    if abs(x - 2.0) < _SERIES_RADIUS:
        return math.log1p(x - 2.0) + _lgamma1p(x - 2.0)
    return math.lgamma(x)


def log_factorial(n: int) -> float:
    if n < 0:
        raise DomainError(f"factorial of negative integer {n}")
    return log_gamma(n + 1.0)


def generalized_binomial(alpha: float, n: int) -> SignedLogValue:
    """binom(alpha, n) = alpha (alpha-1) ... (alpha-n+1) / n! as a signed log.

    The product is taken factor by factor so the sign is exact even when
    some ``alpha - j`` vanishes.
    """
    if not math.isfinite(alpha):
        raise DomainError(f"alpha must be finite, got {alpha!r}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    log_mag = 0.0
    sign = 1
    for j in range(n):
        factor = alpha - j
        if factor == 0.0:
            return SignedLogValue(-math.inf, 0)
        if factor < 0:
            sign = -sign
        log_mag += math.log(abs(factor)) - math.log(j + 1.0)
    return SignedLogValue(log_mag, sign)


def legendre_eval(n: int, t):
    """P_n(t) by the three-term recurrence.

    ``t`` may be a scalar or an array; every entry must lie in [-1, 1].
    """
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t_arr)) or np.any(np.abs(t_arr) > 1.0):
        raise DomainError("Legendre argument outside [-1, 1]")
    p_prev = np.ones_like(t_arr)
    if n == 0:
        return p_prev if t_arr.ndim else float(p_prev)
    p_cur = t_arr.copy()
    for k in range(1, n):
        p_prev, p_cur = p_cur, ((2 * k + 1) * t_arr * p_cur - k * p_prev) / (k + 1)
    return p_cur if t_arr.ndim else float(p_cur)


def legendre_all(n_max: int, t) -> np.ndarray:
    """Rows P_0(t), ..., P_{n_max}(t) by the same recurrence."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t_arr) > 1.0):
        raise DomainError("Legendre argument outside [-1, 1]")
    out = np.empty((n_max + 1, t_arr.size))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = t_arr
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 1) * t_arr * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_monomial_coefficients(n: int) -> np.ndarray:
    """Monomial coefficients of P_n from the explicit binomial formula.

    Entry k multiplies t**k:  2**n * binom(n, k) * binom((n + k - 1)/2, n).
    """
    coeffs = np.zeros(n + 1)
    for k in range(n + 1):
        b = generalized_binomial((n + k - 1) / 2.0, n)
        if b.sign:
            coeffs[k] = math.ldexp(math.comb(n, k) * b.value, n)
    return coeffs


def legendre_explicit(n: int, t):
    """P_n(t) evaluated from the explicit monomial form (test oracle)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1.0):
        raise DomainError("Legendre argument outside [-1, 1]")
    val = np.polynomial.polynomial.polyval(t_arr, legendre_monomial_coefficients(n))
    return val if t_arr.ndim else float(val)


@dataclass(frozen=True)
class LegendreBasis:
    """Legendre polynomials P_0..P_N with their monomial coefficient table."""

    max_degree: int
    coefficients: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.max_degree < 0:
            raise DomainError("max_degree must be >= 0")
        table = tuple(legendre_monomial_coefficients(n) for n in range(self.max_degree + 1))
        object.__setattr__(self, "coefficients", table)

    def __call__(self, n: int, t):
        if not 0 <= n <= self.max_degree:
            raise DomainError(f"degree {n} outside basis of size {self.max_degree}")
        return legendre_eval(n, t)

    def squared_norm(self, n: int) -> float:
        return 2.0 / (2 * n + 1)
