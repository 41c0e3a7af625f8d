"""Legendre-series lower bounds for the even-curve constant and critical exponents.

The trial function is f(y) = exp(-|y|^p) |y|^((p-2)/6 + a).  The triple
convolution of f sigma_p is exp(-tau) times a homogeneous density whose
slice tau = 1 (rescaled to t in [-1, 1]) is expanded in even Legendre
polynomials.  Every coefficient is a finite combination of the moments
I_2k(p, a), each a closed Gamma-function sum, so the partial sums are
exact lower bounds for the optimal constant C_p^6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from .curve import CurveFamily, Parity, check_exponent
from .density import DensityGrid
from .errors import DomainError, NoSignChangeError
from .specfun import legendre_all, log_gamma

__all__ = [
    "CurveFamily",
    "Parity",
    "MomentVector",
    "BoundReport",
    "CriticalSearch",
    "moment",
    "moment_vector",
    "legendre_coefficients",
    "series_prefactor",
    "series_bound",
    "threshold",
    "boundary_value",
    "margin",
    "profile",
    "critical_exponent",
    "bisect_critical_exponent",
    "gamma_ratio_bound",
]

DEFAULT_N = 15
MAX_N = 20
_LOG3 = math.log(3.0)
# decimal digits used for the moment sums and their alternating combinations
_WORKDPS = 40


def _check_a(p: float, a: float) -> float:
    a = float(a)
    if not math.isfinite(a) or a <= -(p + 1.0) / 6.0:
        raise DomainError(f"weight tweak must satisfy a > -(p+1)/6 = {-(p + 1) / 6:.6g}, got {a!r}")
    return a


def _check_order(N: int) -> int:
    if int(N) != N or N < 0:
        raise DomainError(f"truncation order must be a nonnegative integer, got {N!r}")
    if N > MAX_N:
        raise OverflowError(f"truncation order {N} exceeds the supported maximum {MAX_N}")
    return int(N)


@lru_cache(maxsize=256)
def _moments_mp(p: float, a: float, N: int) -> tuple:
    """I_2n(p, a) for n = 0..N as mpmath numbers at the working precision."""
    with mp.workdps(_WORKDPS):
        P, A = mp.mpf(p), mp.mpf(a)
        # g[j] = log( Gamma((p+1+6j+3a)/(3p)) / (2j)! )
        g = [mp.loggamma((P + 1 + 6 * j + 3 * A) / (3 * P)) - mp.loggamma(2 * j + 1)
             for j in range(N + 1)]
        out = []
        for n in range(N + 1):
            # all terms positive; descending order mirrors compensated double summation
            terms = sorted((mp.exp(g[k] + g[m] + g[n - k - m])
                            for k in range(n + 1) for m in range(n - k + 1)), reverse=True)
            # p^2 (2n+1+3a) Gamma((2n+1+3a)/p) written as p^3 Gamma(1 + (2n+1+3a)/p)
            pref = mp.exp(mp.log(8) + mp.loggamma(2 * n + 1)
                          - (1 - 1 / P) * (2 * n + 1) * mp.log(3)
                          - 3 * mp.log(P)
                          - mp.loggamma(1 + (2 * n + 1 + 3 * A) / P))
            out.append(pref * mp.fsum(terms))
        return tuple(out)


@dataclass(frozen=True)
class MomentVector:
    """Moments I_2k(p, a) = int_{-1}^{1} h(t) t^(2k) dt for k = 0..N."""

    p: float
    a: float
    entries: tuple

    @property
    def N(self) -> int:
        return len(self.entries) - 1

    def __getitem__(self, k: int) -> float:
        return self.entries[k]

    @property
    def values(self) -> np.ndarray:
        return np.array(self.entries)


def moment_vector(p: float, a: float = 0.0, N: int = DEFAULT_N) -> MomentVector:
    p = check_exponent(p)
    a = _check_a(p, a)
    N = _check_order(N)
    return MomentVector(p, a, tuple(float(x) for x in _moments_mp(p, a, N)))


def moment(n: int, p: float, a: float = 0.0) -> float:
    """I_2n(p, a), the 2n-th moment of the rescaled triple-convolution slice."""
    if int(n) != n or n < 0:
        raise DomainError(f"moment index must be a nonnegative integer, got {n!r}")
    p = check_exponent(p)
    a = _check_a(p, a)
    return float(_moments_mp(p, a, int(n))[-1])


@lru_cache(maxsize=64)
def _binomial_table(N: int) -> tuple:
    """binom(2n, 2k) * binom(n + k - 1/2, 2n) for k <= n <= N, exact rationals."""
    rows = []
    for n in range(N + 1):
        row = []
        for k in range(n + 1):
            # binom(n+k-1/2, 2n) = prod_j (2(n+k-j) - 1) / (2^(2n) (2n)!)
            num = 1
            for j in range(2 * n):
                num *= 2 * (n + k - j) - 1
            row.append(Fraction(math.comb(2 * n, 2 * k) * num, 2 ** (2 * n) * math.factorial(2 * n)))
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=256)
def _coefficients_mp(p: float, a: float, N: int) -> tuple:
    with mp.workdps(_WORKDPS):
        moments = _moments_mp(p, a, N)
        table = _binomial_table(N)
        return tuple(mp.fsum(mp.mpf(b.numerator) / b.denominator * moments[k]
                             for k, b in enumerate(table[n]) if b)
                     for n in range(N + 1))


def legendre_coefficients(p: float, a: float = 0.0, N: int = DEFAULT_N) -> np.ndarray:
    """c_n = sum_k binom(2n,2k) binom(n+k-1/2,2n) I_2k(p,a) for n = 0..N.

    The Legendre coefficient of the slice is 2**(2n) * c_n.  The sum
    alternates in sign and cancels heavily, so it is formed at the
    extended working precision before rounding to double.
    """
    p = check_exponent(p)
    a = _check_a(p, a)
    N = _check_order(N)
    return np.array([float(c) for c in _coefficients_mp(p, a, N)])


def series_prefactor(p: float, a: float = 0.0) -> float:
    """3^(1-1/p) p^2 (1+6a) Gamma((1+6a)/p) / (8 Gamma((p+1+6a)/(3p))^3)."""
    p = check_exponent(p)
    a = _check_a(p, a)
    return math.exp((1.0 - 1.0 / p) * _LOG3 + 3.0 * math.log(p)
                    + log_gamma(1.0 + (1.0 + 6.0 * a) / p)
                    - math.log(8.0)
                    - 3.0 * log_gamma((p + 1.0 + 6.0 * a) / (3.0 * p)))


def gamma_ratio_bound(p: float) -> float:
    """4 Gamma((p+1)/(3p))^3 / (3^(1-1/p) p^2 Gamma(1/p)): the exponential-trial bound."""
    p = check_exponent(p)
    return math.exp(math.log(4.0) + 3.0 * log_gamma((p + 1.0) / (3.0 * p))
                    - (1.0 - 1.0 / p) * _LOG3 - 2.0 * math.log(p) - log_gamma(1.0 / p))


def threshold(p: float, parity: Parity | str = Parity.EVEN) -> float:
    """Concentration threshold 2pi/(sqrt3 p(p-1)) (even) or 5pi/(sqrt3 p(p-1)) (odd)."""
    p = check_exponent(p)
    factor = 2.0 if Parity(parity) is Parity.EVEN else 5.0
    return factor * math.pi / (math.sqrt(3.0) * p * (p - 1.0))


def boundary_value(p: float, a: float = 0.0) -> float:
    """Value of the weighted triple convolution on the slice tau = 1 at t = +-1.

    For a = 0 this is the even threshold; the extra weight |y|^a is
    evaluated at the concentration point y0 = 3^(-1/p).
    """
    return threshold(p) * 3.0 ** (-a)


@dataclass(frozen=True)
class BoundReport:
    p: float
    a: float
    N: int
    partial_sum: float
    per_term: tuple
    threshold: float
    margin: float
    coefficients: tuple = field(repr=False, default=())

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "a": self.a,
            "N": self.N,
            "partial_sum": self.partial_sum,
            "per_term": list(self.per_term),
            "threshold": self.threshold,
            "margin": self.margin,
        }


def series_bound(p: float, a: float = 0.0, N: int = DEFAULT_N) -> BoundReport:
    """Partial sum of the Legendre expansion of Phi_p(f): a lower bound for C_p^6."""
    p = check_exponent(p)
    a = _check_a(p, a)
    N = _check_order(N)
    c_mp = _coefficients_mp(p, a, N)
    c = [float(x) for x in c_mp]
    log_pref = math.log(series_prefactor(p, a))
    terms = []
    for n, cn in enumerate(c_mp):
        if cn == 0:
            terms.append(0.0)
            continue
        t = math.exp(log_pref + math.log(4 * n + 1) + (4 * n - 1) * math.log(2.0)
                     + 2.0 * float(mp.log(abs(cn))))
        if not math.isfinite(t):
            raise OverflowError(f"series term n={n} overflowed at p={p}, a={a}")
        terms.append(t)
    total = math.fsum(terms)
    thr = threshold(p)
    return BoundReport(p, a, N, total, tuple(terms), thr, total - thr, tuple(c))


def margin(p: float, a: float = 0.0, N: int = DEFAULT_N) -> float:
    return series_bound(p, a, N).margin


def profile(p: float, a: float = 0.0, N: int = DEFAULT_N, grid=None) -> DensityGrid:
    """Truncated Legendre reconstruction g_{p,N}(t) of the slice, normalized.

    Values are divided by the even threshold 2pi/(sqrt3 p(p-1)), the
    boundary value of the a = 0 slice, so the a = 0 profile tends to 1
    at t = +-1.  For a != 0 the limit is 3**(-a) (see ``boundary_value``).
    """
    p = check_exponent(p)
    a = _check_a(p, a)
    N = _check_order(N)
    t = np.linspace(-1.0, 1.0, 201) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise DomainError("profile grid must lie in [-1, 1]")
    c = legendre_coefficients(p, a, N)
    polys = legendre_all(2 * N, t)
    weights = np.array([(4 * n + 1) * 2.0 ** (2 * n - 1) * c[n] for n in range(N + 1)])
    values = weights @ polys[0::2]
    norm = threshold(p)
    return DensityGrid(("t",), t, values / norm, fold_count=3,
                       description=f"normalized slice profile p={p:g} a={a:g} N={N}",
                       meta={"p": p, "a": a, "N": N, "normalization": norm})


@dataclass(frozen=True)
class CriticalSearch:
    p_star: float
    iterations: int
    bracket: tuple
    margin_trace: tuple

    def as_dict(self) -> dict:
        return {
            "p_star": self.p_star,
            "iterations": self.iterations,
            "bracket": list(self.bracket),
            "margin_trace": [list(x) for x in self.margin_trace],
        }


def bisect_critical_exponent(a: float = 0.0, N: int = DEFAULT_N, bracket=(4.0, 5.5),
                             tol: float = 1e-6) -> CriticalSearch:
    """Bisection for the exponent where the series bound meets the even threshold."""
    lo, hi = (float(x) for x in bracket)
    if not lo < hi:
        raise DomainError(f"bracket must be increasing, got {bracket!r}")
    m_lo, m_hi = margin(lo, a, N), margin(hi, a, N)
    trace = [(lo, m_lo), (hi, m_hi)]
    if m_lo == 0.0:
        return CriticalSearch(lo, 0, (lo, hi), tuple(trace))
    if m_hi == 0.0:
        return CriticalSearch(hi, 0, (lo, hi), tuple(trace))
    if (m_lo > 0) == (m_hi > 0):
        raise NoSignChangeError(f"margin has the same sign at p={lo} ({m_lo:.3e}) and p={hi} ({m_hi:.3e})")
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        m_mid = margin(mid, a, N)
        trace.append((mid, m_mid))
        iterations += 1
        if m_mid == 0.0:
            lo = hi = mid
            break
        if (m_mid > 0) == (m_lo > 0):
            lo, m_lo = mid, m_mid
        else:
            hi = mid
    return CriticalSearch(0.5 * (lo + hi), iterations, tuple(float(x) for x in bracket), tuple(trace))


def critical_exponent(a: float = 0.0, N: int = DEFAULT_N, bracket=(4.0, 5.5)) -> float:
    return bisect_critical_exponent(a, N, bracket).p_star
