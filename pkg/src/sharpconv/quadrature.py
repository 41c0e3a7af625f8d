"""Log-domain quadrature for peaked power-exponential integrals.

The integrals met here have the form

    int_S exp(-lam * (coef |y|^p + d y)) |y|^c  m(y) dy

with lam up to ~1e4, where the integrand is a narrow spike whose height
over- or underflows.  Everything is shifted by the log of the peak before
calling ``scipy.integrate.quad``.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, optimize

from .errors import DivergenceError, QuadratureError

# integrand is dropped once it falls e^-TAIL below its peak
TAIL = 60.0
EPSREL = 1e-13


def quad_checked(func, a, b, *, rtol=1e-8, epsrel=EPSREL, limit=400, **kw):
    """``quad`` that raises :class:`QuadratureError` on a poor error estimate."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(func, a, b, epsabs=0.0, epsrel=epsrel, limit=limit, **kw)
    if not math.isfinite(val) or err > rtol * abs(val) + 1e-300:
        raise QuadratureError(f"quadrature on [{a:.6g}, {b:.6g}] did not converge", abserr=err)
    return val, err


def _peak(lam, coef, p, d, c):
    """Maximizer of h(u) = -lam (coef u^p + d u) + c log u on u > 0, or 0.0."""
    # critical points solve g(u) = u h'(u) = 0; g is convex with g(0) = -c
    def g(u):
        return lam * (coef * p * u ** p + d * u) - c

    if c > 0:
        if d == 0:
            return (c / (lam * coef * p)) ** (1.0 / p)
        hi = 1.0
        while g(hi) < 0:
            hi *= 2.0
        return optimize.brentq(g, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=2000)
    if d >= 0:
        return 0.0
    # c <= 0 < -d: the interior critical point is the larger root of g
    u_min = (-d / (coef * p * p)) ** (1.0 / (p - 1.0))  # minimizer of g
    if g(u_min) >= 0:
        return 0.0
    hi = 2.0 * max(u_min, 1.0)
    while g(hi) < 0:
        hi *= 2.0
    return optimize.brentq(g, u_min, hi, xtol=1e-300, rtol=1e-15, maxiter=2000)


def _log_half_line(lam, coef, p, d, c, extra, rtol):
    """log int_0^inf exp(-lam (coef u^p + d u)) u^c exp(extra(u)) du."""

    def h(u):
        if u <= 0.0:
            return -math.inf if c > 0 else (math.inf if c < 0 else 0.0)
        return -lam * (coef * u ** p + d * u) + c * math.log(u)

    u_star = _peak(lam, coef, p, d, c)
    if u_star > 0.0:
        h_star = h(u_star)
        curv = lam * coef * p * (p - 1.0) * u_star ** (p - 2.0) + c / u_star ** 2
        width = 1.0 / math.sqrt(curv) if curv > 0 else u_star
        # a nearly flat peak (c -> 0+) would give an enormous width
        width = min(width, max(u_star, (1.0 / (lam * coef)) ** (1.0 / p)))
    else:
        # peak at the origin: use the value at a small reference scale
        u_ref = (1.0 / (lam * coef)) ** (1.0 / p)
        if d > 0:
            u_ref = min(u_ref, 1.0 / (lam * d))
        h_star = max(h(u_ref), -lam * (coef * u_ref ** p + d * u_ref))
        width = u_ref

    upper = max(u_star, width)
    step = width
    while h(upper) > h_star - TAIL:
        upper += step
        step *= 2.0
    lower = 0.0
    if u_star > 0.0 and c > 0 and h(1e-300) < h_star - TAIL:
        lo, hi = 0.0, u_star
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if h(mid) < h_star - TAIL:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-3 * width:
                break
        lower = lo

    def body(u):
        val = h(u) - h_star
        if extra is not None:
            val += extra(u)
        return math.exp(val) if val > -745.0 else 0.0

    cuts = sorted({x for x in (lower, u_star - 8 * width, u_star - 2 * width, u_star,
                               u_star + 2 * width, u_star + 8 * width, upper)
                   if lower <= x <= upper})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        if a == 0.0 and c != 0.0:
            # u = s^(1/(c+1)) turns u^c du into ds/(c+1)
            e = 1.0 / (c + 1.0)

            def sub(s, e=e):
                u = s ** e
                val = -lam * (coef * u ** p + d * u) - h_star
                if extra is not None:
                    val += extra(u)
                return math.exp(val) * e if val > -745.0 else 0.0

            val, _ = quad_checked(sub, 0.0, b ** (c + 1.0), rtol=rtol)
        else:
            val, _ = quad_checked(body, a, b, rtol=rtol)
        total += val
    if not total > 0.0 or not math.isfinite(total):
        raise DivergenceError("integral vanished or diverged")
    return h_star + math.log(total)


def log_laplace_power(coef, p, d, lam, c=0.0, support="full_line", extra=None, rtol=1e-9):
    """log of int_S exp(-lam (coef |y|^p + d y)) |y|^c exp(extra(y)) dy.

    Parameters
    ----------
    coef, p : float
        Positive coefficient and exponent (p > 1) of the power term.
    d : float
        Linear drift.
    lam : float
        Positive scale.
    c : float
        Power weight, c > -1.
    support : {"full_line", "half_line_positive"}
    extra : callable, optional
        Log of an additional factor, evaluated at y.
    """
    if not (coef > 0 and lam > 0 and p > 1 and c > -1):
        raise DivergenceError(f"integral diverges for coef={coef}, lam={lam}, p={p}, c={c}")
    parts = [_log_half_line(lam, coef, p, d, c, extra, rtol)]
    if support == "full_line":
        neg = None if extra is None else (lambda u: extra(-u))
        parts.append(_log_half_line(lam, coef, p, -d, c, neg, rtol))
    elif support != "half_line_positive":
        raise ValueError(f"unknown support {support!r}")
    top = max(parts)
    return top + math.log(math.fsum(math.exp(x - top) for x in parts))


def logsumexp(values) -> float:
    values = np.asarray(values, dtype=float)
    top = np.max(values)
    return float(top + np.log(np.sum(np.exp(values - top))))
