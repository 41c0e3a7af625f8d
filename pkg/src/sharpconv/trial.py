"""Exponential trial functions and the lower bounds they certify.

For a trial f(y) = exp(-lam (|y|^p + d y)) |y|^b, the triple convolution
F = f sigma * f sigma * f sigma equals exp(-lam (tau + d xi)) times a
density supported in E.  Pairing F with exp(-lam (tau + d xi)) 1_E and
applying Cauchy-Schwarz gives

    Phi(f) >= (int f |y|^((p-2)/6) exp(-lam(..)) dy)^6 / (||f||^6 int_E exp(-2 lam (tau + d xi)))

which for the natural weight b = (p-2)/6 reduces to ||f||^6 / int_E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy import integrate

from .bounds import threshold
from .curve import check_exponent
from .errors import DivergenceError, DomainError, QuadratureError
from .quadrature import log_laplace_power, quad_checked

__all__ = [
    "Support",
    "TrialFunction",
    "PerturbativeReport",
    "exp_trial_bound",
    "log_exp_trial_bound",
    "log_trial_norm_sq",
    "phi_lambda",
    "predicted_slope",
]


class Support(str, Enum):
    FULL_LINE = "full_line"
    HALF_LINE_POSITIVE = "half_line_positive"


@dataclass(frozen=True)
class TrialFunction:
    """f(y) = exp(-lam (|y|^p + drift y)) |y|^weight_power on the given support."""

    p: float
    lam: float
    drift: float = 0.0
    weight_power: float | None = None
    support: Support = Support.FULL_LINE

    def __post_init__(self):
        object.__setattr__(self, "p", check_exponent(self.p))
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"scale must be positive, got {self.lam!r}")
        if not math.isfinite(self.drift):
            raise DomainError(f"drift must be finite, got {self.drift!r}")
        if self.weight_power is None:
            object.__setattr__(self, "weight_power", (self.p - 2.0) / 6.0)
        if not self.weight_power > -0.5:
            raise DomainError(f"weight_power must exceed -1/2, got {self.weight_power!r}")
        object.__setattr__(self, "support", Support(self.support))

    def __call__(self, y: float) -> float:
        if y == 0.0 or (self.support is Support.HALF_LINE_POSITIVE and y < 0):
            return 0.0
        return math.exp(-self.lam * (abs(y) ** self.p + self.drift * y)) * abs(y) ** self.weight_power

    def log_value(self, y: float) -> float:
        if y == 0.0 or (self.support is Support.HALF_LINE_POSITIVE and y < 0):
            return -math.inf
        return -self.lam * (abs(y) ** self.p + self.drift * y) + self.weight_power * math.log(abs(y))

    def dilate(self, factor: float) -> "TrialFunction":
        """The trial y -> f(factor * y), up to the constant factor**weight_power."""
        if not factor > 0:
            raise DomainError("dilation factor must be positive")
        return TrialFunction(self.p, self.lam * factor ** self.p, self.drift * factor ** (1.0 - self.p),
                             self.weight_power, self.support)


def log_trial_norm_sq(trial: TrialFunction) -> float:
    """log ||f||_2^2."""
    return log_laplace_power(1.0, trial.p, trial.drift, 2.0 * trial.lam,
                             2.0 * trial.weight_power, trial.support.value)


def _log_support_integral(trial: TrialFunction) -> float:
    """log int_E exp(-2 lam (tau + d xi)) dxi dtau, tau integrated in closed form."""
    p, lam = trial.p, trial.lam
    k = 3.0 ** (1.0 - p)
    extra = None
    if trial.support is Support.HALF_LINE_POSITIVE:
        # E = {3^(1-p) xi^p <= tau <= xi^p}: upper limit contributes 1 - exp(-2 lam (1 - k) xi^p)
        def cap(x):
            return math.log(-math.expm1(-2.0 * lam * (1.0 - k) * abs(x) ** p))
        extra = cap
    return (log_laplace_power(k, p, trial.drift, 2.0 * lam, 0.0, trial.support.value, extra)
            - math.log(2.0 * lam))


def log_exp_trial_bound(trial: TrialFunction) -> float:
    """Natural log of :func:`exp_trial_bound`, finite even when the bound under/overflows."""
    log_den = _log_support_integral(trial)
    log_norm = log_trial_norm_sq(trial)
    natural = (trial.p - 2.0) / 6.0
    if math.isclose(trial.weight_power, natural, rel_tol=0.0, abs_tol=1e-15):
        out = 3.0 * log_norm - log_den
    else:
        log_pair = log_laplace_power(1.0, trial.p, trial.drift, 2.0 * trial.lam,
                                     trial.weight_power + natural, trial.support.value)
        out = 6.0 * log_pair - 3.0 * log_norm - log_den
    if not math.isfinite(out):
        raise DivergenceError(f"trial bound is not finite for {trial}")
    return out


def exp_trial_bound(trial: TrialFunction) -> float:
    """Certified lower bound for the sharp constant C_p^6 from one exponential trial.

    Examples
    --------
    >>> round(exp_trial_bound(TrialFunction(2.0, 1.0, 0.0, 0.0)), 10)
    1.8137993642
    """
    return math.exp(log_exp_trial_bound(trial))


# --- perturbative regime 1 < p < 2 ------------------------------------------

def _excess(x: float, p: float) -> float:
    """|1 + x|^p - 1 - p x, without cancellation for small x."""
    if abs(x) < 0.05:
        # binomial series; |x|^18 < 4e-24
        term, total = p * (p - 1.0) / 2.0 * x * x, 0.0
        for k in range(2, 20):
            total += term
            term *= (p - k) / (k + 1.0) * x
        return total
    return abs(1.0 + x) ** p - 1.0 - p * x


def _centered_integral(p, lam, mult, c):
    """int exp(-mult E(z)) |1 + z/sqrt(lam)|^c dz with E(z) = lam * excess(z/sqrt(lam))."""
    r = math.sqrt(lam)
    z0 = -r  # y = 0

    def expo(z):
        return mult * lam * _excess(z / r, p)

    def f(z):
        e = expo(z)
        return math.exp(-e) if e < 745.0 else 0.0

    cutoff = 45.0

    def reach(sign):
        z, step = 0.0, 1.0 / math.sqrt(mult * p * (p - 1.0))
        while expo(z) < cutoff:
            z += sign * step
            step *= 1.5
        return z

    hi, lo = reach(+1.0), reach(-1.0)
    core = [x for x in (-8.0, -3.0, 0.0, 3.0, 8.0)]
    total = 0.0
    if c == 0.0 or lo > z0:
        pts = sorted({x for x in core + [z0] if lo < x < hi} | {lo, hi})
        for a, b in zip(pts[:-1], pts[1:]):
            if c == 0.0:
                total += quad_checked(f, a, b, rtol=1e-10)[0]
            else:
                total += quad_checked(lambda z: f(z) * abs(1.0 + z / r) ** c, a, b, rtol=1e-10)[0]
        return total
    # |1 + z/r|^c = (|z - z0| / r)^c: algebraic endpoint weight at z0
    scale = r ** (-c)
    right = sorted({x for x in core if z0 < x < hi} | {hi})
    left_end = min(z0 + 1.0, right[0])
    val, err = integrate.quad(f, z0, left_end, weight="alg", wvar=(c, 0.0), epsabs=0.0, epsrel=1e-13)
    if err > 1e-10 * abs(val) + 1e-300:
        raise QuadratureError("singular piece did not converge", abserr=err)
    total += scale * val
    pts = sorted({left_end} | set(x for x in right if x > left_end))
    for a, b in zip(pts[:-1], pts[1:]):
        total += quad_checked(lambda z: f(z) * abs(1.0 + z / r) ** c, a, b, rtol=1e-10)[0]
    right_end = max(lo, z0 - 1.0)
    val, err = integrate.quad(f, right_end, z0, weight="alg", wvar=(0.0, c), epsabs=0.0, epsrel=1e-13)
    if err > 1e-10 * abs(val) + 1e-300:
        raise QuadratureError("singular piece did not converge", abserr=err)
    total += scale * val
    if lo < right_end:
        total += quad_checked(lambda z: f(z) * abs(1.0 + z / r) ** c, lo, right_end, rtol=1e-10)[0]
    return total


def predicted_slope(p: float) -> float:
    """pi (2-p)(2p-1) / (9 sqrt3 p^2 (p-1)^2): the first correction in 1/lambda."""
    return math.pi * (2.0 - p) * (2.0 * p - 1.0) / (9.0 * math.sqrt(3.0) * p ** 2 * (p - 1.0) ** 2)


@dataclass(frozen=True)
class PerturbativeReport:
    p: float
    lam: float
    phi_value: float
    limit_value: float
    slope_estimate: float
    predicted_slope: float

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda": self.lam,
            "phi_value": self.phi_value,
            "limit_value": self.limit_value,
            "slope_estimate": self.slope_estimate,
            "predicted_slope": self.predicted_slope,
        }


def _phi(p: float, lam: float) -> float:
    # y = 1 + z/sqrt(lam) in the numerator, xi = 3 (1 + z/sqrt(lam)) in the denominator;
    # the powers of lam cancel exactly and phi = N^3 / (3 D)
    num = _centered_integral(p, lam, 1.0, -(2.0 - p) / 3.0)
    den = _centered_integral(p, lam, 3.0, 0.0)
    return num ** 3 / (3.0 * den)


def phi_lambda(p: float, lam: float) -> PerturbativeReport:
    """Lower bound phi_p(lam) from the trial exp(-lam/2 (|y|^p - p y)) |y|^((p-2)/6).

    The slope is the finite difference of phi in the variable 1/lam
    between lam and 2 lam.
    """
    p = check_exponent(p)
    if not p < 2.0:
        raise DomainError(f"perturbative bound needs 1 < p < 2, got {p}")
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    value = _phi(p, lam)
    value2 = _phi(p, 2.0 * lam)
    slope = (value - value2) / (1.0 / lam - 0.5 / lam)
    return PerturbativeReport(p, lam, value, threshold(p), slope, predicted_slope(p))
