"""Brute-force convolution densities on power curves.

Independent of the Gamma-function series: 2-fold densities come from the
explicit change of variables (y, y') -> (y + y', psi(y) + psi(y')), 3-fold
densities from one more quadrature over y, and L^2 norms from the slice
tau = 1 using homogeneity.  The only shared ingredient with the series
code is the curve itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .curve import CurveFamily, Parity
from .errors import BoundaryError, DomainError, QuadratureError
from .quadrature import log_laplace_power
from .trial import Support, TrialFunction, log_trial_norm_sq

__all__ = [
    "AlphaSolve",
    "CurveMeasure",
    "NormRatio",
    "OddTerms",
    "solve_alpha",
    "twofold_density",
    "triple_density",
    "boundary_value",
    "boundary_limit",
    "triple_norm_ratio",
    "bilinear_decay",
    "odd_expansion_terms",
    "in_continuity_region",
]

_SERIES_T = 0.5
_SERIES_TERMS = 64
GL_NODES = 48


# --- the pair equation psi(c - alpha) + psi(c + alpha) = v --------------------

@lru_cache(maxsize=64)
def _binom_series(p: float):
    """Coefficients 2 binom(p, k) (k even >= 2) and 2 binom(p-1, k) (k odd)."""
    even = np.zeros(_SERIES_TERMS + 1)
    odd = np.zeros(_SERIES_TERMS + 1)
    b_p, b_q = 1.0, 1.0
    for k in range(1, _SERIES_TERMS + 1):
        b_p *= (p - k + 1) / k
        b_q *= (p - 1 - k + 1) / k
        if k % 2 == 0:
            even[k] = 2.0 * b_p
        else:
            odd[k] = 2.0 * b_q
    return even[::-1].copy(), odd[::-1].copy()


def _psi(p, parity, y):
    r = np.abs(y) ** p
    if parity is Parity.ODD:
        return np.where(y < 0, -r, r)
    return r


def _dpsi(p, parity, y):
    d = p * np.abs(y) ** (p - 1.0)
    if parity is Parity.EVEN:
        return np.where(y < 0, -d, d)
    return d


def _pair_excess(p, parity, c, alpha):
    """G = psi(c-a) + psi(c+a) - 2 psi(c) and D = psi'(c+a) - psi'(c-a), for c >= 0.

    For a < c/2 both come from the binomial series in t = a/c, which has
    no cancellation as a -> 0.
    """
    c = np.asarray(c, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = np.where(c > 0, alpha / np.where(c > 0, c, 1.0), np.inf)
    small = t < _SERIES_T
    G = _psi(p, parity, c - alpha) + _psi(p, parity, c + alpha) - 2.0 * _psi(p, parity, c)
    D = _dpsi(p, parity, c + alpha) - _dpsi(p, parity, c - alpha)
    if np.any(small):
        even, odd = _binom_series(p)
        ts = t[small]
        cs = c[small]
        G = np.array(G, dtype=float, copy=True)
        D = np.array(D, dtype=float, copy=True)
        G[small] = cs ** p * np.polyval(even, ts)
        D[small] = p * cs ** (p - 1.0) * np.polyval(odd, ts)
    if parity is Parity.ODD:
        # for a > 2c, psi(c+a) + psi(c-a) = a^p ((1+r)^p - (1-r)^p) with r = c/a: two small terms of opposite sign
        wide = (c > 0) & (alpha > 2.0 * c)
        if np.any(wide):
            a_w = alpha[wide] if alpha.ndim else alpha
            r = c[wide] / a_w
            G = np.array(G, dtype=float, copy=True)
            D = np.array(D, dtype=float, copy=True)
            G[wide] = a_w ** p * (np.expm1(p * np.log1p(r)) - np.expm1(p * np.log1p(-r))) - 2.0 * c[wide] ** p
            D[wide] = p * a_w ** (p - 1.0) * (np.expm1((p - 1.0) * np.log1p(r)) - np.expm1((p - 1.0) * np.log1p(-r)))
    return G, D


def _solve_alpha_vec(p, parity, c, F):
    """alpha > 0 with G(alpha) = F, vectorized; c >= 0 and F > 0."""
    c = np.asarray(c, dtype=float)
    F = np.asarray(F, dtype=float)
    lo = np.zeros_like(F)
    hi = c + (F + 2.0 * np.abs(c) ** p) ** (1.0 / p)
    for _ in range(200):
        g_hi, _ = _pair_excess(p, parity, c, hi)
        short = g_hi < F
        if not np.any(short):
            break
        lo = np.where(short, hi, lo)
        hi = np.where(short, 2.0 * hi, hi)
    curv = np.where(c > 0, p * (p - 1.0) * np.where(c > 0, c, 1.0) ** (p - 2.0), np.inf)
    with np.errstate(divide="ignore"):
        guess = np.sqrt(F / curv)
    flat = (F / 2.0) ** (1.0 / p)
    alpha = np.where((guess > lo) & (guess < hi) & np.isfinite(guess), guess, np.minimum(flat, 0.5 * (lo + hi)))
    alpha = np.clip(alpha, lo, hi)
    alpha = np.where((alpha <= lo) | (alpha >= hi), 0.5 * (lo + hi), alpha)
    for _ in range(100):
        G, D = _pair_excess(p, parity, c, alpha)
        r = G - F
        lo = np.where(r < 0, alpha, lo)
        hi = np.where(r > 0, alpha, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = r / D
        new = alpha - step
        bad = ~((new >= lo) & (new <= hi) & np.isfinite(new))
        new = np.where(bad, 0.5 * (lo + hi), new)
        # Newton converges quadratically, so a step this small leaves alpha at full precision
        done = (~bad & (np.abs(new - alpha) <= 1e-9 * np.abs(new))) | (r == 0)
        alpha = new
        if np.all(done):
            break
    G, D = _pair_excess(p, parity, c, alpha)
    return alpha, D


@dataclass(frozen=True)
class AlphaSolve:
    u: float
    v: float
    alpha: float
    jacobian: float
    residual: float

    @property
    def pair(self) -> tuple:
        return (self.u / 2.0 - self.alpha, self.u / 2.0 + self.alpha)


def solve_alpha(p: float, parity, u: float, v: float) -> AlphaSolve:
    """Half-separation alpha of the pair y, y' = u/2 -+ alpha on the curve.

    Solves psi(u/2 - alpha) + psi(u/2 + alpha) = v for alpha > 0 by
    safeguarded Newton iteration and returns the Jacobian
    1/|psi'(u/2 + alpha) - psi'(u/2 - alpha)| of the pair map.
    """
    curve = CurveFamily(p, parity)
    p, parity = curve.p, curve.parity
    u, v = float(u), float(v)
    sign = 1.0
    if parity is Parity.ODD:
        if u == 0.0:
            raise BoundaryError("odd curve: pairs with u = 0 all have v = 0")
        if u < 0:
            # psi is odd, so (u, v) -> (-u, -v) maps pairs to pairs
            u, v, sign = -u, -v, -1.0
    c = abs(u) / 2.0
    F = v - 2.0 * curve.psi(c)
    if not F > 1e-14 * max(1.0, abs(v)):
        raise BoundaryError(f"(u, v) = ({sign * u:g}, {sign * v:g}) is not inside the 2-fold support")
    alpha, D = _solve_alpha_vec(p, parity, np.array([c]), np.array([F]))
    alpha, D = float(alpha[0]), float(D[0])
    G, _ = _pair_excess(p, parity, np.array([c]), np.array([alpha]))
    res = float(G[0]) - F
    return AlphaSolve(sign * u, sign * v, alpha, 1.0 / abs(D), res)


# --- measures -------------------------------------------------------------------

@dataclass(frozen=True)
class CurveMeasure:
    """|y|^q exp(-lam (psi(y) + drift y)) 1_S(y) delta(s - psi(y)) dy ds.

    ``q`` is the total power on the projection measure; the natural
    weight is (p-2)/3.  A trial f with amplitude |y|^b against sigma_p
    gives q = b + (p-2)/6.
    """

    curve: CurveFamily
    q: float | None = None
    lam: float = 0.0
    drift: float = 0.0
    support: Support = Support.FULL_LINE

    def __post_init__(self):
        if not isinstance(self.curve, CurveFamily):
            object.__setattr__(self, "curve", CurveFamily(self.curve))
        if self.q is None:
            object.__setattr__(self, "q", self.curve.weight_exponent)
        if not self.q > -1.0:
            raise DomainError(f"weight power must exceed -1, got {self.q}")
        if self.lam < 0:
            raise DomainError("lam must be nonnegative")
        object.__setattr__(self, "support", Support(self.support))

    @classmethod
    def from_trial(cls, trial: TrialFunction, parity=Parity.EVEN) -> "CurveMeasure":
        return cls(CurveFamily(trial.p, parity), trial.weight_power + (trial.p - 2.0) / 6.0,
                   trial.lam, trial.drift, trial.support)

    @property
    def p(self) -> float:
        return self.curve.p

    @property
    def half(self) -> bool:
        return self.support is Support.HALF_LINE_POSITIVE

    def density(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            val = np.abs(y) ** self.q * np.exp(-self.lam * (_psi(self.p, self.curve.parity, y) + self.drift * y))
        if self.half:
            val = np.where(y >= 0, val, 0.0)
        return val

    def homogeneous(self) -> "CurveMeasure":
        return CurveMeasure(self.curve, self.q, 0.0, 0.0, self.support)


def twofold_density(m: CurveMeasure, u: float, v: float, g: CurveMeasure | None = None) -> float:
    """Density of m * g at (u, v), strictly inside the 2-fold support."""
    g = m if g is None else g
    sol = solve_alpha(m.p, m.curve.parity, u, v)
    y1, y2 = sol.pair
    val = float(m.density(y1) * g.density(y2) + m.density(y2) * g.density(y1))
    return val * sol.jacobian


# --- 3-fold density ---------------------------------------------------------------

def _check_triple_support(p, xi, tau):
    if not tau > 3.0 ** (1.0 - p) * abs(xi) ** p:
        raise BoundaryError(f"(xi, tau) = ({xi:g}, {tau:g}) is outside the interior of E_p")


@lru_cache(maxsize=8)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _pdiff(p, x, d):
    """|x + d|^p - |x|^p, accurate when |d| << |x|."""
    x = np.broadcast_to(np.asarray(x, dtype=float), np.shape(d))
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = d / np.where(x != 0, x, 1.0)
        near = (x != 0) & (np.abs(r) < 0.5)
        acc = np.abs(x) ** p * np.expm1(p * np.log1p(np.where(near, r, 0.0)))
    return np.where(near, acc, np.abs(x + d) ** p - np.abs(x) ** p)


def _root_or_end(f, a, b, end):
    """Root of f on [a, b]; ``end`` if rounding hides the sign change there."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0 or (fa > 0) == (fb > 0):
        return end if (fa > 0) == (fb > 0) else b
    return optimize.brentq(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _k3_pieces(p, half, xi, tau):
    """Integration pieces in y as (a, b, exponent_at_a, exponent_at_b, a_is_fold, b_is_fold)."""
    def F(y):
        return tau - abs(y) ** p - 2.0 * abs((xi - y) / 2.0) ** p

    def Z(y):
        return tau - abs(y) ** p - abs(xi - y) ** p

    ym = xi / 3.0
    W = 2.0 * (tau ** (1.0 / p) + abs(xi)) + 1.0
    y_lo = optimize.brentq(F, ym - W, ym, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    y_hi = optimize.brentq(F, ym, ym + W, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    zs = []
    if Z(xi / 2.0) > 0:
        zs = [_root_or_end(Z, y_lo, xi / 2.0, y_lo), _root_or_end(Z, xi / 2.0, y_hi, y_hi)]
    # (position, is_fold, is_weight_zero)
    marks = [(y_lo, True, False), (y_hi, True, False)]
    marks += [(z, False, True) for z in zs]
    if y_lo < 0.0 < y_hi:
        marks.append((0.0, False, True))
    marks.sort()
    scale = max(abs(y_lo), abs(y_hi), 1e-300)
    merged = []
    for pos, fold, wz in marks:
        if merged and abs(pos - merged[-1][0]) <= 1e-13 * scale:
            prev = merged[-1]
            merged[-1] = (prev[0], prev[1] or fold, prev[2] or wz)
        else:
            merged.append((pos, fold, wz))
    segments = list(zip(merged[:-1], merged[1:]))
    if half:
        lo_keep = max(y_lo, 0.0)
        kept = []
        for left, right in segments:
            if right[0] <= lo_keep:
                continue
            if zs and left[0] >= zs[0] - 1e-13 * scale and right[0] <= zs[1] + 1e-13 * scale:
                continue  # one pair member would be negative
            kept.append((left, right))
        segments = kept
    # distance from each mark to its outer neighbour, for grading near clustered marks
    gaps = {}
    for i, (pos, _, _) in enumerate(merged):
        left = pos - merged[i - 1][0] if i > 0 else math.inf
        right = merged[i + 1][0] - pos if i + 1 < len(merged) else math.inf
        gaps[pos] = (left, right)
    return segments, gaps


def _k3_panel(p, q, xi, tau, pos, fold, delta, jac, w):
    y = pos + delta
    c = (xi - y) / 2.0
    if fold:
        # F vanishes at the anchor; build it from accurate power differences
        Fv = -_pdiff(p, pos, delta) - 2.0 * _pdiff(p, (xi - pos) / 2.0, -delta / 2.0)
    else:
        Fv = tau - np.abs(y) ** p - 2.0 * np.abs(c) ** p
    ok = Fv > 0
    if not np.any(ok):
        return 0.0
    ca = np.abs(c[ok])
    alpha, D = _solve_alpha_vec(p, Parity.EVEN, ca, Fv[ok])
    y1 = ca - alpha
    y2 = ca + alpha
    with np.errstate(divide="ignore"):
        val = 2.0 * (np.abs(y1) * y2) ** q / np.abs(D) * np.abs(y[ok]) ** q
    return float(np.sum(w[ok] * jac[ok] * val))


def _k3_core(p, q, half, xi, tau, n=GL_NODES):
    """3-fold density of |y|^q nu_p (restricted to y >= 0 when ``half``) at (xi, tau)."""
    if half and (xi <= 0.0 or tau >= xi ** p):
        return 0.0
    s, w = _gl(n)
    total = 0.0
    segments, gaps = _k3_pieces(p, half, xi, tau)
    for left, right in segments:
        a, b = left[0], right[0]
        mid = 0.5 * (a + b)
        for anchor, end, direction in ((left, mid, 1.0), (right, mid, -1.0)):
            pos, fold, wz = anchor
            e = (-0.5 if fold else 0.0) + (q if wz else 0.0)
            m = 2.0 / (1.0 + e)
            h = abs(end - pos)
            # a singular mark at distance g behind the anchor: grade geometrically away from it
            g = gaps[pos][0] if direction > 0 else gaps[pos][1]
            cuts = [0.0]
            while g < h and cuts[-1] < h:
                cuts.append(min(2.0 * cuts[-1] + g, h))
            if cuts[-1] < h:
                cuts.append(h)
            for k, (r0, r1) in enumerate(zip(cuts[:-1], cuts[1:])):
                if k == 0:
                    delta = direction * r1 * s ** m
                    jac = m * r1 * s ** (m - 1.0)
                else:
                    delta = direction * (r0 + (r1 - r0) * s)
                    jac = np.full_like(s, r1 - r0)
                total += _k3_panel(p, q, xi, tau, pos, fold, delta, jac, w)
    return total


def in_continuity_region(p: float, xi: float, tau: float) -> bool:
    """Whether the 3-fold density is known to be continuous at (xi, tau).

    For p >= 2 this is the interior of E_p; for 1 < p < 2 only the band
    3^(1-p)|xi|^p < tau < 2^(1-p)|xi|^p is covered.
    """
    inside = tau > 3.0 ** (1.0 - p) * abs(xi) ** p
    if p >= 2.0:
        return inside
    return inside and tau < 2.0 ** (1.0 - p) * abs(xi) ** p


def triple_density(m: CurveMeasure, xi: float, tau: float, n: int = GL_NODES) -> float:
    """Density of m * m * m at (xi, tau).

    The exponential factor exp(-lam (tau + drift xi)) splits off exactly,
    leaving the homogeneous density of |y|^q nu_p.  Odd curves are
    supported only through their half-line restriction, where they agree
    with the even curve.
    """
    p = m.p
    xi, tau = float(xi), float(tau)
    if m.curve.parity is Parity.ODD and not m.half:
        raise DomainError("full-line odd curves are not supported; restrict to half_line_positive")
    _check_triple_support(p, xi, tau)
    val = _k3_core(p, m.q, m.half, xi, tau, n)
    if m.lam:
        val *= math.exp(-m.lam * (tau + m.drift * xi))
    return val


def boundary_value(m: CurveMeasure, xi: float, eps: float, n: int = GL_NODES) -> float:
    """Triple density at (xi, 3^(1-p)|xi|^p (1 + eps))."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    if xi == 0:
        raise DomainError("xi must be nonzero")
    return triple_density(m, xi, 3.0 ** (1.0 - m.p) * abs(xi) ** m.p * (1.0 + eps), n)


def boundary_limit(m: CurveMeasure, xi: float, eps=(1e-2, 1e-3), n: int = GL_NODES) -> float:
    """Richardson extrapolation to eps -> 0 assuming an O(eps) approach."""
    e1, e2 = eps
    h1 = boundary_value(m, xi, e1, n)
    h2 = boundary_value(m, xi, e2, n)
    return (e1 * h2 - e2 * h1) / (e1 - e2)


# --- L^2 norms on the slice tau = 1 ----------------------------------------------

@dataclass(frozen=True)
class NormRatio:
    value: float
    abserr: float
    log_value: float

    def __float__(self) -> float:
        return self.value


def _slice_weight(trial: TrialFunction, a: float):
    """log L(s) with L(s) = int_0^inf tau^((1+6a)/p) exp(-2 lam (tau + d s tau^(1/p))) dtau."""
    p = trial.p

    def log_L(s):
        # tau = y^p
        return math.log(p) + log_laplace_power(1.0, p, trial.drift * s, 2.0 * trial.lam,
                                               p + 6.0 * a, "half_line_positive")

    return log_L


def _slice_points(p, trial, lo, hi):
    pts = [x for x in (-(2.0 ** (1.0 - 1.0 / p)), 0.0, 2.0 ** (1.0 - 1.0 / p)) if lo < x < hi]
    if trial.drift != 0.0:
        width = 1.0 / (2.0 * trial.lam * p * abs(trial.drift) * 3.0 ** (1.0 / p) + 1e-300)
        end = hi if trial.drift < 0 else lo
        for k in (1.0, 4.0, 16.0, 64.0, 256.0):
            x = end - math.copysign(k * width, trial.drift * -1.0)
            if lo < x < hi:
                pts.append(x)
    return sorted(set(pts))


def triple_norm_ratio(trial: TrialFunction, parity=Parity.EVEN, n: int = GL_NODES,
                      rtol: float = 1e-7) -> NormRatio:
    """||f sigma * f sigma * f sigma||_2^2 / ||f||_2^6 for an exponential trial f.

    The squared 3-fold density is integrated over the plane through
    xi = s tau^(1/p): the tau-integral at fixed s is one-dimensional and
    done in the log domain, and the s-integral by adaptive quadrature.
    """
    p = trial.p
    a = trial.weight_power - (p - 2.0) / 6.0
    q = (p - 2.0) / 3.0 + a
    half = trial.support is Support.HALF_LINE_POSITIVE
    if parity is Parity.ODD and not half:
        raise DomainError("odd curves need a half-line trial")
    s_max = 3.0 ** (1.0 - 1.0 / p)
    lo, hi = (1.0, s_max) if half else (-s_max, s_max)
    log_L = _slice_weight(trial, a)
    log_norm6 = 3.0 * log_trial_norm_sq(trial)
    # reference shift keeps the integrand O(1)
    ref = max(log_L(lo + 1e-9 * (hi - lo)), log_L(hi - 1e-9 * (hi - lo))) - log_norm6

    def body(s):
        if s <= lo or s >= hi:
            return 0.0
        k = _k3_core(p, q, half, s, 1.0, n)
        return k * k * math.exp(log_L(s) - log_norm6 - ref)

    pts = _slice_points(p, trial, lo, hi)
    with np.errstate(all="ignore"):
        val, err = integrate.quad(body, lo, hi, points=pts or None, limit=400,
                                  epsabs=0.0, epsrel=rtol)
    if not val > 0 or err > 5e-3 * val:
        raise QuadratureError("norm quadrature did not reach 0.5%", abserr=err)
    log_value = math.log(val) + ref
    return NormRatio(math.exp(log_value), err * math.exp(ref), log_value)


# --- bilinear decay of separated dyadic caps ------------------------------------

def bilinear_decay(p: float, k: int, k2: int, n: int = 64) -> float:
    """Hausdorff-Young majorant for indicators of the caps I_k and I_k2, normalized.

    Returns (int int w(y)^(3/4) w(y')^(3/4) |psi'(y) - psi'(y')|^(-1/2) dy dy')^(2/3)
    over I_k^bullet x I_k2^bullet, divided by ||1_{I_k^bullet}|| ||1_{I_k2^bullet}||.
    """
    curve = CurveFamily(p)
    if abs(k - k2) < 2:
        raise DomainError("caps must be separated by at least two dyadic steps")
    x, wts = np.polynomial.legendre.leggauss(n)
    x, wts = 0.5 * (x + 1.0), 0.5 * wts
    wexp = 0.75 * curve.weight_exponent

    def cap(j):
        return 2.0 ** j * (1.0 + x), 2.0 ** j * wts

    y, wy = cap(k)
    z, wz = cap(k2)
    total = 0.0
    for sy in (1.0, -1.0):
        for sz in (1.0, -1.0):
            Y = sy * y[:, None]
            Zz = sz * z[None, :]
            dj = np.abs(_dpsi(p, Parity.EVEN, Y) - _dpsi(p, Parity.EVEN, Zz))
            integrand = np.abs(Y) ** wexp * np.abs(Zz) ** wexp / np.sqrt(dj)
            total += float(wy @ integrand @ wz)
    norm = math.sqrt(2.0 * 2.0 ** k) * math.sqrt(2.0 * 2.0 ** k2)
    return total ** (2.0 / 3.0) / norm


# --- odd curves: the 4-fold / 2-fold cross term -----------------------------------

def _k2_half(p, q, u, v=1.0):
    """2-fold density of |y|^q nu_p restricted to y >= 0, at (u, v)."""
    if not (2.0 * (u / 2.0) ** p < v < u ** p):
        return 0.0
    c = u / 2.0
    F = v - 2.0 * c ** p
    alpha, D = _solve_alpha_vec(p, Parity.EVEN, np.array([c]), np.array([F]))
    y1, y2 = c - alpha[0], c + alpha[0]
    return float(2.0 * (y1 * y2) ** q / abs(D[0]))


def _k4_half(p, q, u, rtol=1e-6):
    """4-fold density of |y|^q nu_p on y >= 0 at (u, 1): int y^q K3(u - y, 1 - y^p) dy."""

    def g(y):
        xi, tau = u - y, 1.0 - y ** p
        if xi <= 0 or tau <= 3.0 ** (1.0 - p) * xi ** p or tau >= xi ** p:
            return 0.0
        return y ** q * _k3_core(p, q, True, xi, tau, 32)

    # the inner density switches regime where tau crosses c xi^p
    grid = np.linspace(0.0, min(u, 1.0), 401)[1:-1]
    marks = [0.0, min(u, 1.0)]
    for cst in (3.0 ** (1.0 - p), 2.0 ** (1.0 - p), 1.0):
        h = 1.0 - grid ** p - cst * (u - grid) ** p
        for i in np.nonzero(np.sign(h[:-1]) != np.sign(h[1:]))[0]:
            marks.append(optimize.brentq(lambda y: 1.0 - y ** p - cst * (u - y) ** p, grid[i], grid[i + 1]))
    marks = sorted(set(marks))
    total = 0.0
    for a, b in zip(marks[:-1], marks[1:]):
        if b - a <= 0:
            continue
        m = 0.5 * (a + b)
        if g(m) == 0.0:
            continue
        with np.errstate(all="ignore"):
            # algebraic endpoint weights absorb |y|^q at 0 and sqrt edges of the inner support
            val, _ = integrate.quad(g, a, b, epsabs=0.0, epsrel=rtol, limit=200)
        total += val
    return total


@lru_cache(maxsize=32)
def _k4_table(p: float, q: float, size: int):
    """Chebyshev interpolant of K4(u, 1) on the overlap [1, 2^(1-1/p)]."""
    lo, hi = 1.0, 2.0 ** (1.0 - 1.0 / p)
    k = np.arange(size)
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * (k + 0.5) / size)
    vals = np.array([_k4_half(p, q, u) for u in nodes])
    return np.polynomial.chebyshev.Chebyshev.fit(nodes, vals, size - 1, domain=[lo, hi])


@dataclass(frozen=True)
class OddTerms:
    A: float
    B: float
    log_B: float
    A_abserr: float


def odd_expansion_terms(p: float, g: TrialFunction, grid_size: int = 24) -> OddTerms:
    """A = ||g sigma^(*3)||^2 / ||g||^6 and B = <(g sigma)^(*4), (g sigma)^(*2)> / ||g||^6.

    ``g`` must live on the positive half-line.  Both pairings are
    integrated over the slice s = xi / tau^(1/p); the 4-fold density
    on the slice is tabulated once per (p, weight) with ``grid_size``
    Chebyshev nodes.  B is exponentially small for concentrated trials,
    so its logarithm is reported as well.
    """
    if g.support is not Support.HALF_LINE_POSITIVE:
        raise DomainError("odd expansion needs a trial supported on [0, inf)")
    if not math.isclose(g.p, p):
        raise DomainError("trial exponent does not match p")
    A = triple_norm_ratio(g, Parity.ODD)
    a = g.weight_power - (p - 2.0) / 6.0
    q = (p - 2.0) / 3.0 + a
    table = _k4_table(p, q, int(grid_size))
    s_top = 2.0 ** (1.0 - 1.0 / p)
    log_L = _slice_weight(g, a)
    log_norm6 = 3.0 * log_trial_norm_sq(g)
    ref = log_L(s_top) - log_norm6
    span = math.sqrt(s_top - 1.0)

    # s = s_top - t^2 removes the fold singularity of K2 at s_top
    def body(t):
        s = s_top - t * t
        if s <= 1.0 or t <= 0.0:
            return 0.0
        return 2.0 * t * _k2_half(p, q, s) * max(float(table(s)), 0.0) * math.exp(log_L(s) - log_norm6 - ref)

    pts = None
    if g.drift < 0:
        width = 1.0 / (2.0 * g.lam * p * abs(g.drift) * 2.0 ** (1.0 / p))
        pts = [math.sqrt(k * width) for k in (1.0, 4.0, 16.0, 64.0) if math.sqrt(k * width) < span]
    with np.errstate(all="ignore"):
        val, _ = integrate.quad(body, 0.0, span, points=pts, limit=400, epsabs=0.0, epsrel=1e-6)
    if val <= 0.0:
        return OddTerms(A.value, 0.0, -math.inf, A.abserr)
    log_B = math.log(val) + ref
    return OddTerms(A.value, math.exp(log_B), log_B, A.abserr)
