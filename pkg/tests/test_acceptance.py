"""One test per acceptance criterion, each at its stated tolerance and time budget."""

import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from sharpconv import bounds
from sharpconv.curve import CurveFamily
from sharpconv.errors import BoundaryError
from sharpconv.odd import odd_bound
from sharpconv.oracle import CurveMeasure, bilinear_decay, boundary_limit, triple_density, triple_norm_ratio
from sharpconv.trial import TrialFunction, phi_lambda, predicted_slope

PI_SQRT3 = math.pi / math.sqrt(3.0)


def _record(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


class _Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_criterion_01_p2_exactness():
    with _Clock() as clk:
        errs = [abs(bounds.series_bound(2.0, 0.0, N).partial_sum - PI_SQRT3) for N in range(16)]
        c = bounds.legendre_coefficients(2.0, 0.0, 10)
        ratio = float(np.max(np.abs(c[1:11])) / c[0])
    ok = max(errs) <= 1e-10 and ratio <= 1e-9 and clk.seconds < 1.0
    _record(1, ok, f"max |S_N - pi/sqrt3| = {max(errs):.2e}, max |c_n|/c_0 = {ratio:.2e}, {clk.seconds:.2f}s")


def test_criterion_02_critical_exponents():
    with _Clock() as c0:
        p0 = bounds.critical_exponent(0.0, 15, (4.0, 5.5))
    with _Clock() as c1:
        p1 = bounds.critical_exponent(7.0 / 15.0, 15, (4.0, 6.0))
    ok = abs(p0 - 4.803) <= 1e-3 and abs(p1 - 5.485) <= 1e-3 and c0.seconds < 10 and c1.seconds < 10
    _record(2, ok, f"p0 = {p0:.7f} ({c0.seconds:.1f}s), p1 = {p1:.7f} ({c1.seconds:.1f}s)")


def test_criterion_03_window():
    with _Clock() as clk:
        inside = {p: bounds.margin(p, 0.0, 15) for p in (2.5, 3.0, 4.0, 4.5)}
        outside = bounds.margin(5.5, 0.0, 15)
    ok = all(m > 0 for m in inside.values()) and outside < 0 and clk.seconds < 5
    detail = ", ".join(f"m({p:g}) = {m:+.3e}" for p, m in inside.items())
    _record(3, ok, f"{detail}, m(5.5) = {outside:+.3e}, {clk.seconds:.2f}s")


def test_criterion_04_first_term():
    g = math.gamma
    worst = 0.0
    for p in (2.5, 3.0, 4.0, 5.0):
        ref = 4.0 * g((p + 1.0) / (3.0 * p)) ** 3 / (3.0 ** (1.0 - 1.0 / p) * p * p * g(1.0 / p))
        worst = max(worst, abs(bounds.series_bound(p, 0.0, 0).partial_sum / ref - 1.0))
    _record(4, worst <= 1e-11, f"max relative error {worst:.2e}")


def test_criterion_05_boundary_value():
    with _Clock() as clk:
        errs = {}
        for p in (2.5, 3.0, 4.0):
            lim = boundary_limit(CurveMeasure(CurveFamily(p)), 3.0)
            errs[p] = abs(lim / bounds.threshold(p) - 1.0)
    ok = max(errs.values()) <= 1e-2 and clk.seconds < 60
    detail = ", ".join(f"p={p:g}: {e:.1e}" for p, e in errs.items())
    _record(5, ok, f"relative error {detail}, {clk.seconds:.1f}s")


def test_criterion_06_oracle_vs_series():
    with _Clock() as clk:
        errs = {}
        for p in (3.0, 4.0):
            ratio = triple_norm_ratio(TrialFunction(p, 1.0)).value
            errs[p] = abs(ratio / bounds.series_bound(p, 0.0, 15).partial_sum - 1.0)
    ok = max(errs.values()) <= 5e-3 and clk.seconds < 300
    detail = ", ".join(f"p={p:g}: {e:.1e}" for p, e in errs.items())
    _record(6, ok, f"relative difference {detail}, {clk.seconds:.1f}s")


def test_criterion_07_perturbative():
    p = 1.5
    with _Clock() as clk:
        far = phi_lambda(p, 1e4)
        near = phi_lambda(p, 1e3)
    limit = 8.0 * math.pi / (3.0 * math.sqrt(3.0))
    rel = far.phi_value / limit - 1.0
    slope_err = abs(near.slope_estimate / predicted_slope(p) - 1.0)
    ok = 0 < rel <= 5e-3 and slope_err <= 0.05 and clk.seconds < 120
    _record(7, ok, f"phi(1e4)/limit - 1 = {rel:.2e}, slope error {slope_err:.2%}, {clk.seconds:.1f}s")


def test_criterion_08_odd_curves():
    with _Clock() as clk:
        strict = odd_bound(1.5, 500.0)
        probe = [odd_bound(3.0, lam) for lam in (50.0, 200.0, 1000.0)]
    ok = strict.margin > 0 and all(r.margin < 0 for r in probe) and clk.seconds < 600
    detail = ", ".join(f"{r.margin:+.2e}" for r in probe)
    _record(8, ok, f"margin(1.5, 500) = {strict.margin:+.2e}; p=3 margins {detail}; {clk.seconds:.0f}s")


def test_criterion_09_bilinear_decay():
    p = 3.0
    with _Clock() as clk:
        vals = [bilinear_decay(p, 0, -k) for k in (2, 4, 6)]
    # two dyadic steps separate consecutive samples
    factors = [math.sqrt(vals[i + 1] / vals[i]) for i in range(2)]
    limit = 2.0 ** (-(p - 1.0) / 6.0) * 1.15
    ok = max(factors) <= limit and clk.seconds < 60
    _record(9, ok, f"per-step factors {factors[0]:.4f}, {factors[1]:.4f} <= {limit:.4f}, {clk.seconds:.2f}s")


def test_criterion_10_geometry():
    with _Clock() as clk:
        even = 0.0
        homog = 0.0
        rejected = 0
        probes = 0
        rng = np.random.default_rng(2024)
        for p in (2.0, 3.0, 4.0):
            m = CurveMeasure(CurveFamily(p))
            s = 3.0 ** (1.0 - 1.0 / p)
            for t in (0.1, 0.5, 0.9):
                base = triple_density(m, s * t, 1.0)
                even = max(even, abs(base - triple_density(m, -s * t, 1.0)))
                for lam in (0.5, 2.0, 10.0):
                    homog = max(homog, abs(triple_density(m, lam * s * t, lam ** p) / base - 1.0))
            for _ in range(100):
                xi = rng.uniform(-5.0, 5.0)
                tau = rng.uniform(0.0, 1.0) * 3.0 ** (1.0 - p) * abs(xi) ** p
                probes += 1
                try:
                    triple_density(m, xi, tau)
                except BoundaryError:
                    rejected += 1
    ok = even <= 1e-10 and homog <= 1e-6 and rejected == probes and clk.seconds < 120
    _record(10, ok, f"evenness {even:.1e}, homogeneity {homog:.1e}, rejected {rejected}/{probes}, {clk.seconds:.1f}s")
