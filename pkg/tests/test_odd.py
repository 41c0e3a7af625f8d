import math

import numpy as np
import pytest
from scipy import integrate, stats

from sharpconv import bounds
from sharpconv.curve import Parity
from sharpconv.errors import DomainError
from sharpconv.odd import SCAN_COLUMNS, conjecture_scan, odd_bound, odd_trial
from sharpconv.oracle import _k4_half, _solve_alpha_vec, odd_expansion_terms
from sharpconv.trial import Support, TrialFunction


class TestOddTrial:
    def test_shape(self):
        g = odd_trial(1.5, 10.0)
        assert g.support is Support.HALF_LINE_POSITIVE
        assert g.drift == -1.5 and g.weight_power == pytest.approx(-1.0 / 12.0)
        # exp(-lam (y^p - 1 - p (y - 1))) up to a constant: maximal at y = 1
        ys = np.linspace(0.5, 1.5, 101)
        assert ys[np.argmax([g.log_value(y) - g.weight_power * math.log(y) for y in ys])] == pytest.approx(1.0)

    def test_rejects(self):
        with pytest.raises(DomainError):
            odd_bound(3.0, 0.0)
        with pytest.raises(DomainError):
            odd_bound(1.0, 10.0)

    def test_expansion_needs_half_line(self):
        with pytest.raises(DomainError):
            odd_expansion_terms(3.0, TrialFunction(3.0, 1.0))


class TestScan:
    def test_empty_grid_rejected(self):
        for grids in (([], [1.0], [0.0]), ([2.0], [], [0.0]), ([2.0], [1.0], [])):
            with pytest.raises(DomainError):
                conjecture_scan(*grids)

    def test_small_p_rejected(self):
        with pytest.raises(DomainError):
            conjecture_scan([1.5], [1.0], [0.0])

    def test_row_fields_and_csv(self):
        table = conjecture_scan([2.0], [1.0, 3.0], [4.0])
        assert len(table.rows) == 2
        for row in table.rows:
            assert row["bound"] == pytest.approx(2.5 * row["A"] + 3.75 * row["B"], rel=1e-15)
            assert row["margin"] == pytest.approx(row["bound"] - row["threshold"], abs=1e-15)
        # lambda only rescales this family
        assert table.rows[0]["bound"] == pytest.approx(table.rows[1]["bound"], rel=1e-6)
        lines = table.to_csv().splitlines()
        assert lines[0].split(",") == list(SCAN_COLUMNS)
        assert float(lines[1].split(",")[5]) == table.rows[0]["bound"]

    @pytest.mark.slow
    def test_p2_approaches_from_below(self):
        table = conjecture_scan([2.0], [1.0], [0.0, 0.5, 1.0, 2.0, 4.0])
        best = table.best_margin()[2.0]
        thr = bounds.threshold(2.0, Parity.ODD)
        assert -0.15 * thr < best < 0
        assert all(r["B"] >= 0 for r in table.rows)

    @pytest.mark.slow
    def test_p3_all_negative(self):
        table = conjecture_scan([3.0], [1.0], [0.0, 1.0, 4.0])
        assert all(r["margin"] < 0 for r in table.rows)


@pytest.mark.slow
class TestOddBound:
    def test_strict_at_lambda_500(self):
        r = odd_bound(1.5, 500.0)
        assert r.margin > 0
        assert r.q_lower_bound > 2.5 * r.A - 1e-15
        assert r.invariant_ratio == pytest.approx(r.q_lower_bound / (math.pi / math.sqrt(3.0)), rel=1e-15)

    def test_strict_at_lambda_200(self):
        terms = odd_expansion_terms(1.5, odd_trial(1.5, 200.0))
        assert 2.5 * terms.A + 3.75 * terms.B > bounds.threshold(1.5, Parity.ODD)

    def test_concentration_limit(self):
        p = 1.5
        limit = bounds.threshold(p)
        a_mid = odd_expansion_terms(p, odd_trial(p, 500.0)).A
        a_big = odd_expansion_terms(p, odd_trial(p, 2000.0)).A
        assert a_big == pytest.approx(limit, rel=2e-2)
        assert a_mid > a_big > limit

    def test_cross_term_vanishes(self):
        p = 1.5
        b200 = odd_expansion_terms(p, odd_trial(p, 200.0)).B
        b2000 = odd_expansion_terms(p, odd_trial(p, 2000.0)).B
        assert b200 > 0 and b2000 >= 0
        assert b2000 / b200 < 0.5

    def test_probe_p3(self):
        reports = [odd_bound(3.0, lam) for lam in (50.0, 200.0, 1000.0)]
        margins = [r.margin for r in reports]
        assert all(m < 0 for m in margins)
        assert margins[0] < margins[1] < margins[2]
        assert all(r.invariant_ratio < 5.0 / 6.0 for r in reports)


def _direct_odd_functional(lam, n_batches=4, batch=1_000_000, seed=7):
    """Monte Carlo of ||f mu * f mu * f mu||^2 / ||f||^6 at p = 2, f(y) = exp(-lam (|y| - 1)^2).

    Pairs the 6-fold integral down to four sampled points and the closed
    form 2-fold density of the remaining two, with no use of the
    even/odd expansion.
    """
    p = 2.0
    sd = 1.0 / math.sqrt(2.0 * lam)
    f = lambda y: np.exp(-lam * (np.abs(y) - 1.0) ** 2)
    mass = 2.0 * integrate.quad(lambda y: f(y), 0, np.inf)[0]
    norm2 = 2.0 * integrate.quad(lambda y: f(y) ** 2, 0, np.inf)[0]
    psi = lambda y: y * np.abs(y)
    rng = np.random.default_rng(seed)
    est = []
    for _ in range(n_batches):
        mag = stats.truncnorm.rvs(-1.0 / sd, np.inf, loc=1.0, scale=sd, size=(batch, 4), random_state=rng)
        Y = mag * rng.choice([-1.0, 1.0], size=(batch, 4))
        u = Y[:, 0] + Y[:, 1] + Y[:, 2] - Y[:, 3]
        v = psi(Y[:, 0]) + psi(Y[:, 1]) + psi(Y[:, 2]) - psi(Y[:, 3])
        # psi is odd: reflect to u > 0
        sgn = np.sign(u)
        c = np.abs(u) / 2.0
        F = sgn * v - 2.0 * psi(c)
        ok = (F > 0) & (c > 0)
        alpha, D = _solve_alpha_vec(p, Parity.ODD, c[ok], F[ok])
        val = np.zeros(batch)
        val[ok] = 2.0 * f(c[ok] - alpha) * f(c[ok] + alpha) / np.abs(D)
        est.append(val.mean())
    est = np.array(est) * mass ** 4 / norm2 ** 3
    return est.mean(), est.std(ddof=1) / math.sqrt(n_batches)


@pytest.mark.slow
class TestExpansionAgainstDirect:
    def test_p2_drift_trial(self):
        lam = 0.5
        g = TrialFunction(2.0, lam, -2.0, 0.0, Support.HALF_LINE_POSITIVE)
        terms = odd_expansion_terms(2.0, g)
        expanded = 2.5 * terms.A + 3.75 * terms.B
        direct, se = _direct_odd_functional(lam)
        assert abs(direct - expanded) <= 5.0 * se + 1e-3 * expanded

    def test_k4_mass(self):
        # int int K4 exp(-lam (tau + d xi)) = (int f)^4 on the half-line
        p, q, lam, d = 2.0, 0.0, 0.5, -2.0
        one = integrate.quad(lambda y: math.exp(-lam * (y * y + d * y)), 0, np.inf)[0]
        delta = 4.0 * (q + 1.0) - (1.0 + p)

        def L(s):
            return integrate.quad(lambda t: t ** ((delta + 1.0) / p) * math.exp(-lam * (t + d * s * t ** 0.5)),
                                  0, np.inf, limit=200)[0]

        x, w = np.polynomial.legendre.leggauss(20)
        total = 0.0
        for lo, hi in ((1.0, 2 ** 0.5), (2 ** 0.5, 3 ** 0.5), (3 ** 0.5, 2.0)):
            s = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
            total += sum(0.5 * (hi - lo) * wi * _k4_half(p, q, si) * L(si) for si, wi in zip(s, w))
        assert total == pytest.approx(one ** 4, rel=1e-4)
