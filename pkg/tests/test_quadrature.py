import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpconv.errors import DivergenceError, QuadratureError
from sharpconv.quadrature import log_laplace_power, logsumexp, quad_checked


def _closed_half_line(coef, p, lam, c):
    # int_0^inf exp(-lam coef u^p) u^c du
    return math.lgamma((c + 1.0) / p) - math.log(p) - (c + 1.0) / p * math.log(lam * coef)


class TestLogLaplacePower:
    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=1.1, max_value=8.0), st.floats(min_value=-0.9, max_value=6.0),
           st.floats(min_value=1e-3, max_value=1e4))
    def test_no_drift_closed_form(self, p, c, lam):
        got = log_laplace_power(1.0, p, 0.0, lam, c, "half_line_positive")
        assert got == pytest.approx(_closed_half_line(1.0, p, lam, c), abs=1e-9)
        full = log_laplace_power(1.0, p, 0.0, lam, c)
        assert full == pytest.approx(math.log(2.0) + _closed_half_line(1.0, p, lam, c), abs=1e-9)

    @pytest.mark.parametrize("lam", [0.5, 10.0, 1e4])
    def test_gaussian_with_drift(self, lam):
        # int exp(-lam (y^2 + d y)) dy = sqrt(pi/lam) exp(lam d^2 / 4)
        d = -2.0
        got = log_laplace_power(1.0, 2.0, d, lam, 0.0)
        assert got == pytest.approx(0.5 * math.log(math.pi / lam) + lam * d * d / 4.0, rel=1e-11)

    def test_large_values_stay_finite(self):
        got = log_laplace_power(1.0, 1.5, -1.5, 1e5, 0.0)
        assert math.isfinite(got) and got > 1e3

    def test_extra_factor(self):
        base = log_laplace_power(1.0, 2.0, 0.0, 1.0, 0.0, "half_line_positive")
        shifted = log_laplace_power(1.0, 2.0, 0.0, 1.0, 0.0, "half_line_positive", extra=lambda u: 0.25)
        assert shifted - base == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("args", [(0.0, 2.0, 0.0, 1.0, 0.0), (1.0, 1.0, 0.0, 1.0, 0.0),
                                      (1.0, 2.0, 0.0, 1.0, -1.0), (1.0, 2.0, 0.0, 0.0, 0.0)])
    def test_divergent(self, args):
        with pytest.raises(DivergenceError):
            log_laplace_power(*args)

    def test_bad_support(self):
        with pytest.raises(ValueError):
            log_laplace_power(1.0, 2.0, 0.0, 1.0, 0.0, "circle")


class TestHelpers:
    def test_quad_checked(self):
        val, err = quad_checked(math.exp, 0.0, 1.0)
        assert val == pytest.approx(math.e - 1.0, rel=1e-14)

    def test_quad_checked_raises(self):
        with pytest.raises(QuadratureError) as info:
            quad_checked(lambda x: math.sin(1.0 / x) / x, 1e-12, 1.0, limit=5)
        assert info.value.abserr > 0

    def test_logsumexp(self):
        np.testing.assert_allclose(logsumexp([1000.0, 1000.0]), 1000.0 + math.log(2.0))
