"""Lower bounds for the odd-curve constant Q_p^6.

An even trial f = g + g~ on the odd curve, with g supported on [0, inf)
and g~(y) = g(-y), satisfies

    Phi_odd(f) = (5/2) A + (15/4) B

where A is the even-curve functional of g and B the normalized pairing
of its 4-fold and 2-fold self-convolutions (see
:func:`sharpconv.oracle.odd_expansion_terms`).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .bounds import threshold
from .curve import Parity, check_exponent
from .errors import DomainError
from .oracle import odd_expansion_terms
from .trial import Support, TrialFunction

__all__ = ["OddBoundReport", "ScanTable", "odd_bound", "odd_trial", "conjecture_scan", "SCAN_COLUMNS"]

SCAN_COLUMNS = ("p", "lambda", "a", "A", "B", "bound", "threshold", "margin")
DEFAULT_LAMBDAS = (50.0, 200.0, 500.0, 2000.0)


@dataclass(frozen=True)
class OddBoundReport:
    p: float
    lam: float
    A: float
    B: float
    log_B: float
    q_lower_bound: float
    threshold: float
    invariant_ratio: float
    margin: float

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda": self.lam,
            "A": self.A,
            "B": self.B,
            "log_B": self.log_B,
            "q_lower_bound": self.q_lower_bound,
            "threshold": self.threshold,
            "invariant_ratio": self.invariant_ratio,
            "margin": self.margin,
        }


def _assemble(p, lam, terms) -> OddBoundReport:
    q = 2.5 * terms.A + 3.75 * terms.B
    thr = threshold(p, Parity.ODD)
    return OddBoundReport(p, lam, terms.A, terms.B, terms.log_B, q, thr,
                          q * math.sqrt(3.0) / math.pi, q - thr)


def odd_trial(p: float, lam: float) -> TrialFunction:
    """Half-line trial exp(-lam (y^p - p y)) y^((p-2)/6), concentrating at y = 1."""
    return TrialFunction(p, lam, -p, (p - 2.0) / 6.0, Support.HALF_LINE_POSITIVE)


def odd_bound(p: float, lam: float, grid_size: int = 24) -> OddBoundReport:
    """Q_p^6 lower bound from the mirrored trial built on :func:`odd_trial`.

    Examples
    --------
    >>> r = odd_bound(3.0, 200.0)   # doctest: +SKIP
    >>> r.margin < 0
    True
    """
    p = check_exponent(p)
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    return _assemble(p, lam, odd_expansion_terms(p, odd_trial(p, lam), grid_size))


@dataclass
class ScanTable:
    """Rows of a conjecture scan plus the best margin seen for each p."""

    rows: list = field(default_factory=list)

    def best_margin(self) -> dict:
        best = {}
        for row in self.rows:
            best[row["p"]] = max(best.get(row["p"], -math.inf), row["margin"])
        return best

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SCAN_COLUMNS)
        for row in self.rows:
            w.writerow(["%.17g" % row[c] for c in SCAN_COLUMNS])
        return buf.getvalue()


def conjecture_scan(p_grid, lambda_grid, a_grid, grid_size: int = 12) -> ScanTable:
    """Odd lower bounds for g(y) = exp(-lam y^p) y^((p-2)/6 + a) on [0, inf).

    The odd functional is invariant under y -> c y, so for this family
    lambda only rescales the trial and rows differing in lambda agree up
    to quadrature error.
    """
    p_grid, lambda_grid, a_grid = list(p_grid), list(lambda_grid), list(a_grid)
    if not (p_grid and lambda_grid and a_grid):
        raise DomainError("scan grids must be nonempty")
    for p in p_grid:
        if not (math.isfinite(p) and p >= 2.0):
            raise DomainError(f"conjecture scan covers p >= 2, got {p!r}")
    table = ScanTable()
    for p in p_grid:
        for lam in lambda_grid:
            for a in a_grid:
                g = TrialFunction(p, lam, 0.0, (p - 2.0) / 6.0 + a, Support.HALF_LINE_POSITIVE)
                r = _assemble(p, lam, odd_expansion_terms(p, g, grid_size))
                table.rows.append({"p": p, "lambda": lam, "a": a, "A": r.A, "B": r.B,
                                   "bound": r.q_lower_bound, "threshold": r.threshold,
                                   "margin": r.margin})
    return table
