"""Command-line entry point: ``sharpconv <subcommand> ...``.

Every subcommand writes one artifact (JSON or CSV) to stdout, to
``--output``, or to ``$SHARPCONV_OUTPUT_DIR/<subcommand>.<ext>``.
Exit status is 0 on success, 2 when parameters are rejected and 3 when
a numerical tolerance is not met.  Errors go to stderr as JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, odd, oracle
from .curve import CurveFamily, Parity
from .errors import DivergenceError, DomainError, NoSignChangeError, QuadratureError
from .trial import TrialFunction

OUTPUT_DIR_ENV = "SHARPCONV_OUTPUT_DIR"
MAX_GRID = 4096
EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE = 0, 2, 3
SUBCOMMANDS = ("bound", "critical", "profile", "oracle", "odd", "report")
CHECKS = ("homogeneity", "boundary", "series", "bilinear")


class ValidationError(ValueError):
    pass


class ToleranceError(RuntimeError):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


@dataclass
class RunConfig:
    subcommand: str
    p: float = 3.0
    a: float = 0.0
    lam: float = 200.0
    N: int = bounds.DEFAULT_N
    grid_size: int = 24
    output_path: str | None = None
    format: str | None = None
    lo: float = 4.0
    hi: float = 5.5
    points: int = 201
    check: str = "homogeneity"
    scan: bool = False
    a_grid: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 4.0])

    def validate(self) -> "RunConfig":
        if self.subcommand not in SUBCOMMANDS:
            raise ValidationError(f"unknown subcommand {self.subcommand!r}")
        for name in ("p", "a", "lam", "lo", "hi"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if not self.p > 1:
            raise ValidationError(f"p must exceed 1, got {self.p}")
        if not self.a > -(self.p + 1.0) / 6.0:
            raise ValidationError(f"a must exceed -(p+1)/6 = {-(self.p + 1.0) / 6.0:.6g}, got {self.a}")
        if not 0 <= self.N <= bounds.MAX_N:
            raise ValidationError(f"N must lie in [0, {bounds.MAX_N}], got {self.N}")
        if not 2 <= self.grid_size <= MAX_GRID:
            raise ValidationError(f"grid_size must lie in [2, {MAX_GRID}], got {self.grid_size}")
        if not 2 <= self.points <= MAX_GRID:
            raise ValidationError(f"points must lie in [2, {MAX_GRID}], got {self.points}")
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if self.subcommand == "critical":
            if not 1 < self.lo < self.hi:
                raise ValidationError("critical needs 1 < lo < hi")
            for end in (self.lo, self.hi):
                if not self.a > -(end + 1.0) / 6.0:
                    raise ValidationError("a must exceed -(p+1)/6 across the bracket")
        if self.check not in CHECKS:
            raise ValidationError(f"check must be one of {', '.join(CHECKS)}")
        if self.scan and (self.p < 2 or not self.a_grid):
            raise ValidationError("scan needs p >= 2 and a nonempty a grid")
        if self.format is None:
            self.format = "csv" if self.subcommand == "profile" or (self.subcommand == "odd" and self.scan) else "json"
        if self.format not in ("csv", "json"):
            raise ValidationError(f"format must be csv or json, got {self.format!r}")
        return self


# --- serialization ---------------------------------------------------------------

def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else "%.17g" % v for v in row])
    return buf.getvalue()


def _dict_csv(d: dict) -> str:
    flat = [(k, v) for k, v in sorted(d.items()) if isinstance(v, (int, float, str, bool))]
    return _rows_csv(["key", "value"], [(k, str(v) if isinstance(v, (str, bool)) else float(v)) for k, v in flat])


def _emit(cfg: RunConfig, payload) -> None:
    if isinstance(payload, str):
        text = payload
    elif cfg.format == "csv":
        text = _dict_csv(payload)
    else:
        text = _dump_json(payload)
    target = cfg.output_path
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = f"{cfg.subcommand}.{cfg.format}"
    if target is None:
        sys.stdout.write(text)
        return
    path = Path(target)
    if not path.is_absolute() and os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# --- subcommands -----------------------------------------------------------------

def _bound(cfg):
    return bounds.series_bound(cfg.p, cfg.a, cfg.N).as_dict()


def _critical(cfg):
    res = bounds.bisect_critical_exponent(cfg.a, cfg.N, (cfg.lo, cfg.hi))
    d = res.as_dict()
    return {"p_star": d["p_star"], "iterations": d["iterations"], "margin_trace": d["margin_trace"],
            "a": cfg.a, "N": cfg.N, "bracket": d["bracket"]}


def _profile(cfg):
    grid = bounds.profile(cfg.p, cfg.a, cfg.N, np.linspace(-1.0, 1.0, cfg.points))
    if cfg.format == "csv":
        return grid.to_csv()
    return {"p": cfg.p, "a": cfg.a, "N": cfg.N, "t": grid.coordinates[:, 0].tolist(),
            "value": grid.values.tolist(), "normalization": grid.meta["normalization"]}


def _check_homogeneity(cfg):
    m = oracle.CurveMeasure(CurveFamily(cfg.p))
    s_max = 3.0 ** (1.0 - 1.0 / cfg.p)
    worst = 0.0
    for s in (0.1 * s_max, 0.5 * s_max, 0.9 * s_max):
        base = oracle.triple_density(m, s, 1.0)
        for lam in (0.5, 2.0, 10.0):
            val = oracle.triple_density(m, lam * s, lam ** cfg.p)
            worst = max(worst, abs(val / base - 1.0))
    return {"max_relative_deviation": worst, "tolerance": 1e-6}, worst <= 1e-6


def _check_boundary(cfg):
    m = oracle.CurveMeasure(CurveFamily(cfg.p))
    limit = oracle.boundary_limit(m, 3.0)
    target = bounds.threshold(cfg.p)
    err = abs(limit / target - 1.0)
    return {"extrapolated": limit, "expected": target, "relative_error": err, "tolerance": 1e-2}, err <= 1e-2


def _check_series(cfg):
    trial = TrialFunction(cfg.p, 1.0, 0.0, (cfg.p - 2.0) / 6.0 + cfg.a)
    ratio = oracle.triple_norm_ratio(trial)
    series = bounds.series_bound(cfg.p, cfg.a, bounds.DEFAULT_N).partial_sum
    err = abs(ratio.value / series - 1.0)
    return {"oracle": ratio.value, "oracle_abserr": ratio.abserr, "series": series,
            "relative_error": err, "tolerance": 5e-3}, err <= 5e-3


def _check_bilinear(cfg):
    seps = (2, 4, 6)
    vals = [oracle.bilinear_decay(cfg.p, 0, -k) for k in seps]
    factors = [math.sqrt(vals[i + 1] / vals[i]) for i in range(len(vals) - 1)]
    limit = 2.0 ** (-(cfg.p - 1.0) / 6.0) * 1.15
    return {"separations": list(seps), "values": vals, "per_step_factors": factors,
            "tolerance": limit}, max(factors) <= limit


def _oracle(cfg):
    checker = {"homogeneity": _check_homogeneity, "boundary": _check_boundary,
               "series": _check_series, "bilinear": _check_bilinear}[cfg.check]
    body, ok = checker(cfg)
    payload = {"check": cfg.check, "p": cfg.p, "pass": bool(ok), **body}
    if not ok:
        raise ToleranceError(f"oracle check {cfg.check} failed", payload)
    return payload


def _odd(cfg):
    if cfg.scan:
        table = odd.conjecture_scan([cfg.p], [cfg.lam], cfg.a_grid, min(cfg.grid_size, 12))
        if cfg.format == "csv":
            return table.to_csv()
        return {"rows": table.rows, "best_margin": {repr(k): v for k, v in table.best_margin().items()}}
    return odd.odd_bound(cfg.p, cfg.lam, cfg.grid_size).as_dict()


def _entry(value, expected, tol, provenance, relative=False):
    err = abs(value - expected) / (abs(expected) if relative else 1.0)
    return {"value": value, "expected": expected, "tolerance": tol, "relative": relative,
            "error": err, "provenance": provenance, "pass": bool(err <= tol)}


def _sign_entry(value, positive, provenance):
    return {"value": value, "expected_sign": "positive" if positive else "negative",
            "provenance": provenance, "pass": bool(value > 0 if positive else value < 0)}


def headline_report() -> dict:
    """The headline numbers with their expected values and pass flags."""
    s3 = math.sqrt(3.0)
    numbers = {
        "p0": _entry(bounds.critical_exponent(0.0, 15, (4.0, 5.5)), 4.803, 1e-3, "paper"),
        "p1": _entry(bounds.critical_exponent(7.0 / 15.0, 15, (4.0, 6.0)), 5.485, 1e-3, "paper"),
        "threshold_even_p3": _entry(bounds.threshold(3.0), math.pi / (3.0 * s3), 1e-15, "derived", True),
        "threshold_odd_p3": _entry(bounds.threshold(3.0, Parity.ODD), 5.0 * math.pi / (6.0 * s3), 1e-15,
                                   "derived", True),
        "threshold_even_p2": _entry(bounds.threshold(2.0), math.pi / s3, 1e-15, "trivial", True),
        "series_p2_N0": _entry(bounds.series_bound(2.0, 0.0, 0).partial_sum, math.pi / s3, 1e-10, "paper"),
        "series_p2_N15": _entry(bounds.series_bound(2.0, 0.0, 15).partial_sum, math.pi / s3, 1e-10, "paper"),
        "first_term_p3": _entry(bounds.series_bound(3.0, 0.0, 0).partial_sum, bounds.gamma_ratio_bound(3.0),
                                1e-11, "derived", True),
        "margin_p3": _sign_entry(bounds.margin(3.0, 0.0, 15), True, "paper"),
        "margin_p5.5": _sign_entry(bounds.margin(5.5, 0.0, 15), False, "paper"),
    }
    return {"numbers": numbers, "pass": all(v["pass"] for v in numbers.values())}


def _report(cfg):
    payload = headline_report()
    if not payload["pass"]:
        raise ToleranceError("report check failed", payload)
    return payload


HANDLERS = {"bound": _bound, "critical": _critical, "profile": _profile,
            "oracle": _oracle, "odd": _odd, "report": _report}


def _fail(code, kind, message, payload=None) -> int:
    err = {"error": kind, "message": message, "exit_status": code}
    if payload is not None:
        err["payload"] = payload
    sys.stderr.write(_dump_json(err))
    return code


def run(cfg: RunConfig) -> int:
    """Validate, dispatch and emit.  Returns the exit status."""
    try:
        cfg.validate()
        payload = HANDLERS[cfg.subcommand](cfg)
    except (ValidationError, DomainError, NoSignChangeError, OverflowError) as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except ToleranceError as exc:
        _emit(cfg, exc.payload)
        return _fail(EXIT_TOLERANCE, "tolerance", str(exc))
    except (QuadratureError, DivergenceError) as exc:
        return _fail(EXIT_TOLERANCE, "tolerance", str(exc))
    _emit(cfg, payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sharpconv", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", dest="output_path", default=None, help="output file")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    b = add("bound", "series lower bound for C_p^6")
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--a", type=float, default=0.0)
    b.add_argument("--N", type=int, default=bounds.DEFAULT_N)

    c = add("critical", "exponent where the series bound meets the threshold")
    c.add_argument("--a", type=float, default=0.0)
    c.add_argument("--N", type=int, default=bounds.DEFAULT_N)
    c.add_argument("--lo", type=float, default=4.0)
    c.add_argument("--hi", type=float, default=5.5)

    pr = add("profile", "normalized slice profile of the 3-fold density")
    pr.add_argument("--p", type=float, required=True)
    pr.add_argument("--a", type=float, default=0.0)
    pr.add_argument("--N", type=int, default=bounds.DEFAULT_N)
    pr.add_argument("--points", type=int, default=201)

    o = add("oracle", "brute-force convolution checks")
    o.add_argument("--p", type=float, required=True)
    o.add_argument("--a", type=float, default=0.0)
    o.add_argument("--check", choices=CHECKS, default="homogeneity")

    d = add("odd", "odd-curve lower bound or conjecture scan")
    d.add_argument("--p", type=float, required=True)
    d.add_argument("--lambda", dest="lam", type=float, default=200.0)
    d.add_argument("--grid-size", dest="grid_size", type=int, default=24)
    d.add_argument("--scan", action="store_true")
    d.add_argument("--a-grid", dest="a_grid", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0, 4.0])

    add("report", "headline numbers with pass/fail flags")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if v is not None or k == "format"})
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
