"""Power curves s = |y|^p (even) and s = y|y|^(p-1) (odd)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"


def check_exponent(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p <= 1.0:
        # p = 1 is the flat cone s = |y|, which carries no extension estimate
        raise DomainError(f"curve exponent must satisfy p > 1, got {p!r}")
    return p


@dataclass(frozen=True)
class CurveFamily:
    """The curve s = psi(y) together with the default weight exponents.

    The extension measure carries |y|^((p-2)/6) on the amplitude, i.e. the
    weight w = |y|^((p-2)/3) on the projection measure.
    """

    p: float
    parity: Parity = Parity.EVEN

    def __post_init__(self):
        object.__setattr__(self, "p", check_exponent(self.p))
        object.__setattr__(self, "parity", Parity(self.parity))

    @property
    def amplitude_exponent(self) -> float:
        return (self.p - 2.0) / 6.0

    @property
    def weight_exponent(self) -> float:
        return (self.p - 2.0) / 3.0

    def psi(self, y: float) -> float:
        r = abs(y) ** self.p
        if self.parity is Parity.ODD and y < 0:
            return -r
        return r

    def dpsi(self, y: float) -> float:
        d = self.p * abs(y) ** (self.p - 1.0)
        if self.parity is Parity.EVEN and y < 0:
            return -d
        return d
