"""Sampled densities of convolution measures and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DensityGrid:
    """Samples of a convolution density on a slice or rectangle.

    ``coordinates`` has shape (n, d) and ``values`` shape (n,).  For the
    slice tau = 1 the single coordinate is t = xi / 3**(1 - 1/p).
    """

    coordinate_names: tuple
    coordinates: np.ndarray
    values: np.ndarray
    fold_count: int
    description: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        coords = np.asarray(self.coordinates, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        vals = np.asarray(self.values, dtype=float)
        if coords.shape[0] != vals.shape[0]:
            raise ValueError("coordinates and values differ in length")
        if coords.shape[1] != len(self.coordinate_names):
            raise ValueError("coordinate_names does not match coordinate columns")
        if self.fold_count not in (2, 3, 4):
            raise ValueError("fold_count must be 2, 3 or 4")
        coords.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "coordinates", coords)
        object.__setattr__(self, "values", vals)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*self.coordinate_names, "value"])
        for row, v in zip(self.coordinates, self.values):
            writer.writerow([f"{x:.17g}" for x in row] + [f"{v:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, fold_count: int = 3) -> "DensityGrid":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        data = np.array([[float(x) for x in r] for r in body]).reshape(len(body), len(header))
        return cls(tuple(header[:-1]), data[:, :-1], data[:, -1], fold_count)
