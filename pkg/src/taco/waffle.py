"""Waffle arrangement: categorical counts molded into a grid, one cell per unit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .table import AxisKind, Table, TableError


class WaffleOverflow(TableError):
    pass


@dataclass(frozen=True)
class Waffle:
    table: Table
    categories: np.ndarray  # category index per cell, -1 for pads
    names: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"table": self.table.to_dict(), "categories": self.categories.tolist(), "names": list(self.names)}


def build_waffle(counts: Sequence[tuple[str, float]], cols: int, unit: float = 1.0, rows: int | None = None) -> Waffle:
    """Fill a ``cols``-wide grid row-major, category after category.

    Each full cell holds ``unit``; a category's last cell holds the remainder,
    so areas stay exact. Slots after the last category are mean-filled pads.
    """
    if cols < 1 or not unit > 0:
        raise ValueError("cols must be positive and unit > 0")
    names = tuple(name for name, _ in counts)
    cells: list[tuple[int, float]] = []
    for k, (name, count) in enumerate(counts):
        count = float(count)
        if not (count > 0 and math.isfinite(count)):
            raise TableError(f"category {name!r} has non-positive count {count!r}")
        full = int(count // unit)
        rest = count - full * unit
        # treat float dust as a whole unit rather than a sliver cell
        if rest <= 1e-9 * unit:
            rest = 0.0
        cells += [(k, unit)] * full
        if rest > 0:
            cells.append((k, rest))
    if not cells:
        raise TableError("no counts to arrange")
    need = math.ceil(len(cells) / cols)
    if rows is not None and need > rows:
        raise WaffleOverflow(f"{len(cells)} cells do not fit in {rows}x{cols}")
    rows = rows or need
    size = rows * cols
    values = np.zeros(size)
    cats = np.full(size, -1)
    for s, (k, value) in enumerate(cells):
        values[s] = value
        cats[s] = k
    pads = cats < 0
    values[pads] = values[~pads].mean()
    table = Table(
        values=values.reshape(rows, cols),
        row_kind=AxisKind.NON_AXIAL,
        col_kind=AxisKind.NON_AXIAL,
        pads=pads.reshape(rows, cols),
    )
    return Waffle(table=table, categories=cats.reshape(rows, cols), names=names)
