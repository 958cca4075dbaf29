"""Input tables: validation, ingestion, normalization and axis metadata."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


class AxisKind(str, enum.Enum):
    NOMINAL = "nominal"
    SORTED_NOMINAL = "sorted-nominal"
    ORDINAL = "ordinal"
    NON_AXIAL = "non-axial"

    @classmethod
    def parse(cls, text: str | AxisKind) -> AxisKind:
        if isinstance(text, AxisKind):
            return text
        key = str(text).strip().lower().replace("_", "-").replace(" ", "-")
        aliases = {"sortednominal": "sorted-nominal", "nonaxial": "non-axial"}
        key = aliases.get(key.replace("-", ""), key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown axis kind {text!r}") from None


class ScaleType(str, enum.Enum):
    RATIO = "ratio"
    INTERVAL = "interval"

    @classmethod
    def parse(cls, text: str | ScaleType) -> ScaleType:
        if isinstance(text, ScaleType):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown scale type {text!r}") from None


class TableError(ValueError):
    """Base class for ingestion and validation failures."""


class EmptyTable(TableError):
    pass


class NonRectangular(TableError):
    pass


class NonNumericCell(TableError):
    def __init__(self, row: int, col: int, text: str):
        self.row, self.col, self.text = row, col, text
        super().__init__(f"cell ({row}, {col}) is not numeric: {text!r}")


class NonPositiveValue(TableError):
    def __init__(self, row: int, col: int, value: float):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"cell ({row}, {col}) has non-positive value {value!r}")


class NegativeValue(TableError):
    def __init__(self, row: int, col: int, value: float):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"cell ({row}, {col}) is negative ({value!r}); offsetting cannot rescue it")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Table:
    """A flat m x n grid of strictly positive values sharing a single unit.

    ``offset`` is set when the values were shifted by :func:`intervalize` and
    must be disclosed when rendering. ``pads`` marks filler cells (calendar
    days outside the month, unused waffle slots) that take part in the layout
    but not in any analysis.
    """

    values: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()
    row_kind: AxisKind = AxisKind.ORDINAL
    col_kind: AxisKind = AxisKind.ORDINAL
    scale_type: ScaleType = ScaleType.RATIO
    unit: str | None = None
    offset: float | None = None
    pads: np.ndarray | None = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.size == 0:
            raise EmptyTable("a table needs at least one row and one column")
        m, n = values.shape
        row_labels = tuple(str(s) for s in self.row_labels) or tuple(str(i) for i in range(m))
        col_labels = tuple(str(s) for s in self.col_labels) or tuple(str(j) for j in range(n))
        if len(row_labels) != m or len(col_labels) != n:
            raise NonRectangular(
                f"label counts ({len(row_labels)}, {len(col_labels)}) do not match shape {values.shape}"
            )
        bad = ~np.isfinite(values) | (values <= 0)
        if bad.any():
            i, j = (int(k) for k in np.argwhere(bad)[0])
            raise NonPositiveValue(i, j, float(values[i, j]))
        if self.pads is not None:
            pads = np.array(self.pads, dtype=bool)
            if pads.shape != values.shape:
                raise NonRectangular(f"pad mask shape {pads.shape} does not match {values.shape}")
            if pads.all():
                raise EmptyTable("every cell is a pad")
            pads.setflags(write=False)
            object.__setattr__(self, "pads", pads if pads.any() else None)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_labels", row_labels)
        object.__setattr__(self, "col_labels", col_labels)
        object.__setattr__(self, "row_kind", AxisKind.parse(self.row_kind))
        object.__setattr__(self, "col_kind", AxisKind.parse(self.col_kind))
        object.__setattr__(self, "scale_type", ScaleType.parse(self.scale_type))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def data_mask(self) -> np.ndarray:
        """True for real data cells."""
        if self.pads is None:
            return np.ones(self.values.shape, dtype=bool)
        return ~self.pads

    def data_values(self) -> np.ndarray:
        return self.values[self.data_mask]

    def with_values(self, values, **changes) -> Table:
        return replace(self, values=values, **changes)

    def to_dict(self) -> dict:
        out = {
            "values": self.values.tolist(),
            "rowLabels": list(self.row_labels),
            "colLabels": list(self.col_labels),
            "rowKind": self.row_kind.value,
            "colKind": self.col_kind.value,
            "scaleType": self.scale_type.value,
            "unit": self.unit,
        }
        if self.offset is not None:
            out["offset"] = self.offset
        if self.pads is not None:
            out["padMask"] = self.pads.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> Table:
        return cls(
            values=data["values"],
            row_labels=tuple(data.get("rowLabels") or ()),
            col_labels=tuple(data.get("colLabels") or ()),
            row_kind=data.get("rowKind", "ordinal"),
            col_kind=data.get("colKind", "ordinal"),
            scale_type=data.get("scaleType", "ratio"),
            unit=data.get("unit"),
            offset=data.get("offset"),
            pads=data.get("padMask"),
        )

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NormalizedTable:
    fractions: np.ndarray
    sigma: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.fractions.shape


def normalize(t: Table) -> NormalizedTable:
    sigma = math.fsum(t.values.ravel())
    return NormalizedTable(fractions=_frozen(t.values / sigma), sigma=sigma)


def transpose(t: Table) -> Table:
    return replace(
        t,
        values=t.values.T,
        row_labels=t.col_labels,
        col_labels=t.row_labels,
        row_kind=t.col_kind,
        col_kind=t.row_kind,
        pads=None if t.pads is None else t.pads.T,
    )


def intervalize(grid, offset: float, **meta) -> Table:
    """Shift every value by ``offset`` and treat the result as interval data.

    Zeros become legal cells this way; negatives stay rejected.
    """
    if not offset > 0 or not math.isfinite(offset):
        raise ValueError(f"offset must be a positive finite number, got {offset!r}")
    arr = np.array(grid, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.size == 0:
        raise EmptyTable("nothing to intervalize")
    if not np.isfinite(arr).all():
        i, j = (int(k) for k in np.argwhere(~np.isfinite(arr))[0])
        raise NonNumericCell(i, j, str(arr[i, j]))
    if (arr < 0).any():
        i, j = (int(k) for k in np.argwhere(arr < 0)[0])
        raise NegativeValue(i, j, float(arr[i, j]))
    meta = dict(meta)
    meta["scale_type"] = ScaleType.INTERVAL
    return Table(values=arr + offset, offset=float(offset), **meta)


@dataclass(frozen=True)
class IngestOptions:
    header_row: bool = False
    header_col: bool = False
    row_kind: AxisKind | str = AxisKind.ORDINAL
    col_kind: AxisKind | str = AxisKind.ORDINAL
    scale_type: ScaleType | str = ScaleType.RATIO
    unit: str | None = None
    zero_policy: str = "error"
    delimiter: str = ","

    def zero_offset(self) -> float | None:
        policy = self.zero_policy.strip().lower()
        if policy == "error":
            return None
        if policy.startswith("intervalize:"):
            return float(policy.split(":", 1)[1])
        raise ValueError(f"unknown zero policy {self.zero_policy!r}; use 'error' or 'intervalize:<offset>'")


def _parse_rows(rows: Sequence[Sequence[str]], opts: IngestOptions):
    rows = [r for r in rows if any(c.strip() for c in r)]
    col_labels: tuple[str, ...] = ()
    if opts.header_row:
        if not rows:
            raise EmptyTable("no header row")
        header, rows = rows[0], rows[1:]
        col_labels = tuple(c.strip() for c in (header[1:] if opts.header_col else header))
    if not rows:
        raise EmptyTable("no data rows")
    row_labels = []
    grid = []
    for i, row in enumerate(rows):
        cells = [c.strip() for c in row]
        if opts.header_col:
            row_labels.append(cells[0])
            cells = cells[1:]
        grid.append(cells)
    width = len(grid[0])
    if width == 0:
        raise EmptyTable("no data columns")
    for i, cells in enumerate(grid):
        if len(cells) != width:
            raise NonRectangular(f"row {i} has {len(cells)} cells, expected {width}")
    if col_labels and len(col_labels) != width:
        raise NonRectangular(f"header has {len(col_labels)} labels for {width} columns")
    values = np.empty((len(grid), width))
    for i, cells in enumerate(grid):
        for j, text in enumerate(cells):
            try:
                v = float(text)
            except ValueError:
                raise NonNumericCell(i, j, text) from None
            if not math.isfinite(v):
                raise NonNumericCell(i, j, text)
            values[i, j] = v
    return values, tuple(row_labels), col_labels


def _finish(values, row_labels, col_labels, opts: IngestOptions, **overrides) -> Table:
    meta = dict(
        row_labels=row_labels,
        col_labels=col_labels,
        row_kind=overrides.get("row_kind") or opts.row_kind,
        col_kind=overrides.get("col_kind") or opts.col_kind,
        scale_type=overrides.get("scale_type") or opts.scale_type,
        unit=overrides.get("unit") or opts.unit,
    )
    offset = opts.zero_offset()
    if offset is not None:
        return intervalize(values, offset, **{k: v for k, v in meta.items() if k != "scale_type"})
    return Table(values=values, **meta)


def ingest(source: str, options: IngestOptions | None = None) -> Table:
    """Parse CSV text (or the JSON table format) into a validated :class:`Table`."""
    opts = options or IngestOptions()
    stripped = source.lstrip()
    if stripped.startswith("{"):
        data = json.loads(source)
        values = data.get("values")
        if not values:
            raise EmptyTable("JSON table has no values")
        if any(not isinstance(r, list) for r in values):
            raise NonRectangular("values must be a list of rows")
        if len({len(r) for r in values}) != 1:
            raise NonRectangular("ragged rows in JSON values")
        grid = np.empty((len(values), len(values[0])))
        for i, row in enumerate(values):
            for j, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise NonNumericCell(i, j, repr(v))
                grid[i, j] = v
        t = _finish(
            grid,
            tuple(data.get("rowLabels") or ()),
            tuple(data.get("colLabels") or ()),
            opts,
            row_kind=data.get("rowKind"),
            col_kind=data.get("colKind"),
            scale_type=data.get("scaleType"),
            unit=data.get("unit"),
        )
        return replace(t, pads=data["padMask"]) if data.get("padMask") is not None else t
    rows = list(csv.reader(io.StringIO(source), delimiter=opts.delimiter))
    values, row_labels, col_labels = _parse_rows(rows, opts)
    return _finish(values, row_labels, col_labels, opts)


def scale(t: Table, k: float) -> Table:
    if not k > 0:
        raise ValueError("scale factor must be positive")
    return t.with_values(t.values * k)
