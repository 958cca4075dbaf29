"""Month calendars as week x weekday tables, and their composition into one SVG."""

from __future__ import annotations

import calendar as _cal
import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .mesh import Mesh
from .render import RenderSpec, _document, render_group
from .table import AxisKind, NonPositiveValue, Table, TableError

WEEKDAYS = ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday")


class EmptyMonth(TableError):
    pass


def parse_weekday(day: str | int) -> int:
    """Monday is 0, as in :mod:`datetime`."""
    if isinstance(day, int):
        if not 0 <= day < 7:
            raise ValueError(f"weekday index {day} outside 0..6")
        return day
    key = day.strip().lower()
    for k, name in enumerate(WEEKDAYS):
        if name.startswith(key) and len(key) >= 2:
            return k
    raise ValueError(f"unknown weekday {day!r}")


@dataclass(frozen=True)
class CalendarSpec:
    week_start: int = 6  # Sunday
    arrangement: tuple[int, int] = (4, 3)  # rows x columns of months
    pad_policy: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "week_start", parse_weekday(self.week_start))
        if self.pad_policy != "mean":
            raise ValueError("only the mean pad policy is supported")
        r, c = self.arrangement
        if r < 1 or c < 1:
            raise ValueError("month arrangement needs at least one row and column")


def parse_month(month) -> tuple[int, int]:
    if isinstance(month, tuple):
        return int(month[0]), int(month[1])
    y, _, mo = str(month).partition("-")
    return int(y), int(mo)


def month_key(month) -> str:
    y, mo = parse_month(month)
    return f"{y:04d}-{mo:02d}"


def month_shape(year: int, month: int, week_start: int) -> tuple[int, int]:
    """(weeks, leading pad count) of a month laid out from ``week_start``."""
    lead = (dt.date(year, month, 1).weekday() - week_start) % 7
    days = _cal.monthrange(year, month)[1]
    return math.ceil((lead + days) / 7), lead


def build_month_table(series: Iterable[tuple[dt.date, float]], month, spec: CalendarSpec | None = None) -> Table:
    """One row per (possibly partial) week, one column per weekday.

    Days outside the month, and days missing from ``series``, become pads
    holding the mean of the month's real days.
    """
    spec = spec or CalendarSpec()
    year, mo = parse_month(month)
    days = _cal.monthrange(year, mo)[1]
    by_day: dict[int, float] = {}
    for day, value in series:
        if (day.year, day.month) != (year, mo):
            continue
        if day.day in by_day:
            raise ValueError(f"duplicate value for {day.isoformat()}")
        by_day[day.day] = float(value)
    if not by_day:
        raise EmptyMonth(f"no values for {month_key((year, mo))}")
    weeks, lead = month_shape(year, mo, spec.week_start)
    values = np.zeros((weeks, 7))
    pads = np.ones((weeks, 7), dtype=bool)
    for d, value in by_day.items():
        k = lead + d - 1
        if not (value > 0 and math.isfinite(value)):
            raise NonPositiveValue(k // 7, k % 7, value)
        values[k // 7, k % 7] = value
        pads[k // 7, k % 7] = False
    values[pads] = np.mean([by_day[d] for d in sorted(by_day)])
    cols = tuple(WEEKDAYS[(spec.week_start + k) % 7][:3].title() for k in range(7))
    rows = tuple(f"week {k + 1}" for k in range(weeks))
    assert days <= weeks * 7 - lead
    return Table(
        values=values,
        row_labels=rows,
        col_labels=cols,
        row_kind=AxisKind.ORDINAL,
        col_kind=AxisKind.ORDINAL,
        pads=pads,
    )


def compose_months(
    results: Sequence[tuple[object, Mesh, Table]],
    spec: CalendarSpec | None = None,
    render: RenderSpec | None = None,
) -> str:
    """Place each month's rendering in a uniform grid of tiles, row-major."""
    if not results:
        raise ValueError("nothing to compose")
    spec = spec or CalendarSpec()
    render = render or RenderSpec()
    rows, cols = spec.arrangement
    if len(results) > rows * cols:
        rows = math.ceil(len(results) / cols)
    tile_w = max(mesh.w for _, mesh, _ in results) + 2 * render.margin
    tile_h = max(mesh.h for _, mesh, _ in results) + 2 * render.margin + 3 * render.font_size
    groups = []
    for k, (month, mesh, t) in enumerate(results):
        r, c = divmod(k, cols)
        key = month_key(month)
        groups.append(
            render_group(
                mesh, t, render, c * tile_w + render.margin, r * tile_h + render.margin, group_id=f"month-{key}", title=key
            )
        )
    used_rows = math.ceil(len(results) / cols)
    used_cols = min(len(results), cols)
    return _document(used_cols * tile_w, used_rows * tile_h, "\n".join(groups))
