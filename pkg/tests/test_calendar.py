import datetime as dt
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import days_in_month, sakamoto_weekday, zeller_weekday
from taco.calendar import CalendarSpec, EmptyMonth, build_month_table, compose_months, month_shape, parse_weekday
from taco.layout import LayoutParams, optimize
from taco.render import RenderSpec, render_svg
from taco.table import AxisKind, NonPositiveValue, normalize

SUN, MON = 6, 0  # datetime numbering


def daily(year, month, f=lambda d: 10.0 + d % 5):
    return [(dt.date(year, month, d), f(d)) for d in range(1, days_in_month(year, month) + 1)]


def oracle_shape(year, month, week_start):
    """Weeks and leading blanks from the Sakamoto weekday (Sunday = 0)."""
    first = sakamoto_weekday(year, month, 1)
    start = (week_start + 1) % 7  # datetime Monday=0 -> Sunday=0 numbering
    lead = (first - start) % 7
    return math.ceil((lead + days_in_month(year, month)) / 7), lead


def test_weekday_oracles_agree():
    d = dt.date(1900, 1, 1)
    while d.year < 2100:
        assert sakamoto_weekday(d.year, d.month, d.day) == zeller_weekday(d.year, d.month, d.day) == (d.weekday() + 1) % 7
        d += dt.timedelta(days=13)


def test_january_2016():
    # [DERIVED] Jan 1 2016 is a Friday: five leading blanks from Sunday, 36 slots, six weeks
    assert sakamoto_weekday(2016, 1, 1) == 5
    t = build_month_table(daily(2016, 1), "2016-01", CalendarSpec(week_start=SUN))
    assert t.shape == oracle_shape(2016, 1, SUN)[:1] + (7,) == (6, 7)
    assert t.pads[0].tolist() == [True] * 5 + [False] * 2
    assert t.pads[5].tolist() == [False] + [True] * 6
    monday = build_month_table(daily(2016, 1), "2016-01", CalendarSpec(week_start=MON))
    assert monday.shape == (5, 7)
    assert monday.pads[0].tolist() == [True] * 4 + [False] * 3


def test_month_aligned_to_week_start_has_no_pads():
    # February 2015 begins on a Sunday and has 28 days
    assert sakamoto_weekday(2015, 2, 1) == 0
    t = build_month_table(daily(2015, 2), (2015, 2), CalendarSpec(week_start="sunday"))
    assert t.shape == (4, 7) and t.pads is None
    assert t.row_kind is AxisKind.ORDINAL and t.col_kind is AxisKind.ORDINAL


@given(st.integers(1901, 2099), st.integers(1, 12), st.integers(0, 6))
def test_shape_matches_oracle(year, month, week_start):
    assert month_shape(year, month, week_start) == oracle_shape(year, month, week_start)


def test_week_start_changes_pads_and_layout():
    series = daily(2016, 3, lambda d: 5.0 + (d * 7) % 11)
    a = build_month_table(series, "2016-03", CalendarSpec(week_start=SUN))
    b = build_month_table(series, "2016-03", CalendarSpec(week_start=MON))
    assert a.pads.tolist() != b.pads.tolist()
    ma = optimize(normalize(a), LayoutParams()).mesh
    mb = optimize(normalize(b), LayoutParams()).mesh
    assert ma.vertices.shape != mb.vertices.shape or not ma.bitwise_equal(mb)


def test_pads_hold_month_mean_and_missing_days_pad():
    series = [(dt.date(2016, 1, d), float(d)) for d in range(1, 32) if d != 10]
    t = build_month_table(series, "2016-01")
    real = [v for _, v in series]
    assert t.pads.sum() == 42 - 30
    np.testing.assert_allclose(t.values[t.pads], np.mean(real))
    assert sorted(t.data_values().tolist()) == sorted(real)


def test_errors():
    with pytest.raises(EmptyMonth):
        build_month_table(daily(2016, 2), "2016-01")
    with pytest.raises(NonPositiveValue):
        build_month_table([(dt.date(2016, 1, 3), 0.0)], "2016-01")
    with pytest.raises(ValueError):
        CalendarSpec(week_start="funday")
    assert parse_weekday("Mon") == 0 and parse_weekday("su") == 6


def _results(months):
    out = []
    for y, m in months:
        t = build_month_table(daily(y, m), (y, m))
        out.append(((y, m), optimize(normalize(t), LayoutParams(w=140, h=120)).mesh, t))
    return out


def test_twelve_months_in_quarter_grid():
    svg = compose_months(_results([(2016, m) for m in range(1, 13)]), CalendarSpec(arrangement=(4, 3)))
    root = ET.fromstring(svg.encode())
    groups = [g.get("id") for g in root if g.get("id", "").startswith("month-")]
    assert groups == [f"month-2016-{m:02d}" for m in range(1, 13)]
    xs = [float(g.get("transform")[10:].split(",")[0]) for g in root]
    assert len(set(xs)) == 3


def test_single_month_is_render_plus_title():
    ((month, mesh, t),) = _results([(2016, 1)])
    spec = RenderSpec()
    composed = compose_months([(month, mesh, t)], CalendarSpec(), spec)
    plain = render_svg(mesh, t, spec)
    body = lambda s: [line for line in s.splitlines() if line.startswith("<polygon")]
    assert body(composed) == body(plain)
    assert ">2016-01</text>" in composed


def test_two_months_get_equal_tiles():
    svg = compose_months(_results([(2016, 1), (2016, 2)]))
    root = ET.fromstring(svg.encode())
    xs = [float(g.get("transform")[10:].split(",")[0]) for g in root]
    assert len(xs) == 2 and xs[1] - xs[0] == pytest.approx(float(root.get("width")) / 2)
