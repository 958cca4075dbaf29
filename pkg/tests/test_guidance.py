import json
from pathlib import Path

import numpy as np
import pytest

from taco.guidance import (
    RULES,
    TASKS,
    TaskStatus,
    axis_guidance,
    check_cardinality,
    check_range,
    guide,
    min_legible_fraction,
    task_suitability,
)
from taco.table import Table, normalize

GOLDEN = Path(__file__).parent / "golden"


def labeled_5x7(**meta):
    rng = np.random.default_rng(57)
    values = rng.uniform(10, 60, size=(5, 7))
    return Table(
        values=values,
        row_labels=tuple(f"w{k}" for k in range(5)),
        col_labels=("Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"),
        **meta,
    )


def test_threshold_at_500_square():
    # [DERIVED] 1 / (500 * 500)
    assert min_legible_fraction(500, 500) == 4e-6


def test_range_statuses():
    assert check_range(normalize(Table(values=np.ones((4, 4)))), 500, 500).status == "Pass"
    assert check_range(normalize(Table(values=[[1.0, 2e3]])), 500, 500).status == "Warn"
    wide = np.full((4, 4), 1e5)
    wide[0, 0] = 1.0
    r = check_range(normalize(Table(values=wide)), 500, 500)
    assert r.status == "Fail" and r.min_fraction < r.threshold


def test_uniform_tables_pass_below_pixel_count():
    for m, n in [(1, 1), (10, 10), (400, 600)]:
        assert check_range(np.ones((m, n)), 500, 500).status == "Pass"
    assert check_range(np.ones((501, 500)), 500, 500).status == "Fail"


@pytest.mark.parametrize(
    "shape, status, axis",
    [((5, 7), "Pass", None), ((600, 2), "Fail", "rows"), ((2, 600), "Fail", "columns"), ((500, 1), "Pass", None), ((501, 1), "Fail", "rows")],
)
def test_cardinality(shape, status, axis):
    c = check_cardinality(Table(values=np.ones(shape)), 500, 500)
    assert (c.status, c.axis) == (status, axis)


def test_axis_warnings():
    assert axis_guidance(Table(values=np.ones((2, 2)))) == []
    rules = [w["rule"] for w in axis_guidance(Table(values=np.ones((2, 2)), row_kind="nominal", col_kind="sorted-nominal"))]
    assert rules == ["nominal-axis", "sorted-nominal"]
    assert axis_guidance(Table(values=np.ones((2, 2)), col_kind="non-axial"))[0]["rule"] == "non-axial"


def test_task_table_matches_golden():
    golden = json.loads((GOLDEN / "task_table.json").read_text())
    tasks = task_suitability(labeled_5x7(), True, 500, 500)
    assert list(tasks) == list(golden) == list(TASKS)
    assert {k: s.status for k, s in tasks.items()} == golden


def test_downgrades():
    t = labeled_5x7()
    assert task_suitability(t, False, 500, 500)["Retrieve Value"].status == "Confuser"
    narrow = Table(values=np.linspace(10, 11, 12).reshape(3, 4))
    tasks = task_suitability(narrow, True, 500, 500)
    assert tasks["Cluster"].status == tasks["Filter"].status == "Confuser"
    wide = np.full((4, 4), 1e5)
    wide[0, 0] = 1.0
    tasks = task_suitability(Table(values=wide), True, 500, 500)
    assert tasks["Find Anomalies"].status == "Conditional"
    assert tasks["Retrieve Value"].status == "Confuser"
    assert "range-fail" in [r.rule for r in tasks["Find Anomalies"].reasons]


def test_interval_scale_adds_caveat():
    tasks = task_suitability(labeled_5x7(scale_type="interval"), True, 500, 500)
    assert "interval-units" in [r.rule for r in tasks["Characterize Distribution"].reasons]


def test_every_non_supported_status_has_known_reasons():
    for t in (labeled_5x7(), Table(values=np.ones((3, 3)))):
        for s in task_suitability(t, False, 500, 500).values():
            if s.status != "Supported":
                assert s.reasons
            assert all(r.rule in RULES for r in s.reasons)
    with pytest.raises(ValueError):
        TaskStatus("Conditional")


def test_guide_report_and_text():
    g = guide(labeled_5x7())
    assert not g.failed and g.has_labels
    text = g.to_text()
    assert sum(task in text for task in TASKS) == 10
    assert json.loads(json.dumps(g.to_dict())) == g.to_dict()
    assert not guide(Table(values=np.ones((2, 2)))).has_labels
