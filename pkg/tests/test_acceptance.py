"""Acceptance checks, one test per criterion.

Each test records a ``CRITERION n: PASS|FAIL  detail`` line; the lines are
printed together at the end of the pytest run (see conftest.py) and also when
this file is executed directly.
"""

from __future__ import annotations

import filecmp
import json
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import gapped_table, random_table
from oracles import central_difference, fan_area
from taco.algebra import Alpha, ProbeConfig, outlier_cells, run_probe, run_suite, standard_battery
from taco.cli import main
from taco.guidance import check_cardinality, check_range, task_suitability
from taco.layout import LayoutParams, optimize
from taco.mesh import Mesh, area_gradients, check_topology, shoelace
from taco.table import Table, normalize, scale

# tolerances pinned from the criteria
LAYOUT_TOL = 0.01
MAX_SECONDS = 2.0
AREA_REL = 1e-12
FD_STEP = 1e-6
GRAD_REL = 1e-5
DELTA_D = 0.05
PIXEL = 1.0

RESULTS: dict[int, str] = {}
GOLDEN = Path(__file__).parent / "golden"


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def test_criterion_01_layout_accuracy():
    rng = np.random.default_rng(101)
    worst_err, worst_time, failures, n = 0.0, 0.0, [], 120
    for k in range(n):
        m, c = (int(x) for x in rng.integers(1, 9, size=2))
        t = random_table(rng, m, c, ratio=1e3)
        start = time.perf_counter()
        r = optimize(normalize(t), LayoutParams(w=500, h=500, tolerance=LAYOUT_TOL))
        secs = time.perf_counter() - start
        worst_err, worst_time = max(worst_err, r.max_relative_area_error), max(worst_time, secs)
        if not r.converged or r.max_relative_area_error > LAYOUT_TOL or secs >= MAX_SECONDS or check_topology(r.mesh):
            failures.append(k)
    record(1, not failures, f"{n} tables, worst error {worst_err:.2e}, worst time {worst_time:.2f}s, failures {failures}")


def test_criterion_02_area_oracle():
    rng = np.random.default_rng(102)
    worst_area = 0.0
    for _ in range(1000):
        angles = np.arange(4) * (np.pi / 2) + rng.uniform(0.05, 1.5, 4)
        r = rng.uniform(0.1, 10.0, 4)
        q = rng.uniform(-50, 50, 2) + np.c_[r * np.cos(angles), r * np.sin(angles)]
        ref = fan_area(q)
        worst_area = max(worst_area, abs(shoelace(q) - ref) / abs(ref))
    worst_grad = 0.0
    for _ in range(100):
        m, n = (int(x) for x in rng.integers(1, 5, size=2))
        v = np.empty((m + 1, n + 1, 2))
        v[..., 0] = np.linspace(0, 10, n + 1)[None, :]
        v[..., 1] = np.linspace(0, 8, m + 1)[:, None]
        v[1:-1, 1:-1] += rng.uniform(-0.3, 0.3, (m - 1, n - 1, 2)) * (10 / n, 8 / m)
        mesh = Mesh(vertices=v, w=10, h=8)
        g = area_gradients(mesh.vertices)
        for i in range(m):
            for j in range(n):
                fd = central_difference(fan_area, mesh.quad(i, j), step=FD_STEP)
                worst_grad = max(worst_grad, float(np.abs(g[i, j] - fd).max() / np.abs(fd).max()))
    ok = worst_area <= AREA_REL and worst_grad <= GRAD_REL
    record(2, ok, f"area rel {worst_area:.1e} (<= {AREA_REL}), gradient rel {worst_grad:.1e} (<= {GRAD_REL})")


def test_criterion_03_scale_invariance_confuser():
    rng = np.random.default_rng(103)
    bad = []
    for k in range(10):
        t = random_table(rng, *(int(x) for x in rng.integers(1, 7, size=2)), ratio=1e3)
        lp = LayoutParams()
        base = optimize(normalize(t), lp)
        for factor in (0.1, 10.0, 1000.0):
            same = optimize(normalize(scale(t, factor)), lp).mesh.bitwise_equal(base.mesh)
            r = run_probe(t, Alpha.uniform_scale(factor), lp, base=base)
            if not (same and r.verdict == "Confuser" and r.data_distance_raw >= DELTA_D and r.layout_distance == 0):
                bad.append((k, factor))
    record(3, not bad, f"30 table/factor pairs bitwise identical and Confuser; failures {bad}")


def test_criterion_04_reciprocal_order_inversion():
    rng = np.random.default_rng(104)
    bad = []
    for k in range(50):
        m, n = (int(x) for x in rng.integers(2, 5, size=2))
        t = gapped_table(rng, m, n, gap=3 * LAYOUT_TOL)
        r = run_probe(t, Alpha.reciprocal())
        if not (all(r.converged) and r.annotations["orderInverted"]):
            bad.append(k)
    record(4, not bad, f"50 gapped tables, reversed area ranking after reciprocal; failures {bad}")


def test_criterion_05_permutation_hallucinator():
    values = np.random.default_rng(105).permutation(np.arange(1.0, 17.0) * 3.7).reshape(4, 4)
    nominal = Table(values=values, row_kind="nominal", col_kind="nominal")
    ordinal = Table(values=values)
    alpha = standard_battery(nominal, LayoutParams(), suite_seed=5)[0][0]
    a, b = run_probe(nominal, alpha), run_probe(ordinal, alpha)
    ok = a.verdict == "Hallucinator" and a.visible and b.verdict == "Commutes" and not b.data_trivial
    record(5, ok, f"{alpha.label()}: nominal {a.verdict} (distance {a.layout_distance:.4f}), ordinal {b.verdict}")


def test_criterion_06_range_bound_confuser():
    rng = np.random.default_rng(106)
    bad, worst = [], 0.0
    for k in range(20):
        m, n = (int(x) for x in rng.integers(3, 7, size=2))
        t = random_table(rng, m, n, ratio=20)
        values = np.array(t.values) * 1e5
        i, j = (int(x) for x in rng.integers(0, (m, n)))
        values[i, j] = rng.uniform(0.5, 2.0)
        t = Table(values=values)
        status = check_range(normalize(t), 500, 500).status
        r = run_probe(t, Alpha.double_min())
        worst = max(worst, r.max_cell_area_delta_px2)
        if not (status == "Fail" and r.verdict == "Confuser" and r.max_cell_area_delta_px2 < PIXEL):
            bad.append(k)
    record(6, not bad, f"20 instances Fail and Confuser, worst area delta {worst:.3f} px2; failures {bad}")


def test_criterion_07_multiplicity_hallucinator():
    t = Table(values=[[3, 8, 2, 5], [7, 1, 6, 4], [2, 9, 3, 6], [5, 4, 8, 1]])
    one, two = LayoutParams(jitter=0.05, seed=1), LayoutParams(jitter=0.05, seed=2)
    a, b = optimize(normalize(t), one), optimize(normalize(t), two)
    r = run_probe(t, Alpha.seed_change(2), one, base=a)
    pc = ProbeConfig()
    ok = (
        a.converged
        and b.converged
        and max(a.max_relative_area_error, b.max_relative_area_error) <= LAYOUT_TOL
        and r.layout_distance > pc.min_mean_displacement_frac
        and r.verdict == "Hallucinator"
    )
    record(7, ok, f"seeds 1 vs 2: layout distance {r.layout_distance:.4f} > {pc.min_mean_displacement_frac}, verdict {r.verdict}")


def test_criterion_08_outlier_visibility():
    weeks, days = np.meshgrid(np.arange(5), np.arange(7), indexing="ij")
    values = 100 + 6 * weeks + 4 * np.sin(days)
    values[2, 3] *= 5
    t = Table(values=values)
    assert outlier_cells(t).sum() == 1
    r = run_probe(t, Alpha.replace_outliers(2.0))
    ok = r.max_cell_area_delta_at == (2, 3) and r.verdict == "Commutes"
    record(8, ok, f"max delta {r.max_cell_area_delta_px2:.0f} px2 at {r.max_cell_area_delta_at}, verdict {r.verdict}")


def test_criterion_09_guidance_regression():
    golden = json.loads((GOLDEN / "task_table.json").read_text())
    t = Table(
        values=np.random.default_rng(57).uniform(10, 60, size=(5, 7)),
        row_labels=tuple(f"w{k}" for k in range(5)),
        col_labels=("Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"),
    )
    got = {k: s.status for k, s in task_suitability(t, True, 500, 500).items()}
    bounds = [
        check_cardinality(Table(values=np.ones((500, 1))), 500, 500).status == "Pass",
        check_cardinality(Table(values=np.ones((501, 1))), 500, 500).status == "Fail",
        check_cardinality(Table(values=np.ones((1, 500))), 500, 500).status == "Pass",
        check_cardinality(Table(values=np.ones((1, 501))), 500, 500).status == "Fail",
    ]
    record(9, got == golden and all(bounds), f"task table matches golden: {got == golden}, cardinality bounds {bounds}")


def _run_all_commands(root: Path, inputs: Path) -> None:
    table, series, counts = inputs / "t.csv", inputs / "s.csv", inputs / "w.csv"
    main(["layout", "--in", str(table), "--seed", "1", "--jitter", "0.02", "--out", str(root / "layout")])
    main(["render", "--in", str(table), "--color", "oranges", "--labels", "both", "--out", str(root / "render")])
    main(["analyze", "--in", str(table), "--suite", "standard", "--suite-seed", "7", "--workers", "3", "--out", str(root / "suite")])
    main(["analyze", "--in", str(table), "--alpha", "permute-cols", "--suite-seed", "3", "--out", str(root / "probe")])
    main(["guide", "--in", str(table), "--out", str(root / "guide")])
    main(["calendar", "--in", str(series), "--color", "blues", "--out", str(root / "calendar")])
    main(["waffle", "--in", str(counts), "--cols", "5", "--out", str(root / "waffle")])


def _same_tree(a: Path, b: Path) -> bool:
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    return files_a == files_b and all(filecmp.cmp(a / f, b / f, shallow=False) for f in files_a)


def test_criterion_10_determinism(tmp_path):
    inputs = tmp_path / "in"
    inputs.mkdir()
    (inputs / "t.csv").write_text("12,30,7,9\n5,14,22,3\n8,6,11,40\n")
    rng = np.random.default_rng(110)
    (inputs / "s.csv").write_text(
        "date,value\n" + "".join(f"2016-{m:02d}-{d:02d},{rng.integers(5, 50)}\n" for m in (1, 2) for d in range(1, 29))
    )
    (inputs / "w.csv").write_text("apples,7\npears,3.5\nplums,9\n")
    _run_all_commands(tmp_path / "run1", inputs)
    _run_all_commands(tmp_path / "run2", inputs)
    identical = _same_tree(tmp_path / "run1", tmp_path / "run2")
    count = sum(1 for p in (tmp_path / "run1").rglob("*") if p.is_file())

    t = Table(values=[[12, 30, 7, 9], [5, 14, 22, 3], [8, 6, 11, 40]])
    suite = run_suite(t, suite_seed=7)
    alphas, _ = standard_battery(t, LayoutParams(), suite_seed=7)
    shuffled = {}
    for k in np.random.default_rng(3).permutation(len(alphas)):
        shuffled[int(k)] = run_probe(t, alphas[k]).to_dict()
    order_free = [r.to_dict() for r in suite.reports] == [shuffled[k] for k in range(len(alphas))]
    record(10, identical and order_free, f"{count} artifacts byte-identical: {identical}; suite order independent: {order_free}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
