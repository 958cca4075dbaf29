"""``taco`` command line: layout, render, analyze, guide, calendar, waffle.

Every output is a pure function of the inputs and flags. JSON is written with
sorted keys, and nothing time- or host-dependent is recorded.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .algebra import ProbeConfig, parse_alpha, run_probe, run_suite
from .calendar import CalendarSpec, build_month_table, compose_months, month_key, parse_weekday
from .guidance import RULES, guide
from .layout import LayoutParams, LayoutResult, optimize
from .render import RenderSpec, render_svg
from .table import IngestOptions, Table, TableError, ingest, normalize
from .waffle import build_waffle

# flag defaults; TACO_CONFIG values sit between these and explicit flags
DEFAULTS = {
    "width": 500.0,
    "height": 500.0,
    "tol": 0.01,
    "max_iters": 20000,
    "seed": 0,
    "jitter": 0.0,
    "alpha": None,
    "suite": None,
    "suite_seed": 0,
    "zero_policy": "error",
    "row_kind": "ordinal",
    "col_kind": "ordinal",
    "scale_type": "ratio",
    "header_row": False,
    "header_col": False,
    "color": None,
    "labels": "none",
    "week_start": "sunday",
    "cols": None,
    "rows": None,
    "unit": 1.0,
    "format": "json",
    "workers": 1,
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str
    out: str | None
    width: float
    height: float
    tol: float
    max_iters: int
    seed: int
    jitter: float
    alpha: str | None
    suite: str | None
    suite_seed: int
    zero_policy: str
    row_kind: str
    col_kind: str
    scale_type: str
    header_row: bool
    header_col: bool
    color: str | None
    labels: str
    week_start: str
    cols: int | None
    rows: int | None
    unit: float
    format: str
    workers: int

    def __post_init__(self):
        for name in ("width", "height", "tol", "unit"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.max_iters < 0 or self.jitter < 0 or self.workers < 1:
            raise UsageError("--max-iters and --jitter must be non-negative, --workers positive")
        if self.cols is not None and self.cols < 1 or self.rows is not None and self.rows < 1:
            raise UsageError("--cols and --rows must be positive")

    def layout_params(self) -> LayoutParams:
        return LayoutParams(
            w=self.width, h=self.height, tolerance=self.tol, max_iterations=self.max_iters, seed=self.seed, jitter=self.jitter
        )

    def render_spec(self) -> RenderSpec:
        return RenderSpec(color=self.color, labels=self.labels)

    def ingest_options(self) -> IngestOptions:
        return IngestOptions(
            header_row=self.header_row,
            header_col=self.header_col,
            row_kind=self.row_kind,
            col_kind=self.col_kind,
            scale_type=self.scale_type,
            zero_policy=self.zero_policy,
        )

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        # neither changes any result
        out.pop("out")
        out.pop("workers")
        return out


def _add_common(p: argparse.ArgumentParser, table_input: bool = True) -> None:
    p.add_argument("--in", dest="input", required=True, help="input file (CSV or JSON table)")
    p.add_argument("--out", help="output directory (default: current directory, or stdout for reports)")
    p.add_argument("--width", type=float)
    p.add_argument("--height", type=float)
    p.add_argument("--tol", type=float, help="max relative area error")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jitter", type=float, help="initial perturbation, fraction of min cell span")
    p.add_argument("--color", help="sequential ramp name: blues, greens, greys, oranges")
    p.add_argument("--labels", choices=("none", "values", "axis", "both"))
    if table_input:
        p.add_argument("--zero-policy", help="error | intervalize:<offset>")
        p.add_argument("--row-kind", choices=("nominal", "sorted-nominal", "ordinal", "non-axial"))
        p.add_argument("--col-kind", choices=("nominal", "sorted-nominal", "ordinal", "non-axial"))
        p.add_argument("--scale-type", choices=("ratio", "interval"))
        p.add_argument("--header-row", action="store_true", default=None)
        p.add_argument("--header-col", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taco", description="Table cartograms and their algebraic probes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="optimize a table cartogram mesh")
    _add_common(p)

    p = sub.add_parser("render", help="lay out and write an SVG")
    _add_common(p)

    p = sub.add_parser("analyze", help="run one probe or the standard suite")
    _add_common(p)
    p.add_argument("--alpha", help="e.g. permute-rows, scale:10, affine:1.8,32, set-cell:0,1,5")
    p.add_argument("--suite", choices=("standard",))
    p.add_argument("--suite-seed", type=int)
    p.add_argument("--workers", type=int, help="parallel probe threads; results do not depend on it")

    p = sub.add_parser("guide", help="usage guidance for a table")
    _add_common(p)
    p.add_argument("--format", choices=("json", "text"))

    p = sub.add_parser("calendar", help="month calendars from a date,value CSV")
    _add_common(p, table_input=False)
    p.add_argument("--week-start", help="weekday name, e.g. sunday or monday")

    p = sub.add_parser("waffle", help="waffle arrangement from a category,count CSV")
    _add_common(p, table_input=False)
    p.add_argument("--cols", type=int, required=False)
    p.add_argument("--rows", type=int)
    p.add_argument("--unit", type=float, help="count per cell (default 1)")
    return parser


def load_config_file(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    path = environ.get("TACO_CONFIG")
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("TACO_CONFIG must hold a JSON object")
    out = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name not in DEFAULTS:
            raise UsageError(f"unknown key {key!r} in TACO_CONFIG")
        out[name] = value
    return out


def resolve(args: argparse.Namespace, environ=None) -> RunConfig:
    merged = dict(DEFAULTS)
    merged.update(load_config_file(environ))
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            merged[key] = value
    return RunConfig(command=args.command, input=args.input, out=args.out, **merged)


# --- io -----------------------------------------------------------------------


def dump_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _out_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out or ".")


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def read_table(cfg: RunConfig) -> Table:
    return ingest(_read_text(cfg.input), cfg.ingest_options())


def _emit_report(cfg: RunConfig, name: str, text: str) -> None:
    if cfg.out:
        _write(_out_dir(cfg) / name, text)
    else:
        sys.stdout.write(text)


def _layout_report(cfg: RunConfig, t: Table, r: LayoutResult) -> dict:
    report = {
        "config": cfg.to_dict(),
        "layoutParams": cfg.layout_params().to_dict(),
        "shape": list(t.shape),
        "converged": r.converged,
        "iterations": r.iterations,
        "maxRelativeAreaError": r.max_relative_area_error,
        "stopReason": r.stop_reason,
        "objectiveTrace": list(r.objective_trace),
    }
    if t.offset is not None:
        report["offset"] = t.offset
        report["scaleType"] = t.scale_type.value
    if t.pads is not None:
        report["padCells"] = int(t.pads.sum())
    return report


# --- commands -----------------------------------------------------------------


def cmd_layout(cfg: RunConfig) -> int:
    t = read_table(cfg)
    r = optimize(normalize(t), cfg.layout_params())
    out = _out_dir(cfg)
    _write(out / "mesh.json", dump_json(r.to_dict()))
    _write(out / "layout-report.json", dump_json(_layout_report(cfg, t, r)))
    if not r.converged:
        print(
            f"taco: layout did not converge ({r.stop_reason}, max relative area error {r.max_relative_area_error:.3g})",
            file=sys.stderr,
        )
        return 2
    return 0


def cmd_render(cfg: RunConfig) -> int:
    t = read_table(cfg)
    r = optimize(normalize(t), cfg.layout_params())
    out = _out_dir(cfg)
    _write(out / "taco.svg", render_svg(r.mesh, t, cfg.render_spec()))
    _write(out / "mesh.json", dump_json(r.to_dict()))
    _write(out / "layout-report.json", dump_json(_layout_report(cfg, t, r)))
    return 0 if r.converged else 2


def cmd_analyze(cfg: RunConfig) -> int:
    if (cfg.alpha is None) == (cfg.suite is None):
        raise UsageError("analyze needs exactly one of --alpha or --suite")
    t = read_table(cfg)
    lp, pc = cfg.layout_params(), ProbeConfig()
    if cfg.alpha is not None:
        a = parse_alpha(cfg.alpha, t.shape, seed=cfg.suite_seed)
        body = {"probe": run_probe(t, a, lp, pc).to_dict()}
    else:
        body = {"suite": run_suite(t, lp, pc, suite_seed=cfg.suite_seed, workers=cfg.workers).to_dict()}
    body["config"] = cfg.to_dict()
    _emit_report(cfg, "ava-report.json", dump_json(body))
    return 0


def cmd_guide(cfg: RunConfig) -> int:
    t = read_table(cfg)
    g = guide(t, cfg.width, cfg.height)
    if cfg.format == "text":
        _emit_report(cfg, "guidance.txt", g.to_text())
    else:
        _emit_report(cfg, "guidance.json", dump_json(g.to_dict()))
    return 1 if g.failed else 0


def read_series(text: str) -> list[tuple[dt.date, float]]:
    """``date,value`` rows; a header row is skipped when its value is not numeric."""
    out = []
    for k, row in enumerate(csv.reader(io.StringIO(text))):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 2:
            raise TableError(f"line {k + 1}: expected date,value")
        try:
            value = float(row[1])
        except ValueError:
            if k == 0:
                continue
            raise TableError(f"line {k + 1}: value {row[1]!r} is not numeric") from None
        try:
            day = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise TableError(f"line {k + 1}: date {row[0]!r} is not YYYY-MM-DD") from None
        out.append((day, value))
    if not out:
        raise TableError("no dated values")
    return out


def cmd_calendar(cfg: RunConfig) -> int:
    series = read_series(_read_text(cfg.input))
    spec = CalendarSpec(week_start=parse_weekday(cfg.week_start))
    months = sorted({(d.year, d.month) for d, _ in series})
    lp = cfg.layout_params()
    out = _out_dir(cfg)
    results, status = [], 0
    report = {"config": cfg.to_dict(), "months": []}
    for month in months:
        t = build_month_table(series, month, spec)
        r = optimize(normalize(t), lp)
        key = month_key(month)
        _write(out / f"mesh-{key}.json", dump_json(r.to_dict()))
        report["months"].append(
            {
                "month": key,
                "shape": list(t.shape),
                "padMask": t.pads.tolist(),
                "converged": r.converged,
                "iterations": r.iterations,
                "maxRelativeAreaError": r.max_relative_area_error,
            }
        )
        results.append((month, r.mesh, t))
        if not r.converged:
            status = 2
    _write(out / "calendar.svg", compose_months(results, spec, cfg.render_spec()))
    _write(out / "calendar-report.json", dump_json(report))
    return status


def read_counts(text: str) -> list[tuple[str, float]]:
    out = []
    for k, row in enumerate(csv.reader(io.StringIO(text))):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 2:
            raise TableError(f"line {k + 1}: expected category,count")
        try:
            out.append((row[0].strip(), float(row[1])))
        except ValueError:
            if k == 0:
                continue
            raise TableError(f"line {k + 1}: count {row[1]!r} is not numeric") from None
    if not out:
        raise TableError("no category counts")
    return out


def cmd_waffle(cfg: RunConfig) -> int:
    if cfg.cols is None:
        raise UsageError("waffle needs --cols")
    w = build_waffle(read_counts(_read_text(cfg.input)), cfg.cols, unit=cfg.unit, rows=cfg.rows)
    r = optimize(normalize(w.table), cfg.layout_params())
    g = guide(w.table, cfg.width, cfg.height, has_labels=False)
    out = _out_dir(cfg)
    _write(out / "waffle.svg", render_svg(r.mesh, w.table, cfg.render_spec(), categories=w.categories))
    _write(out / "mesh.json", dump_json(r.to_dict()))
    report = {
        "config": cfg.to_dict(),
        "shape": list(w.table.shape),
        "categories": w.categories.tolist(),
        "names": list(w.names),
        "converged": r.converged,
        "maxRelativeAreaError": r.max_relative_area_error,
        "warnings": [{"rule": "non-axial", "message": RULES["non-axial"]}],
        "guidance": g.to_dict(),
    }
    _write(out / "waffle-report.json", dump_json(report))
    return 0 if r.converged else 2


COMMANDS = {
    "layout": cmd_layout,
    "render": cmd_render,
    "analyze": cmd_analyze,
    "guide": cmd_guide,
    "calendar": cmd_calendar,
    "waffle": cmd_waffle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, TableError, ValueError, OSError) as exc:
        print(f"taco: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
