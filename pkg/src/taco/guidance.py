"""Static usage checks for a table about to be drawn as a table cartogram."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .table import AxisKind, NormalizedTable, ScaleType, Table

RANGE_WARN_RATIO = 1e3
NARROW_RATIO = 1.2

SUPPORTED, CONDITIONAL, CONFUSER = "Supported", "Conditional", "Confuser"

TASKS = (
    "Retrieve Value",
    "Compute Derived Value",
    "Find Extremum",
    "Sort",
    "Determine Range",
    "Characterize Distribution",
    "Correlate",
    "Find Anomalies",
    "Cluster",
    "Filter",
)

# rule id -> short statement; ids are stable and appear in every reason
RULES = {
    "labels": "exact values need text labels or a color key; area alone is too coarse",
    "relative-only": "areas carry proportions, so absolute magnitudes are lost",
    "range-hidden": "normalization hides the data's range and zero point",
    "partition-phase": "a distribution is legible only when its structure lines up with rows and columns",
    "interval-units": "for interval data the choice of unit and offset changes the picture",
    "false-correlation": "bent shared edges can look like a relationship between neighbours that the data lacks",
    "anomaly-false-positive": "distortion around large cells can look like an anomaly",
    "narrow-distribution": "a narrow distribution makes groups indistinguishable",
    "unlabeled": "the table has no labels and no secondary encoding",
    "range-fail": "some cells fall below the one-pixel legibility bound",
    "nominal-axis": "nominal axes can be reordered freely, and each order gives a different layout",
    "sorted-nominal": "the sort that orders this axis is one arbitrary choice among many",
    "non-axial": "cell positions are arbitrary slots, so rows, columns and neighbours carry no meaning",
}


@dataclass(frozen=True)
class Reason:
    rule: str

    def to_dict(self) -> dict:
        return {"rule": self.rule, "message": RULES[self.rule]}


@dataclass(frozen=True)
class TaskStatus:
    status: str
    reasons: tuple[Reason, ...] = ()

    def __post_init__(self):
        if self.status not in (SUPPORTED, CONDITIONAL, CONFUSER):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status != SUPPORTED and not self.reasons:
            raise ValueError(f"{self.status} needs at least one reason")

    def to_dict(self) -> dict:
        return {"status": self.status, "reasons": [r.to_dict() for r in self.reasons]}


@dataclass(frozen=True)
class RangeStatus:
    status: str  # Pass | Warn | Fail
    min_fraction: float
    threshold: float
    ratio: float

    def to_dict(self) -> dict:
        return {"status": self.status, "minFraction": self.min_fraction, "threshold": self.threshold, "ratio": self.ratio}


@dataclass(frozen=True)
class CardinalityStatus:
    status: str  # Pass | Fail
    axis: str | None = None
    limit: float | None = None

    def to_dict(self) -> dict:
        return {"status": self.status, "axis": self.axis, "limit": self.limit}


def min_legible_fraction(w: float, h: float) -> float:
    """Smallest fraction that still gets one square pixel: ``1 / (w*h)``."""
    return 1.0 / (w * h)


def check_range(values, w: float, h: float, warn_ratio: float = RANGE_WARN_RATIO) -> RangeStatus:
    """Range check on a normalized table, or on raw data values with pads removed."""
    if isinstance(values, NormalizedTable):
        values = values.fractions
    x = np.asarray(values, dtype=float).ravel()
    frac = x / math.fsum(x)
    threshold = min_legible_fraction(w, h)
    ratio = float(x.max() / x.min())
    lo = float(frac.min())
    if lo < threshold:
        status = "Fail"
    elif ratio > warn_ratio:
        status = "Warn"
    else:
        status = "Pass"
    return RangeStatus(status, lo, threshold, ratio)


def check_cardinality(t: Table, w: float, h: float) -> CardinalityStatus:
    m, n = t.shape
    if m > h:
        return CardinalityStatus("Fail", "rows", h)
    if n > w:
        return CardinalityStatus("Fail", "columns", w)
    return CardinalityStatus("Pass")


def axis_guidance(t: Table) -> list[dict]:
    out = []
    for axis, kind in (("rows", t.row_kind), ("columns", t.col_kind)):
        rule = {
            AxisKind.NOMINAL: "nominal-axis",
            AxisKind.SORTED_NOMINAL: "sorted-nominal",
            AxisKind.NON_AXIAL: "non-axial",
        }.get(kind)
        if rule:
            out.append({"axis": axis, "kind": kind.value, "rule": rule, "message": RULES[rule]})
    return out


def scale_type_notes(t: Table) -> list[dict]:
    if t.scale_type is ScaleType.INTERVAL:
        note = {"rule": "interval-units", "message": RULES["interval-units"]}
        if t.offset is not None:
            note["offset"] = t.offset
        return [note]
    return []


_DOWNGRADE = {SUPPORTED: CONDITIONAL, CONDITIONAL: CONFUSER, CONFUSER: CONFUSER}


def task_suitability(
    t: Table,
    has_labels: bool,
    w: float,
    h: float,
    narrow_ratio: float = NARROW_RATIO,
) -> dict[str, TaskStatus]:
    """Status of each low-level task for this table at ``w`` x ``h`` pixels."""
    x = t.data_values()
    interval = t.scale_type is ScaleType.INTERVAL
    table = {
        "Retrieve Value": (CONDITIONAL, ["labels"]),
        "Compute Derived Value": (CONDITIONAL, ["relative-only"]),
        "Find Extremum": (SUPPORTED, []),
        "Sort": (SUPPORTED, []),
        "Determine Range": (CONFUSER, ["range-hidden"]),
        "Characterize Distribution": (CONDITIONAL, ["partition-phase"] + (["interval-units"] if interval else [])),
        "Correlate": (CONDITIONAL, ["false-correlation"]),
        "Find Anomalies": (SUPPORTED, ["anomaly-false-positive"]),
        "Cluster": (CONDITIONAL, ["narrow-distribution"]),
        "Filter": (CONDITIONAL, ["narrow-distribution"]),
    }
    if not has_labels:
        table["Retrieve Value"] = (CONFUSER, table["Retrieve Value"][1] + ["unlabeled"])
    if x.max() / x.min() < narrow_ratio:
        for task in ("Cluster", "Filter"):
            table[task] = (CONFUSER, table[task][1])
    if check_range(x, w, h).status == "Fail":
        for task in ("Retrieve Value", "Find Anomalies"):
            status, rules = table[task]
            table[task] = (_DOWNGRADE[status], rules + ["range-fail"])
    return {task: TaskStatus(table[task][0], tuple(Reason(r) for r in table[task][1])) for task in TASKS}


@dataclass(frozen=True)
class GuidanceReport:
    range_status: RangeStatus
    cardinality: CardinalityStatus
    axis_warnings: list[dict]
    scale_notes: list[dict]
    tasks: dict[str, TaskStatus]
    w: float
    h: float
    has_labels: bool
    notes: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.range_status.status == "Fail" or self.cardinality.status == "Fail"

    def to_dict(self) -> dict:
        return {
            "width": self.w,
            "height": self.h,
            "hasLabels": self.has_labels,
            "rangeStatus": self.range_status.to_dict(),
            "cardinalityStatus": self.cardinality.to_dict(),
            "axisWarnings": list(self.axis_warnings),
            "scaleTypeNotes": list(self.scale_notes),
            "taskTable": {task: s.to_dict() for task, s in self.tasks.items()},
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        r = self.range_status
        lines = [f"range: {r.status} (min fraction {r.min_fraction:.3g}, bound {r.threshold:.3g}, max/min {r.ratio:.3g})"]
        c = self.cardinality
        lines.append(f"cardinality: {c.status}" + (f" ({c.axis} exceed {c.limit:g})" if c.axis else ""))
        for wng in self.axis_warnings:
            lines.append(f"warning [{wng['rule']}] {wng['axis']}: {wng['message']}")
        for note in self.scale_notes:
            lines.append(f"note [{note['rule']}]: {note['message']}")
        for note in self.notes:
            lines.append(f"note: {note}")
        width = max(len(t) for t in TASKS)
        for task, s in self.tasks.items():
            rules = ", ".join(r.rule for r in s.reasons)
            lines.append(f"{task:<{width}}  {s.status:<11} {rules}".rstrip())
        return "\n".join(lines) + "\n"


def guide(t: Table, w: float = 500.0, h: float = 500.0, has_labels: bool | None = None) -> GuidanceReport:
    """Full guidance report; labels count as present unless they are the default indices."""
    if has_labels is None:
        has_labels = not _default_labels(t)
    notes = []
    if t.pads is not None:
        notes.append(f"{int(t.pads.sum())} pad cells excluded from all statistics")
    return GuidanceReport(
        range_status=check_range(t.data_values(), w, h),
        cardinality=check_cardinality(t, w, h),
        axis_warnings=axis_guidance(t),
        scale_notes=scale_type_notes(t),
        tasks=task_suitability(t, has_labels, w, h),
        w=float(w),
        h=float(h),
        has_labels=has_labels,
        notes=notes,
    )


def _default_labels(t: Table) -> bool:
    m, n = t.shape
    return t.row_labels == tuple(map(str, range(m))) and t.col_labels == tuple(map(str, range(n)))
