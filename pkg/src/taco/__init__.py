"""Table cartogram layout with algebraic probes and usage guidance."""

from .algebra import Alpha, ProbeConfig, ProbeReport, SuiteReport, apply_alpha, layout_distance, run_probe, run_suite
from .calendar import CalendarSpec, build_month_table, compose_months
from .guidance import GuidanceReport, check_cardinality, check_range, guide, task_suitability
from .layout import LayoutParams, LayoutResult, optimize
from .mesh import Mesh, check_topology
from .render import RenderSpec, render_svg
from .table import AxisKind, IngestOptions, ScaleType, Table, ingest, intervalize, normalize, transpose
from .waffle import build_waffle

__version__ = "0.1.0"

__all__ = [
    "Alpha",
    "AxisKind",
    "CalendarSpec",
    "GuidanceReport",
    "IngestOptions",
    "LayoutParams",
    "LayoutResult",
    "Mesh",
    "ProbeConfig",
    "ProbeReport",
    "RenderSpec",
    "ScaleType",
    "SuiteReport",
    "Table",
    "apply_alpha",
    "build_month_table",
    "build_waffle",
    "check_cardinality",
    "check_range",
    "check_topology",
    "compose_months",
    "guide",
    "ingest",
    "intervalize",
    "layout_distance",
    "normalize",
    "optimize",
    "render_svg",
    "run_probe",
    "run_suite",
    "task_suitability",
    "transpose",
]
