"""Deterministic SVG output for table-cartogram meshes.

Polygon coordinates are written with ``repr`` so they round-trip to the
exact mesh floats; nothing is re-laid out at render time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .mesh import Mesh, ShapeMismatch
from .table import Table

RAMPS = {
    "blues": ("#f7fbff", "#c6dbef", "#6baed6", "#2171b5", "#08306b"),
    "greens": ("#f7fcf5", "#c7e9c0", "#74c476", "#238b45", "#00441b"),
    "greys": ("#ffffff", "#d9d9d9", "#969696", "#525252", "#000000"),
    "oranges": ("#fff5eb", "#fdd0a2", "#fd8d3c", "#d94801", "#7f2704"),
}
CATEGORY_COLORS = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")
PAD_FILL = "#eeeeee"
LABEL_MODES = ("none", "values", "axis", "both")


@dataclass(frozen=True)
class RenderSpec:
    color: str | None = None  # name of a sequential ramp, or None for plain cells
    labels: str = "none"
    stroke_width: float = 1.0
    stroke: str = "#333333"
    fill: str = "#dddddd"
    margin: float = 40.0
    font_size: float = 11.0
    anchors: tuple[str, ...] | None = None  # overrides the named ramp's color stops

    def __post_init__(self):
        if self.stroke_width < 0 or self.margin < 0:
            raise ValueError("stroke width and margin must be non-negative")
        if self.labels not in LABEL_MODES:
            raise ValueError(f"label mode must be one of {LABEL_MODES}")
        if self.color is not None and self.anchors is None and self.color not in RAMPS:
            raise ValueError(f"unknown color ramp {self.color!r}; known: {', '.join(sorted(RAMPS))}")

    def stops(self) -> tuple[str, ...]:
        return tuple(self.anchors) if self.anchors else RAMPS[self.color]


def _rgb(hex_color: str) -> np.ndarray:
    h = hex_color.lstrip("#")
    return np.array([int(h[k : k + 2], 16) for k in (0, 2, 4)], dtype=float)


def ramp_color(stops, position: float) -> str:
    """Piecewise-linear interpolation through ``stops`` at ``position`` in [0, 1]."""
    position = min(max(float(position), 0.0), 1.0)
    scaled = position * (len(stops) - 1)
    k = min(int(math.floor(scaled)), len(stops) - 2)
    frac = scaled - k
    rgb = _rgb(stops[k]) * (1 - frac) + _rgb(stops[k + 1]) * frac
    return "#" + "".join(f"{int(round(c)):02x}" for c in rgb)


def ramp_positions(t: Table) -> np.ndarray:
    """Position of every cell on the color ramp, strictly increasing in value.

    Positions come from normalized data values; pads get NaN.
    """
    data = t.data_mask
    x = t.values / math.fsum(t.data_values())
    lo, hi = x[data].min(), x[data].max()
    pos = np.full(x.shape, 0.5) if hi == lo else (x - lo) / (hi - lo)
    return np.where(data, pos, np.nan)


def _num(x: float) -> str:
    return repr(float(x))


def centroid(quad: np.ndarray) -> tuple[float, float]:
    x, y = quad[:, 0], quad[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2
    if a == 0:
        return float(x.mean()), float(y.mean())
    return float(((x + xn) * cross).sum() / (6 * a)), float(((y + yn) * cross).sum() / (6 * a))


def _fmt_value(v: float) -> str:
    return f"{v:.4g}"


def cell_elements(mesh: Mesh, t: Table, spec: RenderSpec, categories=None) -> list[str]:
    """Polygon and label elements in mesh coordinates (no margin applied)."""
    if mesh.shape != t.shape:
        raise ShapeMismatch(f"mesh {mesh.shape} vs table {t.shape}")
    m, n = t.shape
    data = t.data_mask
    pos = ramp_positions(t) if spec.color is not None else None
    cats = None if categories is None else np.asarray(categories)
    out = []
    for i in range(m):
        for j in range(n):
            quad = mesh.quad(i, j)
            points = " ".join(f"{_num(x)},{_num(y)}" for x, y in quad)
            attrs = [f'id="cell-{i}-{j}"', f'points="{points}"']
            if not data[i, j]:
                fill = PAD_FILL
                attrs.append('class="pad"')
            elif cats is not None and cats[i, j] >= 0:
                fill = CATEGORY_COLORS[int(cats[i, j]) % len(CATEGORY_COLORS)]
            elif pos is not None:
                fill = ramp_color(spec.stops(), pos[i, j])
            else:
                fill = spec.fill
            attrs += [f'fill="{fill}"', f'stroke="{spec.stroke}"', f'stroke-width="{_num(spec.stroke_width)}"']
            if data[i, j]:
                attrs.append(f'data-value="{_num(t.values[i, j])}"')
            out.append(f"<polygon {' '.join(attrs)}/>")
    if spec.labels in ("values", "both"):
        for i in range(m):
            for j in range(n):
                if not data[i, j]:
                    continue
                cx, cy = centroid(mesh.quad(i, j))
                out.append(
                    f'<text id="label-{i}-{j}" x="{_num(cx)}" y="{_num(cy)}" font-size="{_num(spec.font_size)}" '
                    f'text-anchor="middle" dominant-baseline="central">{escape(_fmt_value(t.values[i, j]))}</text>'
                )
    if spec.labels in ("axis", "both"):
        v = mesh.vertices
        for i, name in enumerate(t.row_labels):
            y = (v[i, 0, 1] + v[i + 1, 0, 1]) / 2
            out.append(
                f'<text class="row-label" x="{_num(-4.0)}" y="{_num(y)}" font-size="{_num(spec.font_size)}" '
                f'text-anchor="end" dominant-baseline="central">{escape(name)}</text>'
            )
        for j, name in enumerate(t.col_labels):
            x = (v[0, j, 0] + v[0, j + 1, 0]) / 2
            out.append(
                f'<text class="col-label" x="{_num(x)}" y="{_num(-4.0)}" font-size="{_num(spec.font_size)}" '
                f'text-anchor="middle">{escape(name)}</text>'
            )
    return out


def _notes(t: Table) -> list[str]:
    notes = []
    if t.offset is not None:
        notes.append(f"values offset by +{t.offset:g} (interval scale)")
    if t.unit:
        notes.append(f"unit: {t.unit}")
    return notes


def render_group(
    mesh: Mesh, t: Table, spec: RenderSpec, x: float, y: float, group_id: str | None = None, title: str | None = None, categories=None
) -> str:
    head = f'<g{" id=" + quoteattr(group_id) if group_id else ""} transform="translate({_num(x)},{_num(y)})">'
    lines = [head]
    if title:
        lines.append(f'<text class="title" x="0.0" y="{_num(-spec.font_size)}" font-size="{_num(spec.font_size + 2)}">{escape(title)}</text>')
    lines += cell_elements(mesh, t, spec, categories)
    for k, note in enumerate(_notes(t)):
        lines.append(
            f'<text class="note" x="0.0" y="{_num(mesh.h + (k + 1.5) * spec.font_size)}" font-size="{_num(spec.font_size)}">{escape(note)}</text>'
        )
    lines.append("</g>")
    return "\n".join(lines)


def _document(width: float, height: float, body: str) -> str:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">\n{body}\n</svg>\n'
    )


def render_svg(mesh: Mesh, t: Table, spec: RenderSpec | None = None, title: str | None = None, categories=None) -> str:
    spec = spec or RenderSpec()
    pad = spec.margin
    footer = len(_notes(t)) * spec.font_size * 1.5
    body = render_group(mesh, t, spec, pad, pad, group_id="taco", title=title, categories=categories)
    return _document(mesh.w + 2 * pad, mesh.h + 2 * pad + footer, body)
