"""Data transformations (alphas), layout comparison and probe verdicts.

A probe applies one alpha to a table, lays out both tables with the same
parameters and compares the two meshes. The verdict follows the
commutativity rule: a data change that matters should show, and one that
does not matter should not.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .layout import LayoutParams, LayoutResult, optimize
from .mesh import Mesh, ShapeMismatch
from .table import AxisKind, ScaleType, Table, normalize, transpose


class AlphaPrecondition(ValueError):
    pass


KINDS = (
    "permute-rows",
    "permute-cols",
    "transpose",
    "reciprocal",
    "scale",
    "affine",
    "double-min",
    "replace-outliers",
    "decorrelate",
    "set-cell",
    "seed",
)


@dataclass(frozen=True)
class Alpha:
    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown alpha {self.kind!r}; expected one of {', '.join(KINDS)}")
        object.__setattr__(self, "params", tuple(self.params))

    @classmethod
    def permute_rows(cls, perm) -> Alpha:
        return cls("permute-rows", tuple(int(k) for k in perm))

    @classmethod
    def permute_cols(cls, perm) -> Alpha:
        return cls("permute-cols", tuple(int(k) for k in perm))

    @classmethod
    def transpose(cls) -> Alpha:
        return cls("transpose")

    @classmethod
    def reciprocal(cls) -> Alpha:
        return cls("reciprocal")

    @classmethod
    def uniform_scale(cls, k: float) -> Alpha:
        return cls("scale", (float(k),))

    @classmethod
    def affine(cls, mul: float, add: float, unit: str | None = None) -> Alpha:
        return cls("affine", (float(mul), float(add), unit))

    @classmethod
    def double_min(cls) -> Alpha:
        return cls("double-min")

    @classmethod
    def replace_outliers(cls, z: float = 2.0) -> Alpha:
        return cls("replace-outliers", (float(z),))

    @classmethod
    def decorrelate(cls, axis: str) -> Alpha:
        if axis not in ("rows", "cols"):
            raise ValueError("decorrelate axis must be 'rows' or 'cols'")
        return cls("decorrelate", (axis,))

    @classmethod
    def set_cell(cls, i: int, j: int, value: float) -> Alpha:
        return cls("set-cell", (int(i), int(j), float(value)))

    @classmethod
    def seed_change(cls, seed: int) -> Alpha:
        return cls("seed", (int(seed),))

    def label(self) -> str:
        """Round-trips through :func:`parse_alpha`."""
        args = [str(p) for p in self.params if p is not None]
        return f"{self.kind}:{','.join(args)}" if args else self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "label": self.label()}


def _random_perm(n: int, rng: np.random.Generator) -> tuple[int, ...]:
    if n < 2:
        return tuple(range(n))
    while True:
        perm = tuple(int(k) for k in rng.permutation(n))
        if perm != tuple(range(n)):
            return perm


def parse_alpha(text: str, shape: tuple[int, int], seed: int = 0) -> Alpha:
    """Parse ``kind[:args]``; permutations without explicit order are drawn from ``seed``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.strip().lower()
    args = [a.strip() for a in arg.split(",")] if arg.strip() else []
    rng = np.random.default_rng(seed)
    try:
        if kind == "permute-rows":
            return Alpha.permute_rows(map(int, args) if args else _random_perm(shape[0], rng))
        if kind == "permute-cols":
            return Alpha.permute_cols(map(int, args) if args else _random_perm(shape[1], rng))
        if kind in ("transpose", "reciprocal", "double-min"):
            return Alpha(kind)
        if kind == "scale":
            return Alpha.uniform_scale(float(args[0]))
        if kind == "affine":
            return Alpha.affine(float(args[0]), float(args[1]), args[2] if len(args) > 2 else None)
        if kind == "replace-outliers":
            return Alpha.replace_outliers(float(args[0]) if args else 2.0)
        if kind == "decorrelate":
            return Alpha.decorrelate(args[0] if args else "rows")
        if kind == "set-cell":
            return Alpha.set_cell(int(args[0]), int(args[1]), float(args[2]))
        if kind == "seed":
            return Alpha.seed_change(int(args[0]))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad arguments for alpha {text!r}: {exc}") from None
    raise ValueError(f"unknown alpha {kind!r}; expected one of {', '.join(KINDS)}")


def semantically_trivial(t: Table, a: Alpha) -> bool:
    """Whether the alpha only re-represents the data.

    Reordering a nominal axis is relabeling; so is reordering the arbitrary
    slots of a non-axial (waffle) arrangement.
    """
    loose = (AxisKind.NOMINAL, AxisKind.NON_AXIAL)
    if a.kind == "permute-rows":
        return t.row_kind in loose
    if a.kind == "permute-cols":
        return t.col_kind in loose
    if a.kind == "affine":
        return t.scale_type is ScaleType.INTERVAL
    return a.kind in ("seed", "transpose")


def _refill_pads(t: Table, values: np.ndarray) -> np.ndarray:
    if t.pads is not None:
        values[t.pads] = values[~t.pads].mean()
    return values


def apply_alpha(t: Table, a: Alpha) -> Table:
    v = np.array(t.values)
    data = t.data_mask
    k = a.kind
    if k in ("permute-rows", "permute-cols"):
        perm = list(a.params)
        size = t.shape[0] if k == "permute-rows" else t.shape[1]
        if sorted(perm) != list(range(size)):
            raise AlphaPrecondition(f"{perm} is not a permutation of {size} items")
        pads = None if t.pads is None else np.array(t.pads)
        if k == "permute-rows":
            labels = tuple(t.row_labels[p] for p in perm)
            return replace(t, values=v[perm], row_labels=labels, pads=None if pads is None else pads[perm])
        labels = tuple(t.col_labels[p] for p in perm)
        return replace(t, values=v[:, perm], col_labels=labels, pads=None if pads is None else pads[:, perm])
    if k == "transpose":
        return transpose(t)
    if k == "seed":
        return t
    if k == "reciprocal":
        return t.with_values(_refill_pads(t, 1.0 / v))
    if k == "scale":
        (factor,) = a.params
        if not factor > 0:
            raise AlphaPrecondition("uniform scale needs k > 0")
        return t.with_values(v * factor)
    if k == "affine":
        mul, add, unit = a.params
        if t.scale_type is not ScaleType.INTERVAL:
            raise AlphaPrecondition("affine re-representation only applies to interval data")
        out = v * mul + add
        if not (out[data] > 0).all():
            raise AlphaPrecondition("affine map produces non-positive values")
        offset = None if t.offset is None else t.offset * mul + add
        return t.with_values(_refill_pads(t, out), unit=unit if unit is not None else t.unit, offset=offset)
    if k == "double-min":
        idx = np.flatnonzero(data.ravel())[np.argmin(v[data])]
        v.ravel()[idx] *= 2.0
        return t.with_values(_refill_pads(t, v))
    if k == "replace-outliers":
        (z,) = a.params
        return t.with_values(_refill_pads(t, _replace_outliers(v, data, z)))
    if k == "decorrelate":
        (axis,) = a.params
        vv = v if axis == "rows" else v.T
        dd = data if axis == "rows" else data.T
        sums = np.where(dd, vv, 0.0).sum(axis=1)
        vv = vv * (sums.mean() / sums)[:, None]
        return t.with_values(_refill_pads(t, vv if axis == "rows" else vv.T))
    if k == "set-cell":
        i, j, value = a.params
        m, n = t.shape
        if not (0 <= i < m and 0 <= j < n):
            raise AlphaPrecondition(f"cell ({i}, {j}) outside {m}x{n} table")
        if not data[i, j]:
            raise AlphaPrecondition(f"cell ({i}, {j}) is a pad, not data")
        if not (value > 0 and math.isfinite(value)):
            raise AlphaPrecondition("set-cell needs a positive value (intervalize zero-bearing data first)")
        v[i, j] = value
        return t.with_values(_refill_pads(t, v))
    raise AlphaPrecondition(f"unhandled alpha {k!r}")


def _replace_outliers(v: np.ndarray, data: np.ndarray, z: float) -> np.ndarray:
    out = np.array(v)
    for i in range(v.shape[0]):
        row = v[i][data[i]]
        if row.size < 2:
            continue
        mean, std = row.mean(), row.std()
        hit = data[i] & (np.abs(v[i] - mean) > z * std)
        out[i, hit] = mean
    return out


def outlier_cells(t: Table, z: float = 2.0) -> np.ndarray:
    v = t.values
    return _replace_outliers(v, t.data_mask, z) != v


# --- layout comparison -------------------------------------------------------


def untranspose_mesh(mesh: Mesh) -> Mesh:
    """Map the mesh of a transposed table back onto the original's cells."""
    v = mesh.vertices
    w, h = mesh.w, mesh.h
    back = np.empty((v.shape[1], v.shape[0], 2))
    back[..., 0] = v[..., 1].T * (w / h)
    back[..., 1] = v[..., 0].T * (h / w)
    return Mesh(vertices=back, w=w, h=h)


def cell_area_deltas(a: Mesh, b: Mesh) -> np.ndarray:
    if a.shape != b.shape or (a.w, a.h) != (b.w, b.h):
        raise ShapeMismatch(f"meshes {a.shape} on {a.w}x{a.h} vs {b.shape} on {b.w}x{b.h}")
    return np.abs(np.abs(a.areas()) - np.abs(b.areas()))


def layout_distance(a: Mesh, b: Mesh) -> float:
    """Mean vertex displacement as a fraction of the rectangle diagonal."""
    if a.shape != b.shape or (a.w, a.h) != (b.w, b.h):
        raise ShapeMismatch(f"meshes {a.shape} on {a.w}x{a.h} vs {b.shape} on {b.w}x{b.h}")
    d = np.linalg.norm(a.vertices - b.vertices, axis=2)
    return float(d.mean() / a.diagonal)


# --- probes -------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeConfig:
    data_significance: float = 0.05
    min_mean_displacement_frac: float = 0.001
    min_cell_area_delta_px2: float = 1.0

    def __post_init__(self):
        if not (self.data_significance > 0 and self.min_mean_displacement_frac > 0 and self.min_cell_area_delta_px2 > 0):
            raise ValueError("probe thresholds must be positive")

    def to_dict(self) -> dict:
        return {
            "dataSignificanceThreshold": self.data_significance,
            "minMeanDisplacementFrac": self.min_mean_displacement_frac,
            "minCellAreaDeltaPx2": self.min_cell_area_delta_px2,
        }


VERDICTS = ("Commutes", "Confuser", "Hallucinator", "Inconclusive")


def verdict(trivial: bool, visible: bool, converged: bool = True) -> str:
    if not converged:
        return "Inconclusive"
    if trivial:
        return "Hallucinator" if visible else "Commutes"
    return "Commutes" if visible else "Confuser"


@dataclass(frozen=True)
class ProbeReport:
    alpha: Alpha
    semantically_trivial: bool
    data_distance_raw: float
    data_distance_normalized: float
    applicable_distance: float
    layout_distance: float
    max_cell_area_delta_px2: float
    max_cell_area_delta_at: tuple[int, int]
    data_trivial: bool
    visible: bool
    verdict: str
    config: ProbeConfig
    converged: tuple[bool, bool] = (True, True)
    annotations: dict = field(default_factory=dict)
    cell_area_deltas: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.to_dict(),
            "semanticallyTrivial": self.semantically_trivial,
            "dataDistanceRaw": self.data_distance_raw,
            "dataDistanceNormalized": self.data_distance_normalized,
            "applicableDistance": self.applicable_distance,
            "layoutDistance": self.layout_distance,
            "maxCellAreaDeltaPx2": self.max_cell_area_delta_px2,
            "maxCellAreaDeltaAt": list(self.max_cell_area_delta_at),
            "cellAreaDeltasPx2": self.cell_area_deltas,
            "dataTrivial": self.data_trivial,
            "visible": self.visible,
            "verdict": self.verdict,
            "converged": list(self.converged),
            "annotations": dict(self.annotations),
            "thresholds": self.config.to_dict(),
        }


def _data_distances(before: Table, after: Table) -> tuple[float, float]:
    mask = before.data_mask & after.data_mask
    x, y = before.values[mask], after.values[mask]
    raw = float(np.max(np.abs(y - x) / x))
    xn = x / math.fsum(before.data_values())
    yn = y / math.fsum(after.data_values())
    return raw, float(np.max(np.abs(yn - xn) / xn))


def run_probe(
    t: Table,
    a: Alpha,
    lp: LayoutParams | None = None,
    pc: ProbeConfig | None = None,
    base: LayoutResult | None = None,
) -> ProbeReport:
    """Apply ``a``, lay out both tables and classify the pair.

    ``base`` may carry a precomputed layout of ``t`` under ``lp``.
    """
    lp = lp or LayoutParams()
    pc = pc or ProbeConfig()
    after = apply_alpha(t, a)
    base = base or optimize(normalize(t), lp)
    if a.kind == "seed":
        other = optimize(normalize(t), replace(lp, seed=a.params[0]))
    else:
        other = optimize(normalize(after), lp)
    mesh_b = other.mesh
    compare_to = after
    if a.kind == "transpose":
        mesh_b = untranspose_mesh(mesh_b)
        compare_to = transpose(after)

    raw, norm = _data_distances(t, compare_to)
    if a.kind == "seed":
        raw = norm = 0.0
    trivial = semantically_trivial(t, a)
    # a pure re-representation has no semantic distance, whatever moved positionally
    applicable = 0.0 if trivial else raw if a.kind == "scale" else norm
    data_trivial = applicable < pc.data_significance

    dist = layout_distance(base.mesh, mesh_b)
    deltas = cell_area_deltas(base.mesh, mesh_b)
    mask = t.data_mask & compare_to.data_mask
    masked = np.where(mask, deltas, -np.inf)
    at = tuple(int(k) for k in np.unravel_index(np.argmax(masked), masked.shape))
    max_delta = float(deltas[at])
    visible = dist > pc.min_mean_displacement_frac or max_delta > pc.min_cell_area_delta_px2
    converged = (base.converged, other.converged)

    notes = {}
    if a.kind == "reciprocal":
        notes["orderInverted"] = _order_inverted(t, mesh_b)
    if not all(converged):
        notes["diagnostics"] = {
            "baseStopReason": base.stop_reason,
            "alphaStopReason": other.stop_reason,
            "baseError": base.max_relative_area_error,
            "alphaError": other.max_relative_area_error,
        }
    return ProbeReport(
        alpha=a,
        semantically_trivial=trivial,
        data_distance_raw=raw,
        data_distance_normalized=norm,
        applicable_distance=applicable,
        layout_distance=dist,
        max_cell_area_delta_px2=max_delta,
        max_cell_area_delta_at=at,
        data_trivial=data_trivial,
        visible=visible,
        verdict=verdict(data_trivial, visible, all(converged)),
        config=pc,
        converged=converged,
        annotations=notes,
        cell_area_deltas=np.where(mask, deltas, 0.0).tolist(),
    )


def _order_inverted(t: Table, mesh_after: Mesh) -> bool:
    mask = t.data_mask.ravel()
    values = t.values.ravel()[mask]
    areas = np.abs(mesh_after.areas()).ravel()[mask]
    return bool(np.array_equal(np.argsort(areas, kind="stable"), np.argsort(values, kind="stable")[::-1]))


# --- suites -------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteReport:
    reports: list[ProbeReport]
    skipped: list[tuple[str, str]]
    suite_seed: int
    layout: LayoutParams

    def summary(self) -> dict:
        out = {"hallucinators": [], "confusers": [], "commutes": [], "inconclusive": []}
        key = {"Hallucinator": "hallucinators", "Confuser": "confusers", "Commutes": "commutes", "Inconclusive": "inconclusive"}
        for r in self.reports:
            out[key[r.verdict]].append(r.alpha.label())
        return out

    def to_dict(self) -> dict:
        return {
            "suiteSeed": self.suite_seed,
            "layoutParams": self.layout.to_dict(),
            "reports": [r.to_dict() for r in self.reports],
            "skipped": [{"alpha": a, "reason": why} for a, why in self.skipped],
            "summary": self.summary(),
        }


def standard_battery(t: Table, lp: LayoutParams, suite_seed: int = 0) -> tuple[list[Alpha], list[tuple[str, str]]]:
    """Catalog-ordered alphas applicable to ``t`` plus skipped ones with reasons."""
    rng = np.random.default_rng(suite_seed)
    m, n = t.shape
    alphas: list[Alpha] = []
    skipped: list[tuple[str, str]] = []
    # draw both permutations up front so the stream never depends on skips
    rows, cols = _random_perm(m, rng), _random_perm(n, rng)
    if m > 1:
        alphas.append(Alpha.permute_rows(rows))
    else:
        skipped.append(("permute-rows", "single row"))
    if n > 1:
        alphas.append(Alpha.permute_cols(cols))
    else:
        skipped.append(("permute-cols", "single column"))
    alphas += [Alpha.transpose(), Alpha.reciprocal(), Alpha.uniform_scale(10.0)]
    if t.scale_type is ScaleType.INTERVAL:
        alphas.append(Alpha.affine(9 / 5, 32.0))
    else:
        skipped.append(("affine", "ratio-scale data has no affine re-representation"))
    alphas.append(Alpha.double_min())
    if outlier_cells(t).any():
        alphas.append(Alpha.replace_outliers(2.0))
    else:
        skipped.append(("replace-outliers", "no cell beyond 2 row standard deviations"))
    alphas += [Alpha.decorrelate("rows"), Alpha.decorrelate("cols")]
    i, j = np.unravel_index(np.argmax(np.where(t.data_mask, t.values, -np.inf)), t.shape)
    alphas.append(Alpha.set_cell(int(i), int(j), float(t.values[i, j]) / 2))
    alphas.append(Alpha.seed_change(lp.seed + 1))
    return alphas, skipped


def run_suite(
    t: Table,
    lp: LayoutParams | None = None,
    pc: ProbeConfig | None = None,
    suite_seed: int = 0,
    workers: int = 1,
) -> SuiteReport:
    lp = lp or LayoutParams()
    pc = pc or ProbeConfig()
    alphas, skipped = standard_battery(t, lp, suite_seed)
    base = optimize(normalize(t), lp)

    def probe(a):
        return run_probe(t, a, lp, pc, base=base)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(probe, alphas))
    else:
        reports = [probe(a) for a in alphas]
    return SuiteReport(reports=reports, skipped=skipped, suite_seed=suite_seed, layout=lp)
