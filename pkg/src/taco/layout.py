"""Undeformed table-cartogram layout by constrained descent on cell areas.

The objective is ``E = sum(((a - t) / t) ** 2)`` over cells, with ``a`` the
shoelace area of each quad and ``t = w * h * fraction``. Free coordinates are
interior vertices (x and y) and boundary vertices (the along-edge coordinate);
corners are pinned. Each iteration asks for a capped, balanced change of
every cell area and solves for the smallest vertex motion achieving it to
first order, measured by a metric that penalizes relative edge strain and
relative change of corner turns (so thin cells and nearly flat corners are
stiff). The step then backtracks until the objective drops and every cell is
still a simple, positively oriented quad.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .mesh import Mesh, ShapeMismatch, area_gradients, quad_corners, boundary_ok, cells_valid, signed_areas
from .table import NormalizedTable

# Targets are rounded to this many significand bits so that tables differing
# only by a uniform scale factor (and float rounding) optimize identically.
TARGET_BITS = 32


class DegenerateTarget(ValueError):
    pass


@dataclass(frozen=True)
class LayoutParams:
    w: float = 500.0
    h: float = 500.0
    tolerance: float = 0.01
    max_iterations: int = 20000
    seed: int = 0
    jitter: float = 0.0
    step_size: float = 1.0
    shrink_factor: float = 0.5
    damping: float = 1e-9  # regularizes the step's saddle-point system
    max_backtracks: int = 60
    max_ratio: float = 2.0  # per-iteration cap on a cell's requested area ratio
    stall_window: int = 40  # iterations over which the objective must fall...
    stall_drop: float = 0.01  # ...by this fraction, else the run is stalled
    restarts: int = 2
    rigidity: float = 10.0  # weight on absolute vertex motion, per squared cell span
    area_floor: float = 2.0  # px²; smaller targets get a warm start at the floor
    warm_tightening: float = 1e-3  # warm start runs at tolerance * this
    settle_rigidity: float = 1e4  # rigidity after a warm start, keeps the fix-up local

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError("w and h must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.jitter < 0:
            raise ValueError("jitter must be non-negative")
        if not 0 < self.shrink_factor < 1:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if not self.step_size > 0 or self.max_iterations < 0:
            raise ValueError("step_size must be positive and max_iterations non-negative")
        if not self.max_ratio > 1 or self.stall_window < 1 or self.restarts < 0:
            raise ValueError("max_ratio must exceed 1, stall_window be positive, restarts non-negative")
        if self.area_floor < 0 or self.rigidity < 0 or self.settle_rigidity < 0:
            raise ValueError("area_floor and rigidities must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class LayoutResult:
    mesh: Mesh
    converged: bool
    iterations: int
    max_relative_area_error: float
    objective_trace: list[float] = field(default_factory=list)
    stop_reason: str = ""
    seconds: float = 0.0

    def to_dict(self, include_trace: bool = False) -> dict:
        out = self.mesh.to_dict()
        out.update(
            converged=self.converged,
            iterations=self.iterations,
            maxRelativeAreaError=self.max_relative_area_error,
            stopReason=self.stop_reason,
        )
        if include_trace:
            out["objectiveTrace"] = list(self.objective_trace)
        return out


def _quantize(x: np.ndarray) -> np.ndarray:
    mant, expo = np.frexp(np.asarray(x, dtype=float))
    return np.ldexp(np.round(mant * 2.0**TARGET_BITS) / 2.0**TARGET_BITS, expo)


def quantized_fractions(nt: NormalizedTable) -> np.ndarray:
    return _quantize(nt.fractions)


def warm_targets(nt: NormalizedTable, p: LayoutParams) -> np.ndarray | None:
    """Targets with every sub-floor cell raised to ``area_floor``, or None.

    The remaining area is shared among the other cells in proportion to their
    fractions among themselves, which cancels the table total: two tables that
    differ only inside sub-floor cells get identical warm targets.
    """
    f = np.asarray(nt.fractions, dtype=float)
    low = p.w * p.h * quantized_fractions(nt) < p.area_floor
    if not low.any() or low.all() or low.sum() * p.area_floor >= 0.5 * p.w * p.h:
        return None
    rest = p.w * p.h - low.sum() * p.area_floor
    out = np.full(f.shape, float(p.area_floor))
    out[~low] = _quantize(rest * (f[~low] / math.fsum(f[~low])))
    return out


def targets(nt: NormalizedTable, w: float, h: float) -> np.ndarray:
    t = w * h * quantized_fractions(nt)
    if not (np.isfinite(t).all() and (t >= np.finfo(float).tiny).all()):
        i, j = (int(k) for k in np.argwhere(~(t >= np.finfo(float).tiny))[0])
        raise DegenerateTarget(f"target area for cell ({i}, {j}) underflows: {t[i, j]!r}")
    return t


def _cuts(weights: np.ndarray, length: float) -> np.ndarray:
    c = np.concatenate([[0.0], np.cumsum(weights)])
    c = c / c[-1] * length
    c[-1] = length
    return c


def initial_layout(nt: NormalizedTable, p: LayoutParams) -> Mesh:
    """Marginal-product grid, optionally with seeded jitter on interior vertices.

    Marginals come from the warm-start targets when some cell is below the
    area floor, so such cells do not shift the starting cuts.
    """
    f = warm_targets(nt, p)
    if f is None:
        f = quantized_fractions(nt)
    m, n = f.shape
    ys = _cuts(f.sum(axis=1), p.h)
    xs = _cuts(f.sum(axis=0), p.w)
    v = np.empty((m + 1, n + 1, 2))
    v[..., 0] = xs[None, :]
    v[..., 1] = ys[:, None]
    if p.jitter > 0 and m > 1 and n > 1:
        span = min(np.diff(xs).min(), np.diff(ys).min())
        rng = np.random.default_rng(p.seed)
        v[1:-1, 1:-1] += rng.uniform(-1.0, 1.0, size=(m - 1, n - 1, 2)) * (p.jitter * span)
        if not cells_valid(v).all():
            raise ValueError(f"jitter {p.jitter} folds the initial grid; use a smaller value")
    return Mesh(vertices=v, w=p.w, h=p.h)


def max_relative_area_error(mesh: Mesh, nt: NormalizedTable) -> float:
    if mesh.shape != nt.shape:
        raise ShapeMismatch(f"mesh {mesh.shape} vs table {nt.shape}")
    t = mesh.w * mesh.h * np.asarray(nt.fractions)
    return float(np.max(np.abs(np.abs(mesh.areas()) - t) / t))


# Above this many free coordinates the linear algebra switches to sparse.
DENSE_LIMIT = 1500


class _FreeCoords:
    """Index bookkeeping between flattened vertices and free coordinates.

    The matrices below come out dense for desk-sized grids, where assembling
    sparse structures costs more than solving, and sparse beyond
    :data:`DENSE_LIMIT` free coordinates.
    """

    def __init__(self, m: int, n: int):
        free = np.zeros((m + 1, n + 1, 2), dtype=bool)
        free[1:-1, 1:-1, :] = True
        free[[0, -1], 1:-1, 0] = True
        free[1:-1, [0, -1], 1] = True
        self.mask = free.ravel()
        self.index = np.flatnonzero(self.mask)
        self.size = self.index.size
        self.dense = self.size <= DENSE_LIMIT
        col_of = np.full(self.mask.size, -1)
        col_of[self.index] = np.arange(self.size)
        self.col_of = col_of
        self.cells = m * n
        self.rigid = 0.0

        ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
        di = np.array([0, 0, 1, 1])
        dj = np.array([0, 1, 1, 0])
        self.corner_flat = (ii[..., None] + di) * (n + 1) + (jj[..., None] + dj)  # (m, n, 4)
        flat = (self.corner_flat[..., None] * 2 + np.arange(2)).ravel()  # (m, n, 4, 2)
        rows = np.broadcast_to((ii * n + jj)[..., None, None], (m, n, 4, 2)).ravel()
        cols = col_of[flat]
        self.keep = cols >= 0
        self.rows = rows[self.keep]
        self.cols = cols[self.keep]

        def vid(i, j):
            return (i * (n + 1) + j).ravel()

        gi, gj = np.meshgrid(np.arange(m + 1), np.arange(n + 1), indexing="ij")
        pairs = [
            (vid(gi[:, :-1], gj[:, :-1]), vid(gi[:, 1:], gj[:, 1:])),
            (vid(gi[:-1], gj[:-1]), vid(gi[1:], gj[1:])),
            (vid(ii, jj), vid(ii + 1, jj + 1)),
            (vid(ii, jj + 1), vid(ii + 1, jj)),
        ]
        self.edge_u = np.concatenate([u for u, _ in pairs])
        self.edge_v = np.concatenate([v for _, v in pairs])

        # Corner k of a cell has a turn that depends on corners k-1, k, k+1.
        corner_of = np.stack(
            [np.roll(self.corner_flat, 1, axis=2), self.corner_flat, np.roll(self.corner_flat, -1, axis=2)], axis=3
        )
        tcols = col_of[corner_of[..., None] * 2 + np.arange(2)]  # (m, n, 4, 3, 2)
        trows = np.broadcast_to(np.arange(4 * m * n).reshape(m, n, 4)[..., None, None], tcols.shape)
        self.turn_keep = tcols >= 0
        self.turn_rows = trows[self.turn_keep]
        self.turn_cols = tcols[self.turn_keep]

    def _matrix(self, data, rows, cols, shape):
        if self.dense:
            out = np.zeros(shape)
            np.add.at(out, (rows, cols), data)
            return out
        return sp.csr_matrix((data, (rows, cols)), shape=shape)

    def strain_metric(self, vertices: np.ndarray):
        """Relative-strain metric on free coordinates.

        Sum over grid edges and cell diagonals of ``|d_u - d_v|**2 / length**2``,
        so collapsing any edge costs a full unit of strain regardless of its
        size, plus the relative turn terms from :meth:`turn_jacobian`.
        """
        flat = vertices.reshape(-1, 2)
        u, v = self.edge_u, self.edge_v
        d = flat[u] - flat[v]
        wgt = 1.0 / np.einsum("ij,ij->i", d, d)
        r = np.concatenate([u, v, u, v])
        c = np.concatenate([u, v, v, u])
        data = np.concatenate([wgt, wgt, -wgt, -wgt])
        # expand vertex pairs to both coordinates
        r = self.col_of[(r[:, None] * 2 + np.arange(2)).ravel()]
        c = self.col_of[(c[:, None] * 2 + np.arange(2)).ravel()]
        data = np.repeat(data, 2)
        ok = (r >= 0) & (c >= 0)
        lap = self._matrix(data[ok], r[ok], c[ok], (self.size, self.size))
        turns, anchor = self.turn_jacobian(vertices)
        anchor = anchor + self.rigid
        if self.dense:
            out = lap + turns.T @ turns
            out[np.diag_indices(self.size)] += anchor
            return out
        return (lap + turns.T @ turns + sp.diags(anchor)).tocsc()

    def turn_jacobian(self, vertices: np.ndarray):
        """Gradient of every corner cross product, each row divided by |turn|.

        Also returns per-coordinate anchor weights: the quadratic part of a
        turn change is ~|d|**2, so a corner with small |turn| must pin the
        absolute motion of its vertex too.
        """
        q = quad_corners(vertices)
        e_in = q - np.roll(q, 1, axis=2)
        e_out = np.roll(q, -1, axis=2) - q
        turn = e_in[..., 0] * e_out[..., 1] - e_in[..., 1] * e_out[..., 0]
        g_prev = np.stack([-e_out[..., 1], e_out[..., 0]], axis=-1)
        g_next = np.stack([-e_in[..., 1], e_in[..., 0]], axis=-1)
        g_self = -(g_prev + g_next)
        # Each cell may have one reflex (or flat) corner, so only the three
        # largest turns are protected; the smallest is free to change sign.
        inv = 1.0 / np.maximum(np.abs(turn), 1e-12 * np.abs(turn).max())
        np.put_along_axis(inv, np.argmin(turn, axis=2)[..., None], 0.0, axis=2)
        data = np.stack([g_prev, g_self, g_next], axis=3) * inv[..., None, None]  # (m, n, 4, 3, 2)
        jac = self._matrix(data[self.turn_keep], self.turn_rows, self.turn_cols, (turn.size, self.size))
        anchor = np.zeros(self.mask.size)
        np.add.at(anchor, (self.corner_flat[..., None] * 2 + np.arange(2)).ravel(), np.repeat(inv.ravel(), 2))
        return jac, anchor[self.index]

    def jacobian(self, grads: np.ndarray, row_scale: np.ndarray):
        data = grads.ravel()[self.keep] * row_scale[self.rows]
        return self._matrix(data, self.rows, self.cols, (self.cells, self.size))

    def solve(self, matrix, rhs) -> np.ndarray:
        try:
            if self.dense:
                return np.linalg.solve(matrix, rhs)
            return spsolve(sp.csc_matrix(matrix), rhs)
        except (np.linalg.LinAlgError, RuntimeError):
            return np.full(rhs.shape, np.nan)

    def kkt(self, metric, jac, damping: float):
        if self.dense:
            return np.block([[metric, jac.T], [jac, -damping * np.eye(self.cells)]])
        return sp.bmat([[metric, jac.T], [jac, -damping * sp.identity(self.cells)]], format="csc")


def _objective(areas: np.ndarray, t: np.ndarray) -> float:
    r = ((areas - t) / t).ravel()
    return float(np.dot(r, r))


def _balanced_change(a: np.ndarray, t: np.ndarray, max_ratio: float) -> np.ndarray:
    """Per-cell area change toward target, capped to a factor of ``max_ratio``.

    Cell areas always sum to ``w*h``, so growth and shrinkage are rescaled to
    cancel; every entry keeps the sign of ``t - a`` which makes the step a
    descent direction for the objective.
    """
    change = a * (np.clip(t / a, 1.0 / max_ratio, max_ratio) - 1.0)
    grow = change[change > 0].sum()
    shrink = -change[change < 0].sum()
    if grow > shrink:
        change[change > 0] *= shrink / grow
    elif shrink > grow:
        change[change < 0] *= grow / shrink
    return change


def _descend(v: np.ndarray, t: np.ndarray, p: LayoutParams, max_ratio: float, budget: int):
    """Run the constrained descent from ``v``; returns ``(v, iterations, trace, reason)``."""
    m, n = t.shape
    fc = _FreeCoords(m, n)
    span = np.sqrt(p.w * p.h / (m * n))
    fc.rigid = p.rigidity / span**2
    areas = signed_areas(v)
    energy = _objective(areas, t)
    r = (areas - t) / t
    trace = [energy]

    def line_search(direction):
        step = p.step_size
        for _ in range(p.max_backtracks):
            trial = v.reshape(-1).copy()
            trial[fc.index] += step * direction
            trial = trial.reshape(v.shape)
            if cells_valid(trial).all() and boundary_ok(trial, p.w, p.h):
                trial_areas = signed_areas(trial)
                trial_energy = _objective(trial_areas, t)
                if trial_energy < energy:
                    return trial, trial_areas, trial_energy
            step *= p.shrink_factor
        return None

    reason = "max-iterations"
    it = 0
    while it < budget:
        a = areas.ravel()
        jac = fc.jacobian(area_gradients(v), 1.0 / a)
        metric = fc.strain_metric(v)
        grad = jac.T @ (2.0 * r.ravel() * a / t.ravel())
        wanted = _balanced_change(a, t.ravel(), max_ratio)
        rhs = np.concatenate([np.zeros(fc.size), wanted / a])
        direction = fc.solve(fc.kkt(metric, jac, p.damping), rhs)[: fc.size]
        found = None
        if np.all(np.isfinite(direction)) and grad @ direction < 0:
            found = line_search(direction)
        if found is None:
            # Preconditioned steepest descent, then the raw gradient when the
            # metric is too stiff to solve accurately.
            direction = -fc.solve(metric, grad)
            if np.all(np.isfinite(direction)) and grad @ direction < 0:
                found = line_search(direction)
        if found is None and np.any(grad):
            found = line_search(-grad * (0.1 * span / np.abs(grad).max()))
        if found is None:
            reason = "line-search"
            break
        it += 1
        v, areas, energy = found
        r = (areas - t) / t
        trace.append(energy)
        if np.max(np.abs(r)) <= p.tolerance:
            reason = "tolerance"
            break
        # Little progress over a whole window means the mesh is jammed;
        # crawling on would only burn the iteration budget.
        if it >= p.stall_window and energy > trace[-1 - p.stall_window] * (1.0 - p.stall_drop):
            reason = "stalled"
            break
    return v, it, trace, reason


def _restarting(v0: np.ndarray, t: np.ndarray, p: LayoutParams, budget: int):
    """:func:`_descend` with restarts from ``v0`` under a tighter ratio cap."""
    ratio = p.max_ratio
    total = 0
    for _ in range(p.restarts + 1):
        v, it, trace, reason = _descend(v0, t, p, ratio, budget - total)
        total += it
        if reason in ("tolerance", "max-iterations") or total >= budget:
            break
        ratio = float(np.sqrt(ratio))
    return v, total, trace, reason


def optimize(nt: NormalizedTable, p: LayoutParams | None = None) -> LayoutResult:
    """Fit cell areas to ``w*h*fractions``; deterministic given ``(nt, p)``.

    Targets below ``area_floor`` px² are first fitted as if they were exactly
    at the floor (a warm start), so the path taken by the rest of the mesh
    does not depend on how far below legibility such a cell is. A descent
    that jams is restarted with a tighter cap on the per-step area ratio.
    ``objective_trace`` covers the final descent on the true targets.
    Non-convergence is reported through ``converged=False`` rather than raised.
    """
    p = p or LayoutParams()
    start = time.perf_counter()
    t = targets(nt, p.w, p.h)
    m, n = t.shape
    mesh = initial_layout(nt, p)
    v0 = np.array(mesh.vertices)
    areas = signed_areas(v0)
    if m * n == 1 or np.max(np.abs(areas - t) / t) <= p.tolerance:
        trace = [_objective(areas, t)]
        return LayoutResult(mesh, True, 0, max_relative_area_error(mesh, nt), trace, "tolerance", time.perf_counter() - start)

    warm = 0
    tw = warm_targets(nt, p)
    if tw is not None:
        # Converge the warm start tightly so the final descent only has to
        # move the sub-floor cells.
        wp = replace(p, tolerance=p.tolerance * p.warm_tightening)
        v0, warm, _, _ = _restarting(v0, tw, wp, p.max_iterations)
        fp = replace(p, rigidity=p.settle_rigidity)
    else:
        fp = p
    v, it, trace, reason = _restarting(v0, t, fp, p.max_iterations - warm)

    out = Mesh(vertices=v, w=p.w, h=p.h)
    e = max_relative_area_error(out, nt)
    return LayoutResult(
        mesh=out,
        converged=reason == "tolerance" and e <= p.tolerance,
        iterations=warm + it,
        max_relative_area_error=e,
        objective_trace=trace,
        stop_reason=reason,
        seconds=time.perf_counter() - start,
    )
