"""Quadrilateral grid meshes inside a fixed rectangle.

Vertex ``(i, j)`` sits at the crossing of horizontal cut ``i`` and vertical
cut ``j``; ``y`` grows with ``i``. Cell ``(i, j)`` is the quad
``v[i][j], v[i][j+1], v[i+1][j+1], v[i+1][j]``, which is counter-clockwise
(positive shoelace area) for an undistorted grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (m+1, n+1, 2), pixels
    w: float
    h: float

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 3 or v.shape[2] != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError(f"vertices must have shape (m+1, n+1, 2), got {v.shape}")
        if not (self.w > 0 and self.h > 0):
            raise ValueError("rectangle width and height must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "h", float(self.h))

    @property
    def shape(self) -> tuple[int, int]:
        """Cell grid shape ``(m, n)``."""
        return self.vertices.shape[0] - 1, self.vertices.shape[1] - 1

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.w, self.h))

    def quad(self, i: int, j: int) -> np.ndarray:
        m, n = self.shape
        if not (0 <= i < m and 0 <= j < n):
            raise IndexError(f"cell ({i}, {j}) outside {m}x{n} grid")
        v = self.vertices
        return np.array([v[i, j], v[i, j + 1], v[i + 1, j + 1], v[i + 1, j]])

    def areas(self) -> np.ndarray:
        return signed_areas(self.vertices)

    def bitwise_equal(self, other: Mesh) -> bool:
        return (
            self.w == other.w
            and self.h == other.h
            and self.vertices.shape == other.vertices.shape
            and self.vertices.tobytes() == other.vertices.tobytes()
        )

    def to_dict(self) -> dict:
        return {"w": self.w, "h": self.h, "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> Mesh:
        return cls(vertices=np.array(data["vertices"], dtype=float), w=data["w"], h=data["h"])


def quad_corners(vertices: np.ndarray) -> np.ndarray:
    """All cell quads as an ``(m, n, 4, 2)`` array in counter-clockwise order."""
    v = vertices
    return np.stack([v[:-1, :-1], v[:-1, 1:], v[1:, 1:], v[1:, :-1]], axis=2)


def shoelace(points) -> float:
    """Signed area of a simple polygon given as a sequence of (x, y)."""
    p = np.asarray(points, dtype=float)
    p = p - p[0]  # translation-free, so far-off polygons keep their precision
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def signed_areas(vertices: np.ndarray) -> np.ndarray:
    q = quad_corners(vertices)
    d1 = q[:, :, 2] - q[:, :, 0]
    d2 = q[:, :, 3] - q[:, :, 1]
    # Diagonal cross product form of the shoelace sum for quads.
    return 0.5 * (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0])


def signed_cell_area(mesh: Mesh, i: int, j: int) -> float:
    return shoelace(mesh.quad(i, j))


def cell_area(mesh: Mesh, i: int, j: int) -> float:
    return abs(signed_cell_area(mesh, i, j))


def area_gradients(vertices: np.ndarray) -> np.ndarray:
    """d(area)/d(corner) for every cell: shape ``(m, n, 4, 2)``.

    For corner k the derivative is ``((y[k+1] - y[k-1]) / 2, (x[k-1] - x[k+1]) / 2)``.
    """
    q = quad_corners(vertices)
    nxt = np.roll(q, -1, axis=2)
    prv = np.roll(q, 1, axis=2)
    g = np.empty_like(q)
    g[..., 0] = 0.5 * (nxt[..., 1] - prv[..., 1])
    g[..., 1] = 0.5 * (prv[..., 0] - nxt[..., 0])
    return g


def corner_turns(vertices: np.ndarray) -> np.ndarray:
    """Cross product of incoming and outgoing edge at each quad corner, ``(m, n, 4)``."""
    q = quad_corners(vertices)
    e_in = q - np.roll(q, 1, axis=2)
    e_out = np.roll(q, -1, axis=2) - q
    return e_in[..., 0] * e_out[..., 1] - e_in[..., 1] * e_out[..., 0]


def cells_valid(vertices: np.ndarray) -> np.ndarray:
    """True where a cell is a simple, positively oriented quad.

    A quadrilateral is either simple (convex: four left turns, concave: three)
    or a bow-tie (two and two), so counting strict left turns decides it.
    """
    turns = corner_turns(vertices)
    return ((turns > 0).sum(axis=2) >= 3) & (signed_areas(vertices) > 0)


def boundary_ok(vertices: np.ndarray, w: float, h: float) -> bool:
    v = vertices
    return bool(
        (v[0, :, 1] == 0).all()
        and (v[-1, :, 1] == h).all()
        and (v[:, 0, 0] == 0).all()
        and (v[:, -1, 0] == w).all()
        and (np.diff(v[0, :, 0]) > 0).all()
        and (np.diff(v[-1, :, 0]) > 0).all()
        and (np.diff(v[:, 0, 1]) > 0).all()
        and (np.diff(v[:, -1, 1]) > 0).all()
    )


@dataclass(frozen=True)
class Violation:
    rule: str  # corner | boundary | boundary-order | self-intersection | orientation | area-sum
    where: tuple[int, int]
    message: str


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


def check_topology(mesh: Mesh) -> list[Violation]:
    """List every broken mesh invariant; empty means the tiling is valid."""
    v = mesh.vertices
    w, h = mesh.w, mesh.h
    m, n = mesh.shape
    out: list[Violation] = []
    corners = {(0, 0): (0.0, 0.0), (0, n): (w, 0.0), (m, n): (w, h), (m, 0): (0.0, h)}
    for (i, j), target in corners.items():
        if tuple(v[i, j]) != target:
            out.append(Violation("corner", (i, j), f"corner at {tuple(v[i, j])}, expected {target}"))
    for j in range(1, n):
        if v[0, j, 1] != 0:
            out.append(Violation("boundary", (0, j), "top-edge vertex off y=0"))
        if v[m, j, 1] != h:
            out.append(Violation("boundary", (m, j), f"bottom-edge vertex off y={h}"))
    for i in range(1, m):
        if v[i, 0, 0] != 0:
            out.append(Violation("boundary", (i, 0), "left-edge vertex off x=0"))
        if v[i, n, 0] != w:
            out.append(Violation("boundary", (i, n), f"right-edge vertex off x={w}"))
    for label, seq, axis, fixed in (
        ("top", v[0, :, 0], 1, 0),
        ("bottom", v[m, :, 0], 1, m),
        ("left", v[:, 0, 1], 0, 0),
        ("right", v[:, n, 1], 0, n),
    ):
        for k in np.flatnonzero(np.diff(seq) <= 0):
            where = (fixed, int(k) + 1) if axis == 1 else (int(k) + 1, fixed)
            out.append(Violation("boundary-order", where, f"{label} edge vertices out of order"))
    areas = signed_areas(v)
    for i in range(m):
        for j in range(n):
            a, b, c, d = mesh.quad(i, j)
            if _segments_cross(a, b, c, d) or _segments_cross(b, c, d, a):
                out.append(Violation("self-intersection", (i, j), "cell edges cross"))
            elif not areas[i, j] > 0:
                out.append(Violation("orientation", (i, j), f"signed area {areas[i, j]!r} is not positive"))
                # an inverted cell folds the grid over its neighbours
                out.append(Violation("self-intersection", (i, j), "inverted cell overlaps its neighbours"))
            elif (corner_turns(v[i : i + 2, j : j + 2]) <= 0).sum() > 1:
                out.append(Violation("self-intersection", (i, j), "degenerate or folded cell"))
    total = float(np.sum(areas))
    if abs(total - w * h) > 1e-9 * w * h:
        out.append(Violation("area-sum", (0, 0), f"cell areas sum to {total!r}, expected {w * h!r}"))
    return out


def concave_count(mesh: Mesh) -> int:
    return int(((corner_turns(mesh.vertices) < 0).any(axis=2)).sum())
