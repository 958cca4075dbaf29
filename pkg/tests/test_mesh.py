import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import central_difference, fan_area
from taco.mesh import (
    Mesh,
    area_gradients,
    cell_area,
    cells_valid,
    check_topology,
    concave_count,
    shoelace,
    signed_areas,
)


def grid_mesh(xs, ys):
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    v = np.empty((len(ys), len(xs), 2))
    v[..., 0] = xs[None, :]
    v[..., 1] = ys[:, None]
    return Mesh(vertices=v, w=xs[-1], h=ys[-1])


def random_interior_mesh(rng, m, n, w=10.0, h=8.0, wiggle=0.3):
    """Uniform grid with interior vertices (and along-edge boundary coordinates) perturbed."""
    mesh = grid_mesh(np.linspace(0, w, n + 1), np.linspace(0, h, m + 1))
    v = np.array(mesh.vertices)
    dx, dy = w / n, h / m
    v[1:-1, 1:-1, 0] += rng.uniform(-wiggle, wiggle, (m - 1, n - 1)) * dx
    v[1:-1, 1:-1, 1] += rng.uniform(-wiggle, wiggle, (m - 1, n - 1)) * dy
    return Mesh(vertices=v, w=w, h=h)


@pytest.mark.parametrize(
    "quad, area",
    [
        ([(0, 0), (1, 0), (1, 1), (0, 1)], 1.0),
        ([(0, 0), (4, 0), (4, 2), (0, 2)], 8.0),
        ([(0, 0), (4, 0), (1, 1), (0, 4)], 4.0),
    ],
)
def test_area_examples(quad, area):
    # [DERIVED] the concave value comes from the fan oracle; the check is two-sided
    assert fan_area(quad) == area
    assert shoelace(quad) == area


def test_cell_area_indexing():
    mesh = grid_mesh([0, 1, 3], [0, 2])
    assert cell_area(mesh, 0, 1) == 4.0
    with pytest.raises(IndexError):
        cell_area(mesh, 1, 0)


def _random_simple_quad(rng):
    # one vertex per quadrant around a center: star-shaped, hence simple, and CCW
    angles = np.arange(4) * (np.pi / 2) + rng.uniform(0.05, 1.5, 4)
    radii = rng.uniform(0.1, 10.0, 4)
    center = rng.uniform(-50, 50, 2)
    return center + np.c_[radii * np.cos(angles), radii * np.sin(angles)]


def test_shoelace_matches_fan_oracle_on_random_quads():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        q = _random_simple_quad(rng)
        ref = fan_area(q)
        assert abs(shoelace(q) - ref) <= 1e-12 * abs(ref)


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_vectorized_areas_match_per_cell_oracle(m, n, seed):
    mesh = random_interior_mesh(np.random.default_rng(seed), m, n)
    areas = signed_areas(mesh.vertices)
    for i in range(m):
        for j in range(n):
            ref = fan_area(mesh.quad(i, j))
            assert areas[i, j] == pytest.approx(ref, rel=1e-12)


def test_area_gradient_matches_central_differences():
    rng = np.random.default_rng(3)
    for k in range(100):
        m, n = rng.integers(1, 5, size=2)
        mesh = random_interior_mesh(rng, m, n)
        g = area_gradients(mesh.vertices)
        for i in range(m):
            for j in range(n):
                quad = mesh.quad(i, j)
                fd = central_difference(fan_area, quad, step=1e-6)
                np.testing.assert_allclose(g[i, j], fd, rtol=1e-5, atol=1e-5 * np.abs(fd).max())


def test_areas_tile_the_rectangle():
    mesh = random_interior_mesh(np.random.default_rng(4), 4, 6)
    assert signed_areas(mesh.vertices).sum() == pytest.approx(mesh.w * mesh.h, rel=1e-12)
    assert check_topology(mesh) == []


def test_swapped_diagonal_vertices_flag_self_intersection():
    mesh = grid_mesh([0, 1, 2, 3], [0, 1, 2, 3])
    v = np.array(mesh.vertices)
    v[1, 1], v[2, 2] = v[2, 2].copy(), v[1, 1].copy()
    bad = check_topology(Mesh(vertices=v, w=3, h=3))
    assert any(x.rule == "self-intersection" and x.where == (1, 1) for x in bad)


def test_nudged_boundary_vertex_is_reported():
    mesh = grid_mesh([0, 1, 2], [0, 1, 2])
    v = np.array(mesh.vertices)
    v[0, 1, 1] = 0.01
    bad = check_topology(Mesh(vertices=v, w=2, h=2))
    assert [x.rule for x in bad if x.where == (0, 1)] == ["boundary"]


def test_moved_corner_is_reported():
    v = np.array(grid_mesh([0, 1], [0, 1]).vertices)
    v[0, 0] = (0.1, 0.0)
    rules = {x.rule for x in check_topology(Mesh(vertices=v, w=1, h=1))}
    assert "corner" in rules


def test_concave_cell_is_valid_but_counted():
    mesh = grid_mesh([0, 2, 4], [0, 2, 4])
    v = np.array(mesh.vertices)
    v[1, 1] = (3.5, 3.5)  # pushes into cell (1, 1), making it concave
    mesh = Mesh(vertices=v, w=4, h=4)
    assert cells_valid(mesh.vertices).all()
    assert check_topology(mesh) == []
    assert concave_count(mesh) == 1


def test_mesh_json_round_trip():
    mesh = random_interior_mesh(np.random.default_rng(5), 2, 3)
    back = Mesh.from_dict(mesh.to_dict())
    assert back.bitwise_equal(mesh)
