from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kveit.errors import InvalidArgument
from kveit.mesh import (boundary_mean, boundary_trace, build_structured_mesh, interpolate_nodal,
                        nodal_interpolant)


@pytest.mark.parametrize("level, nodes, tris, h", [
    (1, 4, 2, 2.8284),
    (4, 25, 32, 0.7071),
    (64, 4225, 8192, 4.4194e-2),
])
def test_mesh_counts(level, nodes, tris, h):
    m = build_structured_mesh(level)
    assert m.n_nodes == nodes
    assert m.n_triangles == tris
    assert m.h == pytest.approx(h, rel=1e-4)
    assert len(m.boundary_nodes) == 4 * level


def test_describe():
    assert build_structured_mesh(4).describe() == "25 nodes, 32 triangles, h=0.7071"


@pytest.mark.parametrize("level", [0, -2, 2.5])
def test_bad_level(level):
    with pytest.raises(InvalidArgument):
        build_structured_mesh(level)


@pytest.mark.parametrize("level", [1, 2, 3, 8, 17])
def test_geometry(level):
    m = build_structured_mesh(level)
    assert m.areas.sum() == pytest.approx(4.0, abs=1e-13)
    assert np.all(m.areas > 0)  # counterclockwise
    assert m.edge_lengths.sum() == pytest.approx(8.0, abs=1e-13)
    assert m.boundary_weights.sum() == pytest.approx(8.0, abs=1e-13)
    # barycentric gradients sum to zero and reproduce x1, x2
    assert np.allclose(m.grads.sum(axis=1), 0, atol=1e-12)
    assert np.allclose(m.gradient(m.nodes[:, 0]), [1, 0])
    assert np.allclose(m.gradient(m.nodes[:, 1]), [0, 1])


@pytest.mark.parametrize("level", [1, 2, 5, 8])
def test_conforming(level):
    m = build_structured_mesh(level)
    edges = Counter()
    for t in m.triangles:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            edges[tuple(sorted((a, b)))] += 1
    boundary = {tuple(sorted(e)) for e in m.boundary_edges}
    for e, n in edges.items():
        assert n == (1 if e in boundary else 2)
    assert sum(1 for n in edges.values() if n == 1) == 4 * level


def test_node_and_boundary_order():
    m = build_structured_mesh(2)
    assert np.allclose(m.nodes[:4], [[-1, -1], [0, -1], [1, -1], [-1, 0]])
    x = m.nodes[m.boundary_nodes]
    assert np.allclose(x[0], [-1, -1])
    # counterclockwise: positive signed area of the boundary polygon
    area = 0.5 * np.sum(x[:, 0] * np.roll(x[:, 1], -1) - np.roll(x[:, 0], -1) * x[:, 1])
    assert area == pytest.approx(4.0)
    assert list(m.edge_sides) == [0, 0, 1, 1, 2, 2, 3, 3]
    # diagonal runs bottom-left to top-right in every cell
    assert set(map(tuple, m.triangles[:2])) == {(0, 1, 4), (0, 4, 3)}


def test_trace():
    m = build_structured_mesh(2)
    assert np.array_equal(boundary_trace(m, np.full(m.n_nodes, 3.0)), np.full(8, 3.0))
    x1 = m.nodes[:, 0]
    assert np.array_equal(boundary_trace(m, x1), m.nodes[m.boundary_nodes, 0])
    assert boundary_mean(m, x1) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidArgument):
        boundary_trace(m, np.ones(5))


def _hat_expansion(values, mesh, points):
    """Brute-force evaluation of a P1 field: search every triangle for each point."""
    out = np.empty(len(points))
    P = mesh.nodes[mesh.triangles]
    for k, x in enumerate(points):
        for t, p in enumerate(P):
            T = np.column_stack([p[1] - p[0], p[2] - p[0]])
            lam12 = np.linalg.solve(T, x - p[0])
            lam = np.array([1 - lam12.sum(), *lam12])
            if np.all(lam >= -1e-12):
                out[k] = lam @ values[mesh.triangles[t]]
                break
    return out


def test_interpolation_constants_and_linears():
    c, f = build_structured_mesh(4), build_structured_mesh(8)
    assert np.array_equal(interpolate_nodal(np.full(25, 1.5), c, f), np.full(81, 1.5))
    lin = nodal_interpolant(c, lambda x1, x2: x1)
    assert np.allclose(interpolate_nodal(lin, c, f), f.nodes[:, 0], atol=1e-15)


def test_interpolation_matches_hat_expansion():
    rng = np.random.default_rng(1)
    c, f = build_structured_mesh(4), build_structured_mesh(8)
    v = rng.normal(size=c.n_nodes)
    fine = interpolate_nodal(v, c, f)
    assert np.allclose(fine, _hat_expansion(v, c, f.nodes), atol=1e-12)
    # coarse nodes are copied, midpoints are endpoint means
    I = np.arange(9)
    J = I[:, None]
    coarse_at = fine.reshape(9, 9)[0::2, 0::2]
    assert np.array_equal(coarse_at.ravel(), v)
    mid = fine.reshape(9, 9)[0, 1::2]
    assert np.allclose(mid, 0.5 * (v[:4] + v[1:5]))
    del I, J


def test_interpolation_three_levels():
    rng = np.random.default_rng(2)
    c, f = build_structured_mesh(2), build_structured_mesh(6)
    v = rng.normal(size=c.n_nodes)
    assert np.allclose(interpolate_nodal(v, c, f), _hat_expansion(v, c, f.nodes), atol=1e-12)
    with pytest.raises(InvalidArgument):
        interpolate_nodal(v, c, build_structured_mesh(5))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_interpolation_is_linear(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    c, f = build_structured_mesh(4), build_structured_mesh(8)
    a, b = rng.normal(size=(2, c.n_nodes))
    lhs = interpolate_nodal(alpha * a + beta * b, c, f)
    rhs = alpha * interpolate_nodal(a, c, f) + beta * interpolate_nodal(b, c, f)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_mesh_arrays_are_read_only():
    m = build_structured_mesh(2)
    with pytest.raises(ValueError):
        m.nodes[0, 0] = 5.0
