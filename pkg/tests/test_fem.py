import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kveit.errors import InvalidArgument
from kveit.experiments import boundary_current, phantom_source
from kveit.fem import (PiecewiseConstantSource, _unit_local_stiffness, assemble_load, assemble_mass,
                       assemble_neumann_rhs, assemble_stiffness)
from kveit.mesh import build_structured_mesh, nodal_interpolant

import oracles


def test_local_stiffness_right_triangle():
    # level 1, first triangle is (-1,-1), (1,-1), (1,1): right angle at the
    # second vertex; 2-D stiffness does not depend on the triangle size
    k = _unit_local_stiffness(build_structured_mesh(1))[0].reshape(3, 3)
    expected = np.array([[0.5, -0.5, 0.0], [-0.5, 1.0, -0.5], [0.0, -0.5, 0.5]])
    assert np.allclose(k, expected, atol=1e-15)


@pytest.mark.parametrize("level", [1, 2, 4])
def test_stiffness_matches_dense_oracle(level):
    m = build_structured_mesh(level)
    q = np.random.default_rng(level).uniform(0.1, 5, m.n_nodes)
    A = assemble_stiffness(m, q).toarray()
    assert np.allclose(A, oracles.dense_stiffness(m, q), atol=1e-13)
    assert np.allclose(A, A.T, atol=1e-15)


def test_stiffness_kernel_and_scaling():
    m = build_structured_mesh(2)
    q = np.random.default_rng(0).uniform(0.05, 10, m.n_nodes)
    assert np.abs(assemble_stiffness(m, q) @ np.ones(m.n_nodes)).max() < 1e-12
    A1 = assemble_stiffness(m, np.ones(m.n_nodes))
    assert np.allclose((assemble_stiffness(m, np.full(m.n_nodes, 2.5)) - 2.5 * A1).toarray(), 0)
    with pytest.raises(InvalidArgument):
        assemble_stiffness(m, np.ones(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_stiffness_linear_and_monotone(seed):
    rng = np.random.default_rng(seed)
    m = build_structured_mesh(4)
    q, dq = rng.uniform(0.05, 5, (2, m.n_nodes))
    Aq, Ad = assemble_stiffness(m, q), assemble_stiffness(m, dq)
    Asum = assemble_stiffness(m, q + dq)
    assert abs(Asum - Aq - Ad).max() <= 1e-13 * abs(Asum).max()
    v = rng.normal(size=m.n_nodes)
    assert v @ (Aq @ v) <= v @ (Asum @ v)


@pytest.mark.parametrize("level", [1, 3, 4])
def test_mass_matches_dense_oracle(level):
    m = build_structured_mesh(level)
    M = assemble_mass(m).toarray()
    assert np.allclose(M, oracles.dense_mass(m), atol=1e-14)


@pytest.mark.parametrize("level", [1, 2, 4, 8])
def test_mass_integrals(level):
    m = build_structured_mesh(level)
    M = assemble_mass(m)
    one = np.ones(m.n_nodes)
    assert M.sum() == pytest.approx(4.0, abs=1e-12)
    assert one @ (M @ one) == pytest.approx(4.0, abs=1e-12)
    x1 = m.nodes[:, 0]
    assert x1 @ (M @ x1) == pytest.approx(4 / 3, abs=1e-12)
    assert np.linalg.eigvalsh(M.toarray()).min() > 0


def test_load_constant_and_zero():
    m = build_structured_mesh(4)
    assert assemble_load(m, PiecewiseConstantSource.constant(1.0)).sum() == pytest.approx(4.0)
    assert np.array_equal(assemble_load(m, None), np.zeros(m.n_nodes))
    assert np.array_equal(assemble_load(m, PiecewiseConstantSource.constant(0.0)), np.zeros(m.n_nodes))
    # callables go through the midpoint rule, exact for linears times P1
    b = assemble_load(m, lambda x1, x2: x1)
    assert b.sum() == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(b, oracles.dense_load(m, lambda x1, x2: x1), atol=1e-14)


@pytest.mark.parametrize("level", [4, 8, 12])
def test_phantom_source_has_zero_mean(level):
    m = build_structured_mesh(level)
    f = phantom_source()
    assert f.check_partition(m)
    b = assemble_load(m, f)
    assert b.sum() == pytest.approx(0.0, abs=1e-13)
    assert np.allclose(b, oracles.dense_load(m, f), atol=1e-14)


def test_source_must_partition():
    f = PiecewiseConstantSource([(lambda x1, x2: x1 > 0, 1.0)])
    with pytest.raises(InvalidArgument):
        f.check_partition(build_structured_mesh(2))
    g = PiecewiseConstantSource([(lambda x1, x2: x1 > -2, 1.0), (lambda x1, x2: x1 > 0, 2.0)])
    with pytest.raises(InvalidArgument):
        g(np.array([0.5]), np.array([0.0]))


def test_neumann_rhs():
    m = build_structured_mesh(4)
    assert assemble_neumann_rhs(m, np.ones(16)).sum() == pytest.approx(8.0)
    j = np.zeros(16)
    j[5] = 4.0  # edge of length 1/2
    b = assemble_neumann_rhs(m, j)
    a, c = m.boundary_edges[5]
    assert b[a] == pytest.approx(1.0) and b[c] == pytest.approx(1.0)
    assert np.count_nonzero(b) == 2
    with pytest.raises(InvalidArgument):
        assemble_neumann_rhs(m, np.ones(15))


@pytest.mark.parametrize("level", [2, 4, 8, 16])
def test_reference_current_has_zero_flux(level):
    m = build_structured_mesh(level)
    j = boundary_current(m)
    b = assemble_neumann_rhs(m, j)
    assert b.sum() == pytest.approx(0.0, abs=1e-13)
    assert np.allclose(b, oracles.dense_neumann_rhs(m, j), atol=1e-15)


def test_neumann_rhs_columns():
    m = build_structured_mesh(4)
    J = np.random.default_rng(3).normal(size=(16, 3))
    B = assemble_neumann_rhs(m, J)
    for i in range(3):
        assert np.allclose(B[:, i], assemble_neumann_rhs(m, J[:, i]))


def test_boundary_weights_match_oracle():
    m = build_structured_mesh(5)
    assert np.allclose(m.boundary_weights, oracles.boundary_weights(m))
    assert np.allclose(nodal_interpolant(m, lambda x1, x2: 2.0), 2.0)
