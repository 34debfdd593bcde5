import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from twosolve.errors import GridError
from twosolve.grid import (apply_neg_laplacian, build_grid, inner_h10, integrate, negative_part,
                           norm_h10, norm_l2, positive_part, read_field, weighted_integral,
                           write_field)


def dense_neg_laplacian(grid):
    """Five/seven-point stencil assembled node by node from the tensor index."""
    shape = grid.interior_shape
    n = grid.size
    M = np.zeros((n, n))
    index = np.arange(n).reshape(shape, order="F")
    for multi in np.ndindex(*shape):
        i = index[multi]
        for axis, h in enumerate(grid.spacing):
            M[i, i] += 2 / h**2
            for step in (-1, 1):
                nb = list(multi)
                nb[axis] += step
                if 0 <= nb[axis] < shape[axis]:
                    M[i, index[tuple(nb)]] -= 1 / h**2
    return M


@pytest.mark.parametrize("dims,extents,nodes", [
    (2, (1.0, 1.0), (6, 6)),
    (2, (2.0, 0.5), (5, 7)),
    (3, (1.0, 1.5, 2.0), (4, 5, 6)),
])
def test_laplacian_matches_nodewise_assembly(dims, extents, nodes):
    g = build_grid(dims, extents, nodes)
    assert np.allclose(g.laplacian.toarray(), dense_neg_laplacian(g), rtol=0, atol=1e-9)


def test_discrete_eigenvector_is_exact():
    g = build_grid(2, (1.0, 1.0), (17, 17))
    x, y = g.coordinates
    u = np.sin(np.pi * x) * np.sin(np.pi * y)
    h = g.spacing[0]
    lam_h = 2 * 4 / h**2 * np.sin(np.pi * h / 2) ** 2
    assert np.allclose(apply_neg_laplacian(g, u), lam_h * u, atol=1e-10)


def test_spacing_and_volume():
    g = build_grid(2, (2.0, 1.0), (5, 3))
    assert g.spacing == (0.5, 0.5)
    assert g.interior_shape == (3, 1)
    assert g.size == 3
    assert g.cell_volume == 0.25
    assert g.volume == 2.0


@pytest.mark.parametrize("args", [
    (1, (1.0,), (5,)),
    (4, (1.0,) * 4, (5,) * 4),
    (2, (1.0, 1.0), (2, 5)),
    (2, (1.0, -1.0), (5, 5)),
    (2, (1.0,), (5, 5)),
])
def test_invalid_grids_rejected(args):
    with pytest.raises(GridError):
        build_grid(*args)


def test_two_nodes_means_no_interior():
    with pytest.raises(GridError, match="no interior"):
        build_grid(2, (1.0, 1.0), (2, 2))


def test_field_shape_checked():
    g = build_grid(2, (1.0, 1.0), (5, 5))
    with pytest.raises(GridError):
        inner_h10(g, np.ones(3), np.ones(9))


def test_coordinates_axis0_fastest():
    g = build_grid(2, (1.0, 1.0), (5, 5))
    x, y = g.coordinates
    assert np.allclose(x[:3], [0.25, 0.5, 0.75])
    assert np.allclose(y[:3], 0.25)
    arr = g.to_array(x)
    assert np.allclose(arr[:, 0], [0.25, 0.5, 0.75])


def test_integrals():
    g = build_grid(2, (1.0, 2.0), (11, 21))
    assert integrate(g, 1.0) == pytest.approx(g.size * g.cell_volume)
    v = np.linspace(-1, 1, g.size)
    assert weighted_integral(g, 2.0, v, power=2) == pytest.approx(2 * g.cell_volume * np.sum(v**2))
    assert norm_l2(g, v) == pytest.approx(np.sqrt(g.cell_volume * np.sum(v**2)))
    assert np.all(positive_part(v) - negative_part(v) == v)


def test_h10_norm_converges_to_continuum():
    # ||sin(pi x) sin(pi y)||^2_{H^1_0} = pi^2 / 2
    g = build_grid(2, (1.0, 1.0), (129, 129))
    x, y = g.coordinates
    u = np.sin(np.pi * x) * np.sin(np.pi * y)
    assert norm_h10(g, u) ** 2 == pytest.approx(np.pi**2 / 2, rel=1e-3)


def test_riesz_inverts_laplacian(rng):
    g = build_grid(3, (1.0, 1.0, 1.0), (7, 8, 9))
    r = rng.standard_normal(g.size)
    assert np.allclose(apply_neg_laplacian(g, g.riesz(r)), r, atol=1e-9)


def test_field_file_roundtrip(tmp_path, rng):
    g = build_grid(3, (1.0, 0.5, 2.0), (5, 6, 7))
    v = rng.standard_normal(g.size) * 10.0 ** rng.integers(-300, 300, g.size)
    write_field(tmp_path / "v.txt", g, v)
    g2, v2 = read_field(tmp_path / "v.txt")
    assert g2 == g
    assert np.array_equal(v, v2)


def test_field_file_errors(tmp_path):
    (tmp_path / "bad.txt").write_text("2 5 5\n1.0 1.0\n1.0\n")
    with pytest.raises(GridError, match="expected 9"):
        read_field(tmp_path / "bad.txt")
    (tmp_path / "hdr.txt").write_text("two five\n")
    with pytest.raises(GridError, match="header"):
        read_field(tmp_path / "hdr.txt")


GRID = build_grid(2, (1.0, 1.5), (7, 9))
fields = arrays(np.float64, GRID.size, elements=st.floats(-1e3, 1e3))


@settings(max_examples=50, deadline=None)
@given(fields, fields)
def test_h10_inner_product_symmetric_and_matches_matrix(a, b):
    ab = inner_h10(GRID, a, b)
    assert ab == inner_h10(GRID, b, a)
    ref = GRID.cell_volume * a @ (GRID.laplacian @ b)
    assert abs(ab - ref) <= 1e-9 * (1 + abs(ref) + norm_h10(GRID, a) * norm_h10(GRID, b))


@settings(max_examples=50, deadline=None)
@given(fields, st.floats(-10, 10))
def test_h10_norm_homogeneous(a, t):
    assert norm_h10(GRID, t * a) == pytest.approx(abs(t) * norm_h10(GRID, a), rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(fields)
def test_tensor_view_roundtrip(a):
    assert np.array_equal(GRID.to_field(GRID.to_array(a)), a)
