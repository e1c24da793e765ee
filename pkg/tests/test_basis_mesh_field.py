import numpy as np
import pytest
from hypothesis import given, strategies as st

from dgadjoint.basis import (COLLOCATION, OVER_INTEGRATION, build_basis, differentiate,
                             quadrature_inner_product)
from dgadjoint.field import (FaceState, broken_inner_product, diff, jump, mean, read_csv,
                             sample, write_csv)
from dgadjoint.mesh import Mesh1D, outward_normals, uniform_mesh

orders = st.integers(min_value=1, max_value=8)


# -- basis ----------------------------------------------------------------------

def test_order_one_is_trapezoid():
    b = build_basis(1)
    np.testing.assert_allclose(b.nodes, [-1, 1])
    np.testing.assert_allclose(b.weights, [1, 1])


def test_order_two_nodes_and_weights():
    b = build_basis(2)
    np.testing.assert_allclose(b.nodes, [-1, 0, 1], atol=1e-15)
    np.testing.assert_allclose(b.weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-14)


def test_order_two_weights_match_integrated_lagrange_basis():
    # integrate each Lagrange polynomial exactly with a 10-point Gauss rule
    b = build_basis(2)
    x, w = np.polynomial.legendre.leggauss(10)
    for i in range(3):
        others = [j for j in range(3) if j != i]
        li = np.prod([(x - b.nodes[j]) / (b.nodes[i] - b.nodes[j]) for j in others], axis=0)
        assert w @ li == pytest.approx(b.weights[i], rel=1e-14)


@given(orders)
def test_nodes_weights_structure(order):
    b = build_basis(order)
    assert b.nodes[0] == -1 and b.nodes[-1] == 1
    assert np.all(np.diff(b.nodes) > 0)
    assert b.weights.sum() == pytest.approx(2.0, abs=1e-13)
    np.testing.assert_allclose(b.diff @ np.ones(order + 1), 0, atol=1e-11)


@given(orders, st.data())
def test_gll_exact_to_degree_2n_minus_1(order, data):
    b = build_basis(order)
    k = data.draw(st.integers(0, 2 * order - 1))
    exact = (1 - (-1) ** (k + 1)) / (k + 1)
    assert b.weights @ b.nodes**k == pytest.approx(exact, abs=1e-12)


@given(orders)
def test_sbp_property(order):
    b = build_basis(order)
    Q = np.diag(b.weights) @ b.diff
    B = np.zeros_like(Q)
    B[0, 0], B[-1, -1] = -1, 1
    np.testing.assert_allclose(Q + Q.T, B, atol=1e-11)


def test_differentiate_examples():
    b = build_basis(2)
    np.testing.assert_allclose(differentiate(b, [4, 4, 4]), 0, atol=1e-14)
    np.testing.assert_allclose(differentiate(b, b.nodes), 1, atol=1e-14)
    np.testing.assert_allclose(differentiate(b, b.nodes**2), 2 * b.nodes, atol=1e-14)


def test_differentiate_rejects_wrong_length():
    with pytest.raises(ValueError):
        differentiate(build_basis(2), [1, 2])


def test_quadrature_inner_product_examples():
    for b in (build_basis(3), build_basis(3, OVER_INTEGRATION)):
        assert quadrature_inner_product(b, np.ones(4), np.ones(4)) == pytest.approx(2)
    b1 = build_basis(1)
    assert quadrature_inner_product(b1, b1.nodes, b1.nodes) == pytest.approx(2)
    b1o = build_basis(1, OVER_INTEGRATION, 3)
    assert quadrature_inner_product(b1o, b1o.nodes, b1o.nodes) == pytest.approx(2 / 3)


def test_basis_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_basis(0)
    with pytest.raises(ValueError):
        build_basis(2, "gauss")
    with pytest.raises(ValueError):
        build_basis(2, COLLOCATION, 5)
    with pytest.raises(ValueError):
        build_basis(3, OVER_INTEGRATION, 2)


# -- mesh -------------------------------------------------------------------------

def test_uniform_mesh_examples():
    m = uniform_mesh(0, 1, 2, "dirichlet")
    np.testing.assert_allclose(m.element_breaks, [0, 0.5, 1])
    assert len(m.faces) == 3
    m = uniform_mesh(-1, 1, 4)
    np.testing.assert_allclose(m.widths, 0.5)
    np.testing.assert_allclose(m.face_coordinates[1:-1], [-0.5, 0, 0.5])


def test_single_periodic_element():
    m = uniform_mesh(0, 1, 1, "periodic")
    assert m.periodic and m.K == 1


def test_mesh_validation():
    with pytest.raises(ValueError):
        uniform_mesh(0, 1, 0)
    with pytest.raises(ValueError):
        uniform_mesh(1, 0, 2)
    with pytest.raises(ValueError):
        Mesh1D([0, 1, 0.5], ("dirichlet", "dirichlet"))
    with pytest.raises(ValueError):
        Mesh1D([0, 1], ("periodic", "dirichlet"))


def test_outward_normals():
    m = uniform_mesh(0, 1, 3)
    assert outward_normals(m, 0) == (-1, 1)
    nl, nr = outward_normals(m, 0)
    assert nl * nr == -1
    assert outward_normals(m, 0)[1] + outward_normals(m, 1)[0] == 0
    with pytest.raises(IndexError):
        outward_normals(m, 3)


@given(st.integers(1, 20))
def test_bisect_halves_widths(K):
    m = uniform_mesh(0, 2, K)
    fine = m.bisect()
    assert fine.K == 2 * K
    np.testing.assert_allclose(fine.widths, np.repeat(m.widths / 2, 2))


# -- field --------------------------------------------------------------------------

def _face(um, up, n):
    return FaceState({"u": np.array(um, float)}, {"u": np.array(up, float)}, np.array(n, float))


def test_jump_mean_diff_examples():
    assert jump(_face(3, 5, 1), "u") == -2
    assert jump(_face(2, 2, 1), "u") == 0
    assert jump(_face(1, 0, -1), "u") == -1
    f = _face(3, 5, 1)
    assert mean(f, "u") == 4 and diff(f, "u") == -2
    f = _face(1, -1, 1)
    assert mean(f, "u") == 0 and diff(f, "u") == 2


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_jump_antisymmetric_mean_symmetric(a, b):
    f, g = _face(a, b, 1), _face(b, a, -1)
    assert jump(f, "u") == pytest.approx(jump(g, "u"))
    assert mean(f, "u") == mean(g, "u")
    assert diff(f, "u") == -diff(g, "u")


def test_sample_examples():
    m, b = uniform_mesh(0, 1, 1), build_basis(1)
    np.testing.assert_allclose(sample(m, b, lambda x: x, ("u",))["u"], [[0, 1]])
    m3 = uniform_mesh(0, 1, 3)
    np.testing.assert_allclose(sample(m3, build_basis(2), lambda x: 1 + 0 * x, ("u",))["u"], 1)


def test_sample_interpolation_converges():
    errs = []
    for K in (4, 8, 16):
        m, b = uniform_mesh(0, 1, K), build_basis(2)
        fine = build_basis(2, OVER_INTEGRATION, 7)
        f = sample(m, b, lambda x: np.sin(np.pi * x), ("u",))
        xq = m.map_points(fine.quad_points)
        errs.append(np.max(np.abs(f["u"] @ fine.interp.T - np.sin(np.pi * xq))))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates > 2.7)


def test_traces_are_endpoint_values():
    m, b = uniform_mesh(0, 1, 3), build_basis(3)
    f = sample(m, b, lambda x: x**2, ("u",))
    tr = f.traces("u")
    np.testing.assert_allclose(tr[:, 0], f["u"][:, 0])
    np.testing.assert_allclose(tr[:, 1], f["u"][:, -1])


def test_broken_inner_product_examples():
    m = uniform_mesh(0, 1, 2)
    for b in (build_basis(1), build_basis(1, OVER_INTEGRATION, 3)):
        one = sample(m, b, lambda x: 1 + 0 * x, ("u",))
        zero = sample(m, b, lambda x: 0 * x, ("u",))
        assert broken_inner_product(one, one) == pytest.approx(1)
        assert broken_inner_product(one, zero) == 0
    b = build_basis(1, OVER_INTEGRATION, 3)
    x = sample(uniform_mesh(0, 1, 1), b, lambda x: x, ("u",))
    assert broken_inner_product(x, x) == pytest.approx(1 / 3)


def test_csv_roundtrip(tmp_path):
    m, b = uniform_mesh(0, 1, 2), build_basis(1)
    f = sample(m, b, lambda x: x, ("u",))
    path = tmp_path / "f.csv"
    write_csv(path, ["hello"], f.csv_header(), f.csv_rows())
    header, rows = read_csv(path)
    assert header == ["element", "node", "x", "u"]
    assert len(rows) == 4 and float(rows[-1][3]) == 1.0
    assert path.read_text().startswith("# hello\n")
