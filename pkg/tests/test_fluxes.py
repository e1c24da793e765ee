import numpy as np
import pytest
from hypothesis import given, strategies as st

from dgadjoint.field import FaceState
from dgadjoint.fluxes import (acoustic_adjoint_flux, acoustic_adjoint_flux_discontinuous, acoustic_flux,
                              acoustic_flux_discontinuous, advection_adjoint_flux,
                              advection_adjoint_outflow_ghost, advection_flux, interface_coefficient,
                              maxwell_adjoint_boundary_ghost, maxwell_adjoint_flux, maxwell_boundary_ghost,
                              maxwell_flux)

vals = st.floats(-10, 10)
pos = st.floats(0.2, 5)
sign = st.sampled_from([-1.0, 1.0])


def face(um, up, n, mat_m, mat_p=None):
    return FaceState({k: np.float64(v) for k, v in um.items()}, {k: np.float64(v) for k, v in up.items()},
                     np.float64(n), mat_m, mat_p if mat_p is not None else mat_m)


def upwind_oracle(mass, B, n, qm, qp):
    """Characteristic flux n B q^dagger for M q_t + B q_x = 0 from the eigen-decomposition."""
    C = np.linalg.solve(mass, n * B)
    lam, R = np.linalg.eig(C)
    absC = (R @ np.diag(np.abs(lam)) @ np.linalg.inv(R)).real
    return n * B @ (0.5 * (qm + qp)) + 0.5 * mass @ absC @ (qm - qp)


# -- advection --------------------------------------------------------------------

def test_advection_upwind_example():
    f = face({"u": 3}, {"u": 5}, 1, {"a": 2.0})
    assert advection_flux(f, 0.0) == pytest.approx(6.0)


@given(vals, vals, pos, sign)
def test_advection_central_and_consistency(um, up, a, n):
    f = face({"u": um}, {"u": up}, n, {"a": a})
    assert advection_flux(f, 1.0) == pytest.approx(a * 0.5 * (um + up))
    g = face({"u": um}, {"u": um}, n, {"a": a})
    for alpha in (0.0, 0.3, 1.0):
        assert advection_flux(g, alpha) == pytest.approx(a * um)


def test_advection_adjoint_downwind_example():
    f = face({"p": 3}, {"p": 5}, 1, {"a": 2.0})
    assert advection_adjoint_flux(f, 0.0) == pytest.approx(10.0)
    g = face({"p": 3}, {"p": 3}, -1, {"a": 2.0})
    assert advection_adjoint_flux(g, 0.0) == pytest.approx(6.0)


def test_advection_outflow_ghost():
    assert advection_adjoint_outflow_ghost(1.7, 2.0, 0.0) == 0.0
    assert advection_adjoint_outflow_ghost(1.0, 2.0, 0.5) == pytest.approx(-1 / 3)
    with pytest.raises(ValueError):
        advection_adjoint_outflow_ghost(1.0, 2.0, 2.0)


def test_advection_rejects_nonpositive_speed():
    with pytest.raises(ValueError):
        advection_flux(face({"u": 1}, {"u": 1}, 1, {"a": 0.0}), 0.0)


# -- acoustic ---------------------------------------------------------------------

def test_acoustic_flux_examples():
    f = face({"e": 1, "v": 0}, {"e": 0, "v": 0}, 1, {"rho": 1.0, "c": 2.0})
    nv, lam_e = acoustic_flux(f)
    assert nv == pytest.approx(-1.0)
    assert lam_e == pytest.approx(4.0 / 2)
    f = face({"e": 0, "v": 1}, {"e": 0, "v": -1}, 1, {"rho": 1.0, "c": 1.0})
    assert acoustic_flux(f)[1] == pytest.approx(-1.0)


def test_acoustic_adjoint_penalty_has_opposite_sign():
    mat = {"rho": 1.0, "c": 2.0}
    nv, _ = acoustic_flux(face({"e": 1, "v": 0}, {"e": 0, "v": 0}, 1, mat))
    nw, _ = acoustic_adjoint_flux(face({"h": 1, "w": 0}, {"h": 0, "w": 0}, 1, mat))
    assert nw == pytest.approx(-nv)


@given(vals, vals, vals, vals, pos, pos, sign)
def test_acoustic_flux_matches_characteristic_oracle(em, ep, vm, vp, rho, c, n):
    lam = rho * c * c
    f = face({"e": em, "v": vm}, {"e": ep, "v": vp}, n, {"rho": rho, "c": c})
    nv, lam_e = acoustic_flux(f)
    # e_t - v_x = 0, rho v_t - (lam e)_x = 0
    ref = upwind_oracle(np.diag([1.0, rho]), np.array([[0.0, -1.0], [-lam, 0.0]]), n,
                        np.array([em, vm]), np.array([ep, vp]))
    assert -ref[0] == pytest.approx(nv, rel=1e-9, abs=1e-9)
    assert -n * ref[1] == pytest.approx(lam_e, rel=1e-9, abs=1e-9)


@given(vals, vals, vals, vals, pos, pos, sign)
def test_discontinuous_flux_equal_materials_reduces(em, ep, vm, vp, rho, c, n):
    mat = {"rho": rho, "c": c}
    f = face({"e": em, "v": vm}, {"e": ep, "v": vp}, n, mat)
    np.testing.assert_allclose(acoustic_flux_discontinuous(f), acoustic_flux(f), rtol=1e-12, atol=1e-11)


@given(vals, vals, pos, pos, pos, pos, sign)
def test_discontinuous_flux_continuous_traces_consistent(e, v, r1, c1, r2, c2, n):
    # continuous stress lam e and velocity: no penalty from either side
    m, p = {"rho": r1, "c": c1}, {"rho": r2, "c": c2}
    sm, sp = r1 * c1 * c1, r2 * c2 * c2
    f = face({"e": e / sm, "v": v}, {"e": e / sp, "v": v}, n, m, p)
    nv, lam_e = acoustic_flux_discontinuous(f)
    assert nv == pytest.approx(n * v, abs=1e-9)
    assert lam_e == pytest.approx(e, abs=1e-9)


def test_interface_coefficient_example():
    f = face({}, {}, 1, {"rho": 1.0, "c": 1.0}, {"rho": 1.0, "c": 3.0})
    assert interface_coefficient(f) == pytest.approx(0.25)


@given(vals, vals, vals, vals, pos, pos, sign)
def test_discontinuous_adjoint_flux_equal_materials(hm, hp, wm, wp, rho, c, n):
    lam = rho * c * c
    f = face({"h": hm, "w": wm}, {"h": hp, "w": wp}, n, {"rho": rho, "c": c})
    nw, lam_h = acoustic_adjoint_flux(f)
    lam_nw, lam_nh = acoustic_adjoint_flux_discontinuous(f)
    assert lam_nw == pytest.approx(lam * nw, rel=1e-10, abs=1e-9)
    assert lam_nh == pytest.approx(n * lam_h, rel=1e-10, abs=1e-9)


# -- maxwell ----------------------------------------------------------------------

def _em(mu, eps):
    Z = np.sqrt(mu / eps)
    return {"Z": Z, "Y": 1.0 / Z}


@given(vals, vals, vals, vals, pos, pos, sign)
def test_maxwell_flux_matches_characteristic_oracle(Hm, Hp, Em, Ep, mu, eps, n):
    mat = _em(mu, eps)
    f = face({"H": Hm, "E": Em}, {"H": Hp, "E": Ep}, n, mat)
    pen_E, pen_H = maxwell_flux(f)
    # mu H_t + E_x = 0, eps E_t + H_x = 0
    ref = upwind_oracle(np.diag([mu, eps]), np.array([[0.0, 1.0], [1.0, 0.0]]), n,
                        np.array([Hm, Em]), np.array([Hp, Ep]))
    assert ref[0] - n * Em == pytest.approx(pen_E, rel=1e-9, abs=1e-9)
    assert ref[1] - n * Hm == pytest.approx(pen_H, rel=1e-9, abs=1e-9)


@given(vals, vals, pos, pos, pos, pos, sign)
def test_maxwell_continuous_traces_no_penalty(H, E, m1, e1, m2, e2, n):
    f = face({"H": H, "E": E}, {"H": H, "E": E}, n, _em(m1, e1), _em(m2, e2))
    np.testing.assert_allclose(maxwell_flux(f), 0, atol=1e-12)
    g = face({"G": H, "F": E}, {"G": H, "F": E}, n, _em(m1, e1), _em(m2, e2))
    np.testing.assert_allclose(maxwell_adjoint_flux(g), (E, H), rtol=1e-12, atol=1e-12)


def test_maxwell_ghosts():
    Hp, Ep = maxwell_boundary_ghost(0.7, 0.3)
    assert (Hp, Ep) == (-0.7, 0.3)
    Hp, _ = maxwell_boundary_ghost(0.7, 0.3, 1.0)
    assert Hp == pytest.approx(1.3)
    assert maxwell_adjoint_boundary_ghost(1.0, 1.0) == (1.0, -1.0)
