"""Parameter-derivative kernels of the discrete Lagrangian.

Each kernel evaluates, for one time instant, the derivative of
``p . (M q_t - A q - b)`` with respect to the control in a direction
supported on one parameter degree of freedom. Inputs are arrays shaped
(C, K, N+1): state ``q``, its time derivative ``q_t`` and the adjoint ``p``.

Volume terms come back per element-local node (continuous fields) or per
element (element-wise constants); face terms come back per element side
(K, 2), split into the part containing trace jumps and the remainder.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import _pair_with_scaled_test_derivative, _pair_with_test
from .field import FaceState, diff, jump, mean
from .models import CONTINUOUS, Coefficient, ModelSpec


@dataclass
class KernelTerms:
    volume: np.ndarray
    face_jump: np.ndarray
    face_other: np.ndarray

    @property
    def face(self) -> np.ndarray:
        return self.face_jump + self.face_other


def _derivative_r(basis, u):
    """d/dr of nodal values at the quadrature points."""
    return basis.deriv_at_quad(u)


# -- advection ----------------------------------------------------------------

def advection_face_kernel(face: FaceState, alpha: float):
    """Interior-face kernel: -[[u]] {{p}} - (alpha - 1)/2 [[u]] [[p]].

    ``face`` carries the state under ``u`` and the adjoint under ``p``.
    """
    ju = jump(face, "u")
    return -ju * mean(face, "p") - 0.5 * (alpha - 1.0) * ju * jump(face, "p")


def advection_inflow_kernel(u_minus, p_minus, u_inflow, alpha: float):
    """Kernel at the inflow end x_l: (1 - alpha/2) p- (u- - u_l)."""
    return (1.0 - 0.5 * alpha) * p_minus * (u_minus - u_inflow)


def gradient_kernels_advection(spec: ModelSpec, q, p, t: float) -> KernelTerms:
    """G a~ = p (a~ u)_x per element node; face kernels per side.

    Interior-face kernels are split evenly between the two sides of a face.
    """
    basis = spec.basis
    u, pp = q[0], p[0]
    vol = _pair_with_scaled_test_derivative(basis, basis.to_quad(pp), Coefficient.from_nodal(basis, u))
    sface = spec.face_state(q, t)
    aface = spec.face_state(p, adjoint=True)
    both = FaceState({"u": sface.u_minus["u"], "p": aface.u_minus["p"]},
                     {"u": sface.u_plus["u"], "p": aface.u_plus["p"]}, sface.n_minus)
    g = 0.5 * advection_face_kernel(both, spec.alpha)
    if not spec.mesh.periodic:
        g[0, 0] = advection_inflow_kernel(u[0, 0], pp[0, 0], sface.u_plus["u"][0, 0], spec.alpha)
        g[-1, 1] = 0.0
    return KernelTerms(vol, g, np.zeros_like(g))


# -- acoustic -------------------------------------------------------------------

def acoustic_side_kernel(face: FaceState, simplified: bool):
    """Per-side face kernel of the continuous-c gradient.

    ``face`` carries state (e, v) and adjoint (h, w) traces and materials
    rho, c. Summed over both sides of an interior face, the simplified form
    equals rho c^2/2 <<e>><<h>> + rho/2 [[v]][[w]] + 2 rho c [[e]]{{w}}.
    """
    rho, c = face.material_minus["rho"], face.material_minus["c"]
    n = face.n_minus
    de, dv = diff(face, "e"), diff(face, "v")
    h, w = face.u_minus["h"], face.u_minus["w"]
    g = rho * c * de * n * w + 0.5 * rho * dv * w
    if simplified:
        return g + 0.5 * rho * c * c * de * h
    return g + rho * c * n * dv * h + 1.5 * rho * c * c * de * h


def acoustic_interface_kernel(face: FaceState):
    """Simplified kernel on one side of a material interface (element-constant c).

    Returns (jump part, remaining part); the remaining part is the
    -side term 2 rho- c- e- w- n-, which survives for continuous traces.
    """
    rm, cm = face.material_minus["rho"], face.material_minus["c"]
    rp, cp = face.material_plus["rho"], face.material_plus["c"]
    k0 = 1.0 / (rm * cm + rp * cp)
    n = face.n_minus
    um, up = face.u_minus, face.u_plus
    lam_m, lam_p = rm * cm * cm, rp * cp * cp
    A_e = lam_m * um["e"] - lam_p * up["e"]
    A_h = lam_m * um["h"] - lam_p * up["h"]
    jv = n * (um["v"] - up["v"])
    jw = n * (um["w"] - up["w"])
    zp = rp * cp
    em = um["e"]
    jump_part = (-k0**2 * rm * A_e * A_h
                 + k0**2 * rm * zp**2 * jv * jw
                 + k0**2 * rm * zp * (A_e * jw - jv * A_h)
                 + 2.0 * k0 * rm * cm * em * (A_h - zp * jw))
    other = 2.0 * rm * cm * em * um["w"] * n
    return jump_part, other


def acoustic_interface_kernel_full(face: FaceState):
    """Derivative of the interface penalty of both sides w.r.t. the -side wave speed."""
    rm, cm = face.material_minus["rho"], face.material_minus["c"]
    rp, cp = face.material_plus["rho"], face.material_plus["c"]
    zm, zp = rm * cm, rp * cp
    k0 = 1.0 / (zm + zp)
    n = face.n_minus
    um, up = face.u_minus, face.u_plus
    lam_m, lam_p = zm * cm, zp * cp
    X_m = lam_m * um["e"] - lam_p * up["e"] + zp * n * (um["v"] - up["v"])
    X_p = lam_p * up["e"] - lam_m * um["e"] - zm * n * (up["v"] - um["v"])
    Y_m = lam_m * um["h"] + zm * n * um["w"]
    Y_p = lam_p * up["h"] - zp * n * up["w"]
    dk0 = -k0**2 * rm
    dX_m = 2.0 * zm * um["e"]
    dY_m = 2.0 * zm * um["h"] + rm * n * um["w"]
    dX_p = -2.0 * zm * um["e"] - rm * n * (up["v"] - um["v"])
    return dk0 * (X_m * Y_m + X_p * Y_p) + k0 * (dX_m * Y_m + X_m * dY_m + dX_p * Y_p)


def _acoustic_face(spec: ModelSpec, q, p, t):
    sface = spec.face_state(q, t)
    aface = spec.face_state(p, adjoint=True)
    um = dict(sface.u_minus, **aface.u_minus)
    up = dict(sface.u_plus, **aface.u_plus)
    return FaceState(um, up, sface.n_minus, sface.material_minus, sface.material_plus)


def gradient_kernels_acoustic(spec: ModelSpec, q, q_t, p, t: float, collocation_flag: bool) -> KernelTerms:
    """Wave-speed kernels, full form or the collocation-simplified form.

    The simplified form drops 2 rho c c~ (e_t - v_x) h and the matching face
    terms; it equals the full form only when quadrature and interpolation
    nodes coincide.
    """
    basis = spec.basis
    rho = float(spec.params["rho"])
    e, v = q
    e_t = q_t[0]
    h, w = p
    c = spec.wave_speed
    w_q = basis.to_quad(w)
    face = _acoustic_face(spec, q, p, t)
    J = spec.mesh.jacobians[:, None]
    full = not collocation_flag
    if spec.c_layout == CONTINUOUS:
        e_q = basis.to_quad(e)
        prod = Coefficient(2 * rho * c.nodes * e, 2 * rho * c.quad * e_q,
                           2 * rho * (c.quad_deriv * e_q + c.quad * _derivative_r(basis, e)), None)
        vol = -_pair_with_scaled_test_derivative(basis, w_q, prod)
        if full:
            h_q = basis.to_quad(h)
            vol = vol + J * _pair_with_test(basis, 2 * rho * c.quad * basis.to_quad(e_t) * h_q)
            vol = vol - _pair_with_test(basis, 2 * rho * c.quad * _derivative_r(basis, v) * h_q)
        g = acoustic_side_kernel(face, simplified=not full)
        return KernelTerms(vol, g, np.zeros_like(g))
    # element-wise constant wave speed
    ce = spec.params["c"]
    wq = basis.quad_weights
    vol = -2 * rho * ce * np.sum(wq * _derivative_r(basis, e) * w_q, axis=-1)
    if full:
        h_q = basis.to_quad(h)
        vol = vol + 2 * rho * ce * np.sum(wq * (J * basis.to_quad(e_t) - _derivative_r(basis, v)) * h_q, axis=-1)
        g_jump = acoustic_interface_kernel_full(face)
        g_other = np.zeros_like(g_jump)
    else:
        g_jump, g_other = acoustic_interface_kernel(face)
    if not spec.mesh.periodic:
        g_b = acoustic_side_kernel(face, simplified=not full)
        for k, s in ((0, 0), (-1, 1)):
            g_jump[k, s] = g_b[k, s]
            g_other[k, s] = 0.0
    return KernelTerms(vol, g_jump, g_other)


# -- maxwell --------------------------------------------------------------------

def gradient_kernel_maxwell_boundary(F_minus, G_minus, n_minus, Y):
    """Boundary-current kernel g = n F - G / Y at a domain end."""
    return n_minus * F_minus - G_minus / Y


def gradient_kernels_maxwell(spec: ModelSpec, p) -> np.ndarray:
    """Kernel values at the (left, right) ends; interior faces contribute nothing."""
    G, F = p
    Y = np.sqrt(spec.params["eps"] / spec.params["mu"])
    return np.array([gradient_kernel_maxwell_boundary(F[0, 0], G[0, 0], -1.0, Y[0]),
                     gradient_kernel_maxwell_boundary(F[-1, -1], G[-1, -1], 1.0, Y[-1])])
