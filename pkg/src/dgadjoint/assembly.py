"""Residual evaluation and dense operator assembly.

The semi-discrete state system is ``M q_t = A q + b(t)``. ``A`` and the
directly assembled adjoint operator ``A_adj`` (built from the adjoint fluxes,
never by transposing ``A``) are dense; desk-scale problems stay below a few
hundred unknowns.
"""
from __future__ import annotations

import numpy as np

from . import fluxes
from .models import ACOUSTIC, ADVECTION, CONTINUOUS, STRONG, WEAK, Coefficient, ModelSpec


# -- quadrature helpers (all in reference coordinates; Jacobians cancel) --

def _deriv_of_product(basis, coef: Coefficient, u):
    """d/dr (coef u) at the quadrature points."""
    if basis.collocated:
        return (coef.nodes * u) @ basis.diff.T
    return coef.quad_deriv * basis.to_quad(u) + coef.quad * basis.deriv_at_quad(u)


def _pair_with_test(basis, g_q):
    """sum_q w_q g_q l_i(r_q) for every nodal basis function l_i."""
    return (basis.quad_weights * g_q) @ basis.interp


def _pair_with_scaled_test_derivative(basis, g_q, scale: Coefficient):
    """sum_q w_q g_q d/dr(scale l_i)(r_q)."""
    wg = basis.quad_weights * g_q
    if basis.collocated:
        return (wg @ basis.diff) * scale.nodes
    return (wg * scale.quad_deriv) @ basis.interp + (wg * scale.quad) @ basis.interp_deriv


def _add_sides(out, side_values):
    out[..., 0] += side_values[..., 0]
    out[..., -1] += side_values[..., 1]


# -- numerical fluxes in the generic normal form ----------------------------

def state_normal_fluxes(spec: ModelSpec, face) -> list:
    """n F_c^dagger per equation, on every element side."""
    n = face.n_minus
    if spec.kind == ADVECTION:
        return [n * fluxes.advection_flux(face, spec.alpha)]
    if spec.kind == ACOUSTIC:
        if spec.c_layout == CONTINUOUS:
            nv, lam_e = fluxes.acoustic_flux(face)
        else:
            nv, lam_e = fluxes.acoustic_flux_discontinuous(face)
        return [-nv, -n * lam_e]
    pen_E, pen_H = fluxes.maxwell_flux(face)
    return [n * face.u_minus["E"] + pen_E, n * face.u_minus["H"] + pen_H]


def adjoint_normal_fluxes(spec: ModelSpec, face) -> list:
    """Adjoint flux per equation c, paired with the test trace of component src(c)."""
    n = face.n_minus
    if spec.kind == ADVECTION:
        return [n * fluxes.advection_adjoint_flux(face, spec.alpha)]
    if spec.kind == ACOUSTIC:
        if spec.c_layout == CONTINUOUS:
            nw, lam_h = fluxes.acoustic_adjoint_flux(face)
            lam = face.material_minus["rho"] * face.material_minus["c"] ** 2
            return [-n * lam_h, -lam * nw]
        lam_nw, lam_nh = fluxes.acoustic_adjoint_flux_discontinuous(face)
        return [-lam_nh, -lam_nw]
    F, G = fluxes.maxwell_adjoint_flux(face)
    return [n * G, n * F]


# -- residuals --------------------------------------------------------------

def state_rhs(spec: ModelSpec, q, t: float = 0.0, homogeneous: bool = False):
    """A q + b(t) in test-function space; ``q`` has shape (..., C, K, N+1)."""
    q = np.asarray(q, dtype=float)
    basis = spec.basis
    face = spec.face_state(q, t, homogeneous)
    phi = state_normal_fluxes(spec, face)
    out = np.zeros_like(q)
    n = face.n_minus
    for c, eq in enumerate(spec.equations):
        src = q[..., eq.src, :, :]
        if spec.form == STRONG:
            dF = _deriv_of_product(basis, eq.coef, src)
            out[..., c, :, :] -= _pair_with_test(basis, dF * eq.scale.quad)
            src_tr = face.u_minus[spec.components[eq.src]]
            _add_sides(out[..., c, :, :], (n * eq.coef.sides * src_tr - phi[c]) * eq.scale.sides)
        else:
            Fq = eq.coef.quad * basis.to_quad(src)
            out[..., c, :, :] += _pair_with_scaled_test_derivative(basis, Fq, eq.scale)
            _add_sides(out[..., c, :, :], -phi[c] * eq.scale.sides)
    if not homogeneous and spec.forcing is not None:
        target = 0 if spec.kind == ADVECTION else 1
        x = spec.mesh.map_points(basis.quad_points)
        fq = np.asarray(spec.forcing(x, t), dtype=float) * np.ones_like(x)
        out[..., target, :, :] += spec.mesh.jacobians[:, None] * _pair_with_test(basis, fq)
    return out


def adjoint_rhs(spec: ModelSpec, p, form: str | None = None):
    """A_adj p assembled from the adjoint fluxes (homogeneous data).

    Weak form: -sum_c (coef_c qt_src)_x scale_c p_c plus adjoint face fluxes.
    Strong form: its element-wise integration by parts.
    """
    form = form or WEAK
    p = np.asarray(p, dtype=float)
    basis = spec.basis
    face = spec.face_state(p, adjoint=True)
    phi = adjoint_normal_fluxes(spec, face)
    out = np.zeros_like(p)
    n = face.n_minus
    for c, eq in enumerate(spec.equations):
        pc = p[..., c, :, :]
        tgt = out[..., eq.src, :, :]
        if form == WEAK:
            sp_q = eq.scale.quad * basis.to_quad(pc) if not basis.collocated else eq.scale.nodes * pc
            tgt -= _pair_with_scaled_test_derivative(basis, sp_q, eq.coef)
            _add_sides(tgt, phi[c])
        else:
            d_sp = _deriv_of_product(basis, eq.scale, pc)
            tgt += _pair_with_test(basis, eq.coef.quad * d_sp)
            p_tr = face.u_minus[spec.adjoint_components[c]]
            _add_sides(tgt, phi[c] - n * eq.coef.sides * eq.scale.sides * p_tr)
    return out


# -- dense operators --------------------------------------------------------

def _apply_to_identity(spec, func):
    n = spec.n_dofs
    basis_vectors = np.eye(n).reshape((n,) + spec.state_shape)
    return func(basis_vectors).reshape(n, n).T


def state_operator(spec: ModelSpec) -> np.ndarray:
    return _apply_to_identity(spec, lambda q: state_rhs(spec, q, homogeneous=True))


def adjoint_operator(spec: ModelSpec, form: str | None = None) -> np.ndarray:
    return _apply_to_identity(spec, lambda p: adjoint_rhs(spec, p, form))


def boundary_source(spec: ModelSpec, t: float) -> np.ndarray:
    """b(t): boundary data and forcing, flattened."""
    return state_rhs(spec, np.zeros(spec.state_shape), t).reshape(-1)


def mass_blocks(spec: ModelSpec) -> np.ndarray:
    """Element mass blocks (C, K, N+1, N+1) including the model's mass weights."""
    basis = spec.basis
    V, w = basis.interp, basis.quad_weights
    J = spec.mesh.jacobians
    out = []
    for eq in spec.equations:
        blk = np.einsum("q,kq,qi,qj->kij", w, eq.mass.quad, V, V) * J[:, None, None]
        out.append(blk)
    return np.array(out)


def block_diag(blocks: np.ndarray) -> np.ndarray:
    C, K, m, _ = blocks.shape
    out = np.zeros((C * K * m, C * K * m))
    for c in range(C):
        for k in range(K):
            s = (c * K + k) * m
            out[s:s + m, s:s + m] = blocks[c, k]
    return out


def mass_matrix(spec: ModelSpec) -> np.ndarray:
    return block_diag(mass_blocks(spec))


def unweighted_mass_blocks(spec: ModelSpec) -> np.ndarray:
    """Element mass blocks (K, N+1, N+1) without material weights."""
    basis = spec.basis
    V, w = basis.interp, basis.quad_weights
    return np.einsum("q,qi,qj->ij", w, V, V)[None] * spec.mesh.jacobians[:, None, None]


class SemiDiscreteSystem:
    """Dense ``q_t = L q + M^-1 b(t)`` and its weighted adjoint ``L_adj = M^-1 A_adj``.

    ``L_adj`` is the adjoint of ``L`` in the model's weighted inner product
    ``<q, p>_W = q^T M p``.
    """

    def __init__(self, spec: ModelSpec, adjoint_form: str | None = None):
        self.spec = spec
        self.M = mass_matrix(spec)
        self.A = state_operator(spec)
        self.M_inv = block_diag(np.linalg.inv(mass_blocks(spec)))
        self.L = self.M_inv @ self.A
        self._adjoint_form = adjoint_form
        self._L_adj = None

    @property
    def L_adj(self) -> np.ndarray:
        if self._L_adj is None:
            self._L_adj = self.M_inv @ adjoint_operator(self.spec, self._adjoint_form)
        return self._L_adj

    def source(self, t: float) -> np.ndarray:
        return self.M_inv @ boundary_source(self.spec, t)

    def rhs(self, q, t: float) -> np.ndarray:
        return self.L @ q + self.source(t)

    def adjoint_apply(self, y) -> np.ndarray:
        return self.L_adj @ y
