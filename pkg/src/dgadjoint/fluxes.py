"""Numerical fluxes of the three model systems and their adjoints.

All functions act on a :class:`FaceState` whose entries broadcast, so they
evaluate one face or every element side of a mesh at once. Component names:
advection ``u`` (adjoint ``p``); acoustic ``e``, ``v`` (adjoint ``h``, ``w``);
Maxwell ``H``, ``E`` (adjoint ``G`` dual to H, ``F`` dual to E).
"""
from __future__ import annotations

import numpy as np

from .field import FaceState, diff, jump, mean


def _positive(name, *values):
    for v in values:
        if np.any(np.asarray(v) <= 0):
            raise ValueError(f"{name} must be positive at every face")


def advection_flux(face: FaceState, alpha: float, component: str = "u"):
    """(a u)^dagger = a {{u}} + a (1 - alpha) [[u]] / 2."""
    a = face.material_minus["a"]
    _positive("advection speed a", a)
    return a * mean(face, component) + 0.5 * a * (1.0 - alpha) * jump(face, component)


def advection_adjoint_flux(face: FaceState, alpha: float, component: str = "p"):
    """(a p)^dagger = a {{p}} + a (alpha - 1) [[p]] / 2 (downwind for alpha = 0)."""
    a = face.material_minus["a"]
    _positive("advection speed a", a)
    return a * mean(face, component) + 0.5 * a * (alpha - 1.0) * jump(face, component)


def advection_adjoint_outflow_ghost(p_minus, a, alpha: float, boundary_cost_derivative=0.0):
    """Exterior adjoint trace at the outflow end x_r.

    Chosen so the adjoint flux there reproduces the boundary-cost derivative
    j'; zero data gives p+ = -alpha/(2-alpha) p-.
    """
    if alpha >= 2.0:
        raise ValueError("alpha = 2 makes the adjoint outflow closure singular")
    _positive("advection speed a", a)
    return (-np.asarray(boundary_cost_derivative) / (a * (1.0 - 0.5 * alpha))
            - alpha / (2.0 - alpha) * np.asarray(p_minus))


def acoustic_flux(face: FaceState):
    """Upwind states (n v^dagger, (lambda e)^dagger) for continuous rho, c."""
    rho, c = face.material_minus["rho"], face.material_minus["c"]
    _positive("rho and c", rho, c)
    lam = rho * c * c
    n = face.n_minus
    nv = n * mean(face, "v") - 0.5 * c * diff(face, "e")
    lam_e = lam * mean(face, "e") - 0.5 * rho * c * jump(face, "v")
    return nv, lam_e


def acoustic_adjoint_flux(face: FaceState):
    """Downwind adjoint states (n w^dagger, (lambda h)^dagger) for continuous rho, c."""
    rho, c = face.material_minus["rho"], face.material_minus["c"]
    _positive("rho and c", rho, c)
    lam = rho * c * c
    n = face.n_minus
    nw = n * mean(face, "w") + 0.5 * c * diff(face, "h")
    lam_h = lam * mean(face, "h") + 0.5 * rho * c * jump(face, "w")
    return nw, lam_h


def interface_coefficient(face: FaceState):
    """k0 = 1 / (rho- c- + rho+ c+)."""
    zm = face.material_minus["rho"] * face.material_minus["c"]
    zp = face.material_plus["rho"] * face.material_plus["c"]
    _positive("acoustic impedance rho c", zm, zp)
    return 1.0 / (zm + zp)


def _acoustic_interface_defect(face: FaceState):
    rm, cm = face.material_minus["rho"], face.material_minus["c"]
    rp, cp = face.material_plus["rho"], face.material_plus["c"]
    lam_m, lam_p = rm * cm * cm, rp * cp * cp
    um, up = face.u_minus, face.u_plus
    return (lam_m * um["e"] - lam_p * up["e"]) + rp * cp * face.n_minus * (um["v"] - up["v"])


def acoustic_flux_discontinuous(face: FaceState):
    """Upwind states (n v^dagger, (lambda e)^dagger) across a material jump.

    Both penalties are proportional to k0 X, where X combines the stress
    mismatch and the impedance-weighted velocity mismatch seen from the
    interior side.
    """
    k0 = interface_coefficient(face)
    rm, cm = face.material_minus["rho"], face.material_minus["c"]
    X = _acoustic_interface_defect(face)
    n = face.n_minus
    um = face.u_minus
    nv = n * um["v"] - k0 * X
    lam_e = rm * cm * cm * um["e"] - k0 * rm * cm * X
    return nv, lam_e


def acoustic_adjoint_flux_discontinuous(face: FaceState):
    """Adjoint normal fluxes (n lambda- w^dagger, n (lambda h)^dagger) across a material jump.

    These are the quantities paired with the interior traces of the
    dilatation and velocity test functions, respectively.
    """
    k0 = interface_coefficient(face)
    rm, cm = face.material_minus["rho"], face.material_minus["c"]
    rp, cp = face.material_plus["rho"], face.material_plus["c"]
    n = face.n_minus
    pm, pp = face.u_minus, face.u_plus
    y_m = rm * cm * cm * pm["h"] + rm * cm * n * pm["w"]
    y_p = rp * cp * cp * pp["h"] - rp * cp * n * pp["w"]
    lam_nw = k0 * rm * cm * cm * (y_m - y_p)
    lam_nh = k0 * n * (rp * cp * y_m + rm * cm * y_p)
    return lam_nw, lam_nh


def maxwell_flux(face: FaceState):
    """Penalties (n(E^dagger - E-), n(H^dagger - H-)) of the 1D TEM upwind flux."""
    Ym, Yp = face.material_minus["Y"], face.material_plus["Y"]
    Zm, Zp = face.material_minus["Z"], face.material_plus["Z"]
    _positive("impedance and conductance", Ym, Yp, Zm, Zp)
    n = face.n_minus
    pen_E = (diff(face, "H") - n * Yp * diff(face, "E")) / (Ym + Yp)
    pen_H = (diff(face, "E") - n * Zp * diff(face, "H")) / (Zm + Zp)
    return pen_E, pen_H


def maxwell_adjoint_flux(face: FaceState):
    """Adjoint states (F^dagger, G^dagger) of the 1D TEM system (downwind)."""
    Ym, Yp = face.material_minus["Y"], face.material_plus["Y"]
    Zm, Zp = face.material_minus["Z"], face.material_plus["Z"]
    _positive("impedance and conductance", Ym, Yp, Zm, Zp)
    n = face.n_minus
    um, up = face.u_minus, face.u_plus
    F = (Ym * um["F"] + Yp * up["F"] - n * diff(face, "G")) / (Ym + Yp)
    G = (Zm * um["G"] + Zp * up["G"] - n * diff(face, "F")) / (Zm + Zp)
    return F, G


def maxwell_boundary_ghost(H_minus, E_minus, surface_current=0.0):
    """Exterior traces H+ = -H- + 2 J_s, E+ = E-."""
    return -np.asarray(H_minus) + 2.0 * np.asarray(surface_current), np.asarray(E_minus)


def maxwell_adjoint_boundary_ghost(F_minus, G_minus):
    """Exterior adjoint traces F+ = F-, G+ = -G-."""
    return np.asarray(F_minus), -np.asarray(G_minus)
