"""Model definitions: components, coefficients, parameter layouts and face states.

Every model is written as a linear system of the form

    m_c (q_c)_t + (F_c)_x = f_c,   F_c = coef_c * q_{src(c)},

tested against ``scale_c * test``. The acoustic dilatation equation, for
example, has mass lambda, scale lambda, flux -v; the velocity equation has
mass rho, scale 1, flux -lambda e.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Mapping

import numpy as np

from . import fluxes
from .basis import NodalBasis
from .field import FaceState, SIDE_NORMALS, element_traces, neighbor_traces
from .mesh import DIRICHLET, TRACTION, Mesh1D

ADVECTION = "advection"
ACOUSTIC = "acoustic"
MAXWELL = "maxwell1d"
MODEL_KINDS = (ADVECTION, ACOUSTIC, MAXWELL)

WEAK = "weak"
STRONG = "strong"
FORMS = (WEAK, STRONG)

CONTINUOUS = "continuous"
ELEMENTWISE = "element"

STATE_COMPONENTS = {ADVECTION: ("u",), ACOUSTIC: ("e", "v"), MAXWELL: ("H", "E")}
ADJOINT_COMPONENTS = {ADVECTION: ("p",), ACOUSTIC: ("h", "w"), MAXWELL: ("G", "F")}
#: parameter whose gradient is computed
CONTROL = {ADVECTION: "a", ACOUSTIC: "c", MAXWELL: "J_s"}


def cg_dofmap(mesh: Mesh1D, order: int) -> np.ndarray:
    """Global index (K, N+1) of a continuous nodal field; neighbours share end nodes."""
    K = mesh.K
    idx = np.arange(K)[:, None] * order + np.arange(order + 1)[None, :]
    if mesh.periodic:
        idx %= K * order
    return idx


def cg_size(mesh: Mesh1D, order: int) -> int:
    return mesh.K * order + (0 if mesh.periodic else 1)


def cg_coordinates(mesh: Mesh1D, basis: NodalBasis) -> np.ndarray:
    x = np.empty(cg_size(mesh, basis.order))
    x[cg_dofmap(mesh, basis.order)] = mesh.map_points(basis.nodes)
    return x


def cg_mass_matrix(mesh: Mesh1D, basis: NodalBasis) -> np.ndarray:
    """Mass matrix of continuous nodal fields under the active quadrature."""
    V = basis.interp
    local = (V.T * basis.quad_weights) @ V
    dm = cg_dofmap(mesh, basis.order)
    n = cg_size(mesh, basis.order)
    out = np.zeros((n, n))
    for e in range(mesh.K):
        out[np.ix_(dm[e], dm[e])] += mesh.jacobians[e] * local
    return out


@dataclass(frozen=True)
class Coefficient:
    """A spatial coefficient sampled where the assembly needs it.

    ``quad_deriv`` is the reference-coordinate derivative d/dr at the
    quadrature points; ``sides`` holds element end values (K, 2).
    """

    nodes: np.ndarray
    quad: np.ndarray
    quad_deriv: np.ndarray
    sides: np.ndarray

    @classmethod
    def constant(cls, value, K, n_nodes, n_quad):
        v = np.broadcast_to(np.asarray(value, dtype=float), (K,))
        return cls(np.repeat(v[:, None], n_nodes, 1), np.repeat(v[:, None], n_quad, 1),
                   np.zeros((K, n_quad)), np.repeat(v[:, None], 2, 1))

    @classmethod
    def from_nodal(cls, basis: NodalBasis, values):
        values = np.asarray(values, dtype=float)
        return cls(values, basis.to_quad(values), basis.deriv_at_quad(values),
                   element_traces(values))

    def scaled(self, factor: float) -> "Coefficient":
        return Coefficient(factor * self.nodes, factor * self.quad,
                           factor * self.quad_deriv, factor * self.sides)


@dataclass(frozen=True)
class Equation:
    name: str
    src: int
    mass: Coefficient
    coef: Coefficient
    scale: Coefficient


@dataclass(frozen=True)
class ModelSpec:
    """A model instance on a given mesh and basis.

    ``params``: advection ``a`` (continuous nodal vector); acoustic ``c``
    (continuous nodal vector or one value per element, see ``c_layout``) and
    ``rho`` (scalar); Maxwell ``mu``, ``eps`` (per element) and ``J_s``
    (2 x len(current_times) nodal values in time, left and right end).
    ``boundary`` holds time functions: advection ``u_l``; acoustic ``e_bc``,
    ``v_bc`` as (left, right) pairs. ``forcing`` is f(x, t) for the
    advection equation or the acoustic velocity equation.
    """

    kind: str
    mesh: Mesh1D
    basis: NodalBasis
    params: Mapping[str, object]
    alpha: float = 0.0
    form: str = STRONG
    c_layout: str = CONTINUOUS
    forcing: Callable | None = None
    boundary: Mapping[str, object] = field(default_factory=dict)
    current_times: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.c_layout not in (CONTINUOUS, ELEMENTWISE):
            raise ValueError(f"unknown c_layout {self.c_layout!r}")
        params = {k: np.asarray(v, dtype=float) for k, v in self.params.items()}
        object.__setattr__(self, "params", params)
        self._validate()

    def _validate(self):
        K, N = self.mesh.K, self.basis.order
        p = self.params
        need = {ADVECTION: ("a",), ACOUSTIC: ("c", "rho"), MAXWELL: ("mu", "eps")}[self.kind]
        for name in need:
            if name not in p:
                raise ValueError(f"missing parameter {name!r}")
            if np.any(p[name] <= 0) or not np.all(np.isfinite(p[name])):
                raise ValueError(f"parameter {name!r} must be positive and finite")
        if self.kind == ADVECTION and p["a"].shape != (cg_size(self.mesh, N),):
            raise ValueError("advection speed must be a continuous nodal vector")
        if self.kind == ACOUSTIC:
            want = (cg_size(self.mesh, N),) if self.c_layout == CONTINUOUS else (K,)
            if p["c"].shape != want:
                raise ValueError(f"wave speed layout {self.c_layout} needs shape {want}")
            if p["rho"].ndim != 0:
                raise ValueError("rho must be a scalar")
        if self.kind == MAXWELL:
            for name in ("mu", "eps"):
                if p[name].shape != (K,):
                    raise ValueError(f"{name} must hold one value per element")
            if "J_s" in p:
                if self.current_times is None or p["J_s"].shape != (2, len(self.current_times)):
                    raise ValueError("J_s must be 2 x len(current_times)")

    # -- convenience --------------------------------------------------
    @property
    def components(self) -> tuple[str, ...]:
        return STATE_COMPONENTS[self.kind]

    @property
    def adjoint_components(self) -> tuple[str, ...]:
        return ADJOINT_COMPONENTS[self.kind]

    @property
    def control(self) -> str:
        return CONTROL[self.kind]

    @property
    def n_dofs(self) -> int:
        return len(self.components) * self.mesh.K * self.basis.n_nodes

    @property
    def state_shape(self) -> tuple[int, int, int]:
        return (len(self.components), self.mesh.K, self.basis.n_nodes)

    def with_params(self, **updates) -> "ModelSpec":
        params = dict(self.params)
        params.update(updates)
        return replace(self, params=params)

    def with_options(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def max_wave_speed(self) -> float:
        p = self.params
        if self.kind == ADVECTION:
            return float(np.max(p["a"]))
        if self.kind == ACOUSTIC:
            return float(np.max(p["c"]))
        return float(np.max(1.0 / np.sqrt(p["mu"] * p["eps"])))

    # -- coefficient fields -------------------------------------------
    def _element_field(self, values) -> Coefficient:
        b = self.basis
        return Coefficient.constant(values, self.mesh.K, b.n_nodes, b.n_quad)

    def _cg_field(self, values) -> Coefficient:
        nodal = np.asarray(values)[cg_dofmap(self.mesh, self.basis.order)]
        return Coefficient.from_nodal(self.basis, nodal)

    @cached_property
    def wave_speed(self) -> Coefficient:
        if self.c_layout == CONTINUOUS:
            return self._cg_field(self.params["c"])
        return self._element_field(self.params["c"])

    @cached_property
    def lame(self) -> Coefficient:
        """lambda = rho c^2 with exact product-rule derivative."""
        rho = float(self.params["rho"])
        c = self.wave_speed
        return Coefficient(rho * c.nodes**2, rho * c.quad**2,
                           2.0 * rho * c.quad * c.quad_deriv, rho * c.sides**2)

    @cached_property
    def equations(self) -> tuple[Equation, ...]:
        K = self.mesh.K
        one = self._element_field(np.ones(K))
        if self.kind == ADVECTION:
            return (Equation("u", 0, one, self._cg_field(self.params["a"]), one),)
        if self.kind == ACOUSTIC:
            lam = self.lame
            rho = self._element_field(np.full(K, float(self.params["rho"])))
            return (Equation("e", 1, lam, one.scaled(-1.0), lam),
                    Equation("v", 0, rho, lam.scaled(-1.0), one))
        return (Equation("H", 1, self._element_field(self.params["mu"]), one, one),
                Equation("E", 0, self._element_field(self.params["eps"]), one, one))

    # -- materials at element sides ------------------------------------
    def side_materials(self) -> tuple[dict, dict]:
        """Interior and exterior material values per element side (K, 2)."""
        if self.kind == ADVECTION:
            a = self._cg_field(self.params["a"]).sides
            inner = {"a": a}
        elif self.kind == ACOUSTIC:
            inner = {"c": self.wave_speed.sides,
                     "rho": np.full((self.mesh.K, 2), float(self.params["rho"]))}
        else:
            mu = np.repeat(self.params["mu"][:, None], 2, 1)
            eps = np.repeat(self.params["eps"][:, None], 2, 1)
            inner = {"Z": np.sqrt(mu / eps), "Y": np.sqrt(eps / mu)}
        outer = {k: neighbor_traces(v, self.mesh.periodic) for k, v in inner.items()}
        return inner, outer

    # -- boundary data -------------------------------------------------
    def surface_current(self, t: float) -> np.ndarray:
        """J_s at (left, right) ends, piecewise linear between its time nodes."""
        if "J_s" not in self.params:
            return np.zeros(2)
        js = self.params["J_s"]
        return np.array([np.interp(t, self.current_times, js[0]),
                         np.interp(t, self.current_times, js[1])])

    def _pair(self, key, t):
        funcs = self.boundary.get(key)
        if funcs is None:
            return np.zeros(2)
        if callable(funcs):
            funcs = (funcs, funcs)
        return np.array([0.0 if f is None else float(f(t)) for f in funcs])

    def state_ghost(self, inner: dict, t: float, homogeneous: bool) -> dict:
        """Exterior traces at the (left, right) boundary sides; values are (..., 2)."""
        if self.kind == ADVECTION:
            u = inner["u"]
            ul = 0.0 if homogeneous or "u_l" not in self.boundary else float(self.boundary["u_l"](t))
            out = u.copy()
            out[..., 0] = ul
            return {"u": out}
        if self.kind == ACOUSTIC:
            ebc = np.zeros(2) if homogeneous else self._pair("e_bc", t)
            vbc = np.zeros(2) if homogeneous else self._pair("v_bc", t)
            e, v = inner["e"].copy(), inner["v"].copy()
            e_out, v_out = e.copy(), v.copy()
            for side, kind in enumerate(self.mesh.boundary_kind):
                if kind == TRACTION:
                    e_out[..., side] = -e[..., side] + 2.0 * ebc[side]
                elif kind == DIRICHLET:
                    e_out[..., side] = ebc[side]
                    v_out[..., side] = vbc[side]
            return {"e": e_out, "v": v_out}
        js = np.zeros(2) if homogeneous else self.surface_current(t)
        H, E = fluxes.maxwell_boundary_ghost(inner["H"], inner["E"], js)
        return {"H": H, "E": E.copy()}

    def adjoint_ghost(self, inner: dict) -> dict:
        if self.kind == ADVECTION:
            p = inner["p"]
            out = np.empty_like(p)
            out[..., 0] = 0.0
            a_right = self.params["a"][-1]
            out[..., 1] = fluxes.advection_adjoint_outflow_ghost(p[..., 1], a_right, self.alpha)
            return {"p": out}
        if self.kind == ACOUSTIC:
            h, w = inner["h"].copy(), inner["w"].copy()
            for side, kind in enumerate(self.mesh.boundary_kind):
                if kind == TRACTION:
                    h[..., side] = -h[..., side]
                elif kind == DIRICHLET:
                    h[..., side] = 0.0
                    w[..., side] = 0.0
            return {"h": h, "w": w}
        F, G = fluxes.maxwell_adjoint_boundary_ghost(inner["F"], inner["G"])
        return {"F": F.copy(), "G": G}

    # -- face states -----------------------------------------------------
    def face_state(self, q: np.ndarray, t: float = 0.0, homogeneous: bool = False,
                   adjoint: bool = False) -> FaceState:
        """Two-sided traces on every element side of ``q`` (..., C, K, N+1)."""
        names = self.adjoint_components if adjoint else self.components
        traces = element_traces(q)
        ext = neighbor_traces(traces, self.mesh.periodic)
        inner = {n: traces[..., i, :, :] for i, n in enumerate(names)}
        outer = {n: ext[..., i, :, :].copy() for i, n in enumerate(names)}
        if not self.mesh.periodic:
            ends = {n: np.stack([v[..., 0, 0], v[..., -1, 1]], axis=-1) for n, v in inner.items()}
            ghost = self.adjoint_ghost(ends) if adjoint else self.state_ghost(ends, t, homogeneous)
            for n in names:
                outer[n][..., 0, 0] = ghost[n][..., 0]
                outer[n][..., -1, 1] = ghost[n][..., 1]
        mat_in, mat_out = self.side_materials()
        return FaceState(inner, outer, SIDE_NORMALS, mat_in, mat_out)
