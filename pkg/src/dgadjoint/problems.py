"""Ready-made problem instances: canonical gradient configurations,
direction presets and smooth exact solutions for convergence studies."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import COLLOCATION, build_basis
from .field import sample
from .mesh import uniform_mesh
from .models import ACOUSTIC, ADVECTION, CONTINUOUS, MAXWELL, ModelSpec, cg_coordinates
from .objective import CostSpec
from .timestep import stable_dt_bound

DIRECTION_PRESETS = ("smooth", "pointwise", "random")
# initial pulse width; narrower pulses are under-resolved at K=4, N=3
PULSE_WIDTH = 0.15


@dataclass(frozen=True)
class Problem:
    spec: ModelSpec
    q0: np.ndarray
    T: float
    n_steps: int
    cost: CostSpec

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    def with_spec(self, spec: ModelSpec) -> "Problem":
        return replace(self, spec=spec)


def cfl_steps(spec: ModelSpec, T: float, safety: float = 0.5) -> int:
    bound = stable_dt_bound(float(np.min(spec.mesh.widths)), spec.max_wave_speed(), spec.basis.order, safety)
    return max(1, math.ceil(T / bound - 1e-9))


def canonical_problem(kind: str, K: int = 8, order: int = 3, quad_mode: str = COLLOCATION,
                      T: float = 1.0, n_steps: int | None = None, c_layout: str = CONTINUOUS,
                      form: str = "strong", cost: CostSpec | None = None, safety: float = 0.5,
                      boundary_kind: str | None = None, domain=(0.0, 1.0), amplitude: float = 0.2,
                      pulse_width: float = PULSE_WIDTH, rho: float = 1.2) -> Problem:
    """Variable-coefficient problem with quadratic cost.

    Coefficients and the initial pulse are laid out on the unit interval
    and mapped onto ``domain``; ``amplitude`` scales the coefficient
    variation (and the maxwell1d permeability step), ``pulse_width`` is in
    unit-interval lengths.
    """
    x0, x1 = domain
    if not x1 > x0:
        raise ValueError("domain must satisfy x_left < x_right")
    unit = lambda x: (x - x0) / (x1 - x0)
    basis = build_basis(order, quad_mode)
    cost = cost or CostSpec()
    pulse = lambda center: (lambda x: np.exp(-(((unit(x) - center) / pulse_width) ** 2)))
    zero = lambda x: 0.0 * x
    if kind == ADVECTION:
        mesh = uniform_mesh(x0, x1, K, boundary_kind or "dirichlet")
        x = unit(cg_coordinates(mesh, basis))
        spec = ModelSpec(ADVECTION, mesh, basis, {"a": 1.0 + amplitude * np.sin(2 * np.pi * x)}, form=form,
                         boundary={"u_l": lambda t: 0.5 * np.sin(np.pi * t)})
        q0 = sample(mesh, basis, pulse(0.3), ("u",)).flat
    elif kind == ACOUSTIC:
        mesh = uniform_mesh(x0, x1, K, boundary_kind or "traction")
        x = unit(cg_coordinates(mesh, basis) if c_layout == CONTINUOUS else mesh.element_centers())
        spec = ModelSpec(ACOUSTIC, mesh, basis, {"c": 1.0 + amplitude * np.sin(2 * np.pi * x), "rho": rho},
                         form=form, c_layout=c_layout)
        q0 = sample(mesh, basis, {"e": pulse(0.4), "v": zero}).flat
    elif kind == MAXWELL:
        mesh = uniform_mesh(x0, x1, K, boundary_kind or "dirichlet")
        xc = unit(mesh.element_centers())
        spec = ModelSpec(MAXWELL, mesh, basis, {"mu": 1.0 + 2.5 * amplitude * (xc > 0.5), "eps": np.ones(K)},
                         form=form)
        q0 = sample(mesh, basis, {"H": zero, "E": pulse(0.4)}).flat
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    n_steps = n_steps or cfl_steps(spec, T, safety)
    if kind == MAXWELL:
        tt = np.linspace(0.0, T, n_steps + 1)
        spec = replace(spec, current_times=tt,
                       params=dict(spec.params, J_s=np.array([np.sin(np.pi * tt / T), 0.5 * tt / T])))
    return Problem(spec, q0, T, n_steps, cost)


def direction(problem: Problem, preset: str = "smooth", seed: int = 0, index: int | None = None) -> np.ndarray:
    """Perturbation direction in the control layout."""
    spec = problem.spec
    shape = np.asarray(spec.params[spec.control]).shape
    size = int(np.prod(shape))
    if preset == "smooth":
        if spec.kind == MAXWELL:
            t = spec.current_times
            d = np.array([np.sin(np.pi * t / problem.T), np.sin(np.pi * t / problem.T)])
        else:
            mesh = spec.mesh
            if spec.kind == ACOUSTIC and spec.c_layout != CONTINUOUS:
                x = mesh.element_centers()
            else:
                x = cg_coordinates(mesh, spec.basis)
            d = np.sin(np.pi * (x - mesh.x_left) / (mesh.x_right - mesh.x_left))
    elif preset == "pointwise":
        d = np.zeros(size)
        d[size // 2 if index is None else index] = 1.0
    elif preset == "random":
        d = np.random.default_rng(seed).uniform(-1.0, 1.0, size)
    else:
        raise ValueError(f"unknown direction preset {preset!r}; expected one of {DIRECTION_PRESETS}")
    return np.asarray(d, dtype=float).reshape(shape)


def perturbed(problem: Problem, d, eps: float) -> Problem:
    spec = problem.spec
    c = spec.control
    return problem.with_spec(spec.with_params(**{c: spec.params[c] + eps * np.asarray(d).reshape(spec.params[c].shape)}))


# -- smooth exact solutions on periodic homogeneous media ----------------------

def _profile(x):
    return np.sin(2 * np.pi * x)


def wave_problem(kind: str, K: int, order: int, quad_mode: str = COLLOCATION, T: float = 1.0,
                 alpha: float = 0.0, safety: float = 0.5):
    """Periodic homogeneous problem with a travelling-wave exact solution.

    Returns (spec, exact_state(t) -> dict of callables, exact_adjoint(t) ->
    dict of callables for a terminal condition at T, n_steps).
    """
    basis = build_basis(order, quad_mode)
    mesh = uniform_mesh(0.0, 1.0, K, "periodic")
    f = _profile
    if kind == ADVECTION:
        a = 1.0
        spec = ModelSpec(ADVECTION, mesh, basis, {"a": np.full(mesh.K * order, a)}, alpha=alpha)
        state = lambda t: {"u": lambda x: f(x - a * t)}
        adjoint = lambda t: {"p": lambda x: f(x + a * (T - t))}
    elif kind == ACOUSTIC:
        c, rho = 1.0, 1.0
        spec = ModelSpec(ACOUSTIC, mesh, basis, {"c": np.full(mesh.K * order, c), "rho": rho})
        state = lambda t: {"e": lambda x: f(x - c * t), "v": lambda x: -c * f(x - c * t)}
        adjoint = lambda t: {"h": lambda x: f(x - c * (T - t)), "w": lambda x: c * f(x - c * (T - t))}
    elif kind == MAXWELL:
        spec = ModelSpec(MAXWELL, mesh, basis, {"mu": np.ones(K), "eps": np.ones(K)})
        state = lambda t: {"H": lambda x: f(x - t), "E": lambda x: f(x - t)}
        adjoint = lambda t: {"G": lambda x: f(x - (T - t)), "F": lambda x: -f(x - (T - t))}
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return spec, state, adjoint, cfl_steps(spec, T, safety)
