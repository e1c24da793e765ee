"""Discrete cost functionals and exact gradient assembly.

The cost is defined on the fully discrete trajectory: spatial integrals use
the active element quadrature, time integrals the composite trapezoid rule
over step boundaries. Gradients accumulate the model kernels at RK-stage
level with the stage multipliers of the transposed step, so they are exact
derivatives of that discrete cost.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .assembly import SemiDiscreteSystem, unweighted_mass_blocks
from .field import write_csv
from .models import ACOUSTIC, ADVECTION, CONTINUOUS, MAXWELL, ModelSpec, cg_coordinates, cg_dofmap, cg_mass_matrix
from .timestep import STAGE_OFFSETS, STORE_ALL, AdjointTrajectory, Trajectory, run_adjoint, run_forward

DEFAULT_COST_COMPONENTS = {ADVECTION: ("u",), ACOUSTIC: ("v",), MAXWELL: ("E",)}


@dataclass(frozen=True)
class CostSpec:
    """J = sum_n tau_n [w j_vol(q_n) + w_b j_bnd(q_n)] + w_T j_vol(q_N) + beta |param|^2.

    ``j_vol`` integrates the squared selected components, minus the stored
    observation when ``observations`` (one row per step boundary) is given.
    ``j_bnd`` is the squared outflow trace at x_r (advection only).
    """

    components: tuple[str, ...] | None = None
    weight: float = 1.0
    observations: np.ndarray | None = field(default=None, repr=False)
    terminal_weight: float = 0.0
    boundary_weight: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("regularization coefficient beta must be >= 0")

    def resolved_components(self, spec: ModelSpec) -> tuple[str, ...]:
        comps = self.components or DEFAULT_COST_COMPONENTS[spec.kind]
        for c in comps:
            if c not in spec.components:
                raise ValueError(f"cost component {c!r} not in {spec.components}")
        return tuple(comps)

    def tag(self) -> str:
        h = hashlib.sha1(repr((self.components, self.weight, self.terminal_weight,
                               self.boundary_weight, self.beta)).encode())
        if self.observations is not None:
            h.update(np.ascontiguousarray(self.observations).tobytes())
        return h.hexdigest()[:16]

    def validate(self, spec: ModelSpec, n_steps: int):
        self.resolved_components(spec)
        if self.boundary_weight and (spec.kind != ADVECTION or spec.mesh.periodic):
            raise ValueError("boundary cost is only available at the advection outflow end x_r")
        if self.observations is not None:
            if self.observations.shape != (n_steps + 1, spec.n_dofs):
                raise ValueError(f"observations must have shape {(n_steps + 1, spec.n_dofs)}, "
                                 f"got {self.observations.shape}")


def trapezoid_weights(dt: float, n_steps: int) -> np.ndarray:
    tau = np.full(n_steps + 1, dt)
    tau[0] = tau[-1] = 0.5 * dt
    return tau


class DiscreteCost:
    """Evaluator of a :class:`CostSpec` on a given model discretization."""

    def __init__(self, spec: ModelSpec, cost: CostSpec, n_steps: int, dt: float):
        cost.validate(spec, n_steps)
        self.spec, self.cost = spec, cost
        self.tau = trapezoid_weights(dt, n_steps)
        self.n_steps = n_steps
        self.M0 = unweighted_mass_blocks(spec)
        self.selected = [spec.components.index(c) for c in cost.resolved_components(spec)]

    def _residual(self, n, q):
        q = q.reshape(self.spec.state_shape)
        if self.cost.observations is not None:
            q = q - self.cost.observations[n].reshape(self.spec.state_shape)
        return q

    def _vol(self, n, q):
        r = self._residual(n, q)
        return sum(float(np.einsum("ki,kij,kj->", r[c], self.M0, r[c])) for c in self.selected)

    def _vol_grad(self, n, q):
        r = self._residual(n, q)
        g = np.zeros(self.spec.state_shape)
        for c in self.selected:
            g[c] = 2.0 * np.einsum("kij,kj->ki", self.M0, r[c])
        return g.reshape(-1)

    def step_weight(self, n):
        return self.tau[n] * self.cost.weight + (self.cost.terminal_weight if n == self.n_steps else 0.0)

    def value_at(self, n, q) -> float:
        val = self.step_weight(n) * self._vol(n, q)
        if self.cost.boundary_weight:
            val += self.tau[n] * self.cost.boundary_weight * q.reshape(self.spec.state_shape)[0, -1, -1] ** 2
        return val

    def gradient_at(self, n, q) -> np.ndarray:
        """Euclidean derivative of the step-n cost contribution w.r.t. q_n."""
        g = self.step_weight(n) * self._vol_grad(n, q)
        if self.cost.boundary_weight:
            g = g.reshape(self.spec.state_shape)
            g[0, -1, -1] += 2.0 * self.tau[n] * self.cost.boundary_weight * q.reshape(self.spec.state_shape)[0, -1, -1]
            g = g.reshape(-1)
        return g

    def regularization(self) -> float:
        beta = self.cost.beta
        if beta == 0:
            return 0.0
        x = control_values(self.spec)
        return float(beta * x @ (regularization_weights(self.spec) @ x))


def control_values(spec: ModelSpec) -> np.ndarray:
    return np.asarray(spec.params.get(spec.control, np.zeros(0)), dtype=float).reshape(-1)


def regularization_weights(spec: ModelSpec) -> np.ndarray:
    """Matrix R with |param|^2 = param^T R param for the control layout."""
    if spec.kind == ADVECTION or (spec.kind == ACOUSTIC and spec.c_layout == CONTINUOUS):
        return cg_mass_matrix(spec.mesh, spec.basis)
    if spec.kind == ACOUSTIC:
        return np.diag(spec.mesh.widths)
    tau = trapezoid_weights(np.diff(spec.current_times)[0], len(spec.current_times) - 1)
    return np.diag(np.concatenate([tau, tau]))


def evaluate_cost(spec: ModelSpec, trajectory: Trajectory, cost: CostSpec) -> float:
    dc = DiscreteCost(spec, cost, trajectory.n_steps, trajectory.dt)
    total = 0.0
    for n in range(trajectory.n_steps + 1):
        total += dc.value_at(n, trajectory.snapshot(n))
    return total + dc.regularization()


@dataclass
class GradientReport:
    """Coefficient-space gradient: total = volume + face + regularization."""

    parameter: str
    volume: np.ndarray
    face: np.ndarray
    regularization: np.ndarray
    comparator: np.ndarray
    locations: list
    tag: str = ""

    @property
    def total(self) -> np.ndarray:
        return self.volume + self.face + self.regularization

    @property
    def comparator_total(self) -> np.ndarray:
        return self.comparator + self.regularization

    def csv_columns(self):
        return ["dof", "location", "volume", "face", "regularization", "total", "comparator_total"]

    def csv_rows(self):
        tot, comp = self.total, self.comparator_total
        for i in range(tot.size):
            yield [i, self.locations[i], repr(float(self.volume[i])), repr(float(self.face[i])),
                   repr(float(self.regularization[i])), repr(float(tot[i])), repr(float(comp[i]))]

    def to_csv(self, path, header_lines=()):
        write_csv(path, header_lines, self.csv_columns(), self.csv_rows())


def directional_derivative(report: GradientReport, direction, comparator: bool = False) -> float:
    d = np.asarray(direction, dtype=float).reshape(-1)
    g = report.comparator_total if comparator else report.total
    if d.shape != g.shape:
        raise ValueError(f"direction has {d.size} entries, gradient has {g.size}")
    return float(g @ d)


def control_locations(spec: ModelSpec) -> list:
    if spec.kind == ADVECTION or (spec.kind == ACOUSTIC and spec.c_layout == CONTINUOUS):
        return [f"x={x:.12g}" for x in cg_coordinates(spec.mesh, spec.basis)]
    if spec.kind == ACOUSTIC:
        return [f"element={e}" for e in range(spec.mesh.K)]
    return [f"{side}:t={t:.12g}" for side in ("left", "right") for t in spec.current_times]


class _Accumulator:
    def __init__(self, spec: ModelSpec):
        self.spec = spec
        size = control_values(spec).size
        self.volume, self.face, self.comparator = (np.zeros(size) for _ in range(3))
        if spec.kind != MAXWELL and not (spec.kind == ACOUSTIC and spec.c_layout != CONTINUOUS):
            dm = cg_dofmap(spec.mesh, spec.basis.order)
            self.node_dofs = dm
            self.side_dofs = np.stack([dm[:, 0], dm[:, -1]], axis=-1)

    def add_nodal(self, target, values):
        np.add.at(target, self.node_dofs.reshape(-1), values.reshape(-1))

    def add_sides(self, target, values):
        np.add.at(target, self.side_dofs.reshape(-1), values.reshape(-1))


def assemble_gradient(spec: ModelSpec, system: SemiDiscreteSystem, trajectory: Trajectory,
                      adjoint: AdjointTrajectory, cost: CostSpec,
                      collocation_flag: bool | None = None) -> GradientReport:
    """Exact gradient of the discrete cost plus the continuous-style comparator."""
    if spec.alpha != 0.0:
        raise ValueError("the adjoint/gradient pipeline requires the upwind flux (alpha = 0)")
    if adjoint.tag and adjoint.tag != cost.tag():
        raise ValueError("adjoint trajectory was computed for a different cost specification")
    if adjoint.n_steps != trajectory.n_steps:
        raise ValueError("state and adjoint trajectories do not match")
    if collocation_flag is None:
        collocation_flag = spec.basis.collocated
    if collocation_flag and not spec.basis.collocated:
        raise ValueError("simplified acoustic kernels require GLL collocation")
    if spec.kind == MAXWELL:
        _check_current_grid(spec, trajectory)
    acc = _Accumulator(spec)
    shape = spec.state_shape
    dt = trajectory.dt
    for n in range(trajectory.n_steps):
        stages = trajectory.stages(n)
        t_n = trajectory.time(n)
        for i in range(4):
            t_i = t_n + STAGE_OFFSETS[i] * dt
            Y = stages[i]
            p = -adjoint.multipliers[n][i].reshape(shape)
            if spec.kind == MAXWELL:
                g = kernels.gradient_kernels_maxwell(spec, p)
                _deposit_current(acc, spec, n, i, g)
                continue
            q = Y.reshape(shape)
            if spec.kind == ADVECTION:
                kt = kernels.gradient_kernels_advection(spec, q, p, t_i)
                comp = kernels.KernelTerms(kt.volume, 0 * kt.face_jump, kt.face_other)
            else:
                q_t = system.rhs(Y, t_i).reshape(shape)
                kt = kernels.gradient_kernels_acoustic(spec, q, q_t, p, t_i, collocation_flag)
                if collocation_flag:
                    comp = kt
                elif spec.basis.collocated:
                    comp = kernels.gradient_kernels_acoustic(spec, q, q_t, p, t_i, True)
                else:
                    comp = _simplified_terms(spec, q, q_t, p, t_i, kt)
            _deposit(acc, spec, kt, comp)
    reg = np.zeros_like(acc.volume)
    if cost.beta:
        reg = 2.0 * cost.beta * (regularization_weights(spec) @ control_values(spec))
    return GradientReport(spec.control, acc.volume, acc.face, reg, acc.comparator,
                          control_locations(spec), cost.tag())


def _simplified_terms(spec, q, q_t, p, t, full):
    """Continuous-style acoustic terms under over-integration.

    The volume part is the full kernel without its residual term
    2 rho c c~ (e_t - v_x) h; jump-carrying face terms are dropped.
    """
    b = spec.basis
    rho = float(spec.params["rho"])
    J = spec.mesh.jacobians[:, None]
    resid = 2 * rho * spec.wave_speed.quad * (J * b.to_quad(q_t[0]) - b.deriv_at_quad(q[1])) * b.to_quad(p[0])
    zero = np.zeros_like(full.face_jump)
    if spec.c_layout == CONTINUOUS:
        return kernels.KernelTerms(full.volume - kernels._pair_with_test(b, resid), zero, zero)
    _, other = kernels.acoustic_interface_kernel(kernels._acoustic_face(spec, q, p, t))
    if not spec.mesh.periodic:
        other[0, 0] = other[-1, 1] = 0.0
    return kernels.KernelTerms(full.volume - np.sum(b.quad_weights * resid, axis=-1), zero, other)


def _deposit(acc: _Accumulator, spec: ModelSpec, kt, comp):
    if spec.kind == ACOUSTIC and spec.c_layout != CONTINUOUS:
        acc.volume += kt.volume
        acc.face += kt.face.sum(axis=-1)
        acc.comparator += comp.volume + comp.face_other.sum(axis=-1)
        return
    acc.add_nodal(acc.volume, kt.volume)
    acc.add_sides(acc.face, kt.face)
    acc.add_nodal(acc.comparator, comp.volume)
    acc.add_sides(acc.comparator, comp.face_other)


def _check_current_grid(spec, trajectory):
    grid = trajectory.time(np.arange(trajectory.n_steps + 1))
    if spec.current_times is None or len(spec.current_times) != grid.size \
            or not np.allclose(spec.current_times, grid, rtol=0, atol=1e-12):
        raise ValueError("J_s time nodes must coincide with the step boundaries")


#: hat-function weights of the stage times on the (n, n+1) time nodes
_STAGE_HAT = np.array([[1.0, 0.0], [0.5, 0.5], [0.5, 0.5], [0.0, 1.0]])


def _deposit_current(acc, spec, n, i, g):
    nt = len(spec.current_times)
    for side in range(2):
        for j in range(2):
            w = _STAGE_HAT[i, j]
            if w:
                acc.face[side * nt + n + j] += w * g[side]
                acc.comparator[side * nt + n + j] += w * g[side]


# -- one-call drivers -----------------------------------------------------------

@dataclass
class GradientRun:
    cost_value: float
    report: GradientReport
    trajectory: Trajectory
    adjoint: AdjointTrajectory
    system: SemiDiscreteSystem


def solve_objective(spec: ModelSpec, q0, T: float, n_steps: int, cost: CostSpec,
                    system: SemiDiscreteSystem | None = None, **storage) -> float:
    system = system or SemiDiscreteSystem(spec)
    traj = run_forward(system.rhs, q0, T, n_steps, **storage)
    return evaluate_cost(spec, traj, cost)


def compute_gradient(spec: ModelSpec, q0, T: float, n_steps: int, cost: CostSpec,
                     storage_policy: str = STORE_ALL, interval: int | None = None,
                     collocation_flag: bool | None = None) -> GradientRun:
    """Forward solve, cost, adjoint sweep and gradient assembly."""
    system = SemiDiscreteSystem(spec)
    traj = run_forward(system.rhs, q0, T, n_steps, storage_policy, interval)
    dc = DiscreteCost(spec, cost, n_steps, traj.dt)
    value = 0.0
    for n in range(n_steps + 1):
        value += dc.value_at(n, traj.snapshot(n))
    value += dc.regularization()
    adj = run_adjoint(system.adjoint_apply, traj,
                      lambda n, q: system.M_inv @ dc.gradient_at(n, q), tag=cost.tag())
    report = assemble_gradient(spec, system, traj, adj, cost, collocation_flag)
    return GradientRun(value, report, traj, adj, system)
