"""Classical RK4, its exact transpose, and trajectory storage with checkpointing."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

STORE_ALL = "store-all"
CHECKPOINT = "uniform-checkpoint"
STORAGE_POLICIES = (STORE_ALL, CHECKPOINT)

#: stage time offsets and update weights of classical RK4
STAGE_OFFSETS = np.array([0.0, 0.5, 0.5, 1.0])
STAGE_WEIGHTS = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0


class SolverDivergence(RuntimeError):
    """A non-finite value appeared during time stepping."""

    def __init__(self, step: int, direction: str = "forward"):
        super().__init__(f"non-finite {direction} solution at step {step}")
        self.step = step


def rk4_step(rhs: Callable, q, t: float, dt: float):
    """One classical RK4 step of ``q_t = rhs(q, t)``.

    Returns the new state and the four stage states (operator inputs).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    q = np.asarray(q, dtype=float)
    Y1 = q
    k1 = rhs(Y1, t)
    Y2 = q + 0.5 * dt * k1
    k2 = rhs(Y2, t + 0.5 * dt)
    Y3 = q + 0.5 * dt * k2
    k3 = rhs(Y3, t + 0.5 * dt)
    Y4 = q + dt * k3
    k4 = rhs(Y4, t + dt)
    q_next = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return q_next, np.array([Y1, Y2, Y3, Y4])


def adjoint_rk4_step(apply_transpose: Callable, p_next, dt: float):
    """Transpose of one homogeneous RK4 step.

    Returns ``p_n`` and the stage multipliers ``kappa_i``: the sensitivity of
    the step output to an additive perturbation of stage derivative ``k_i``
    is ``kappa_i . delta k_i``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    p_next = np.asarray(p_next, dtype=float)
    k4 = dt / 6.0 * p_next
    e4 = apply_transpose(k4)
    k3 = dt / 3.0 * p_next + dt * e4
    e3 = apply_transpose(k3)
    k2 = dt / 3.0 * p_next + 0.5 * dt * e3
    e2 = apply_transpose(k2)
    k1 = dt / 6.0 * p_next + 0.5 * dt * e2
    e1 = apply_transpose(k1)
    p_n = p_next + e1 + e2 + e3 + e4
    return p_n, np.array([k1, k2, k3, k4])


def stable_dt_bound(h_min: float, max_speed: float, order: int, safety: float = 0.5) -> float:
    return safety * h_min / (max_speed * order**2)


@dataclass
class Trajectory:
    """State snapshots at step boundaries plus RK stage states.

    Under ``uniform-checkpoint`` only every ``interval``-th snapshot is kept;
    a step's data is recomputed from the nearest earlier checkpoint with the
    same stepping code, so recomputed values are bit-identical.
    """

    rhs: Callable
    dt: float
    n_steps: int
    t0: float = 0.0
    storage_policy: str = STORE_ALL
    interval: int = 1
    checkpoints: dict = field(default_factory=dict)
    _snapshots: list = field(default_factory=list, repr=False)
    _stages: list = field(default_factory=list, repr=False)
    _segment: tuple | None = field(default=None, repr=False)
    recomputed_steps: int = 0

    def time(self, n: int) -> float:
        return self.t0 + n * self.dt

    @property
    def final_time(self) -> float:
        return self.time(self.n_steps)

    def _load_segment(self, n: int):
        start = (n // self.interval) * self.interval
        if self._segment is not None and self._segment[0] == start:
            return self._segment
        stop = min(start + self.interval, self.n_steps)
        q = self.checkpoints[start]
        snaps, stages = [q], []
        for m in range(start, stop):
            q, st = rk4_step(self.rhs, q, self.time(m), self.dt)
            snaps.append(q)
            stages.append(st)
        self.recomputed_steps += stop - start
        self._segment = (start, snaps, stages)
        return self._segment

    def snapshot(self, n: int) -> np.ndarray:
        if not 0 <= n <= self.n_steps:
            raise IndexError(n)
        if self.storage_policy == STORE_ALL:
            return self._snapshots[n]
        if n in self.checkpoints:
            return self.checkpoints[n]
        start, snaps, _ = self._load_segment(n)
        return snaps[n - start]

    def stages(self, n: int) -> np.ndarray:
        """The four stage states of step n (from t_n to t_{n+1})."""
        if not 0 <= n < self.n_steps:
            raise IndexError(n)
        if self.storage_policy == STORE_ALL:
            return self._stages[n]
        start, _, stages = self._load_segment(n)
        return stages[n - start]

    def snapshots(self):
        for n in range(self.n_steps + 1):
            yield self.snapshot(n)

    def csv_rows(self, to_field: Callable):
        for n in range(self.n_steps + 1):
            yield from to_field(self.snapshot(n)).csv_rows(time=self.time(n))


def run_forward(rhs: Callable, q0, T: float, n_steps: int, storage_policy: str = STORE_ALL,
                interval: int | None = None, t0: float = 0.0, dt_bound: float | None = None) -> Trajectory:
    """March ``q_t = rhs(q, t)`` from ``t0`` to ``t0 + T`` in ``n_steps`` RK4 steps."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if storage_policy not in STORAGE_POLICIES:
        raise ValueError(f"storage_policy must be one of {STORAGE_POLICIES}")
    dt = T / n_steps
    if dt_bound is not None and dt > dt_bound:
        warnings.warn(f"dt = {dt:.3e} exceeds the CFL guide {dt_bound:.3e}", RuntimeWarning, stacklevel=2)
    if storage_policy == CHECKPOINT:
        interval = max(1, int(interval or round(np.sqrt(n_steps))))
    else:
        interval = 1
    traj = Trajectory(rhs, dt, n_steps, t0, storage_policy, interval)
    q = np.array(q0, dtype=float).reshape(-1)
    traj.checkpoints[0] = q
    if storage_policy == STORE_ALL:
        traj._snapshots.append(q)
    for n in range(n_steps):
        q, stages = rk4_step(rhs, q, traj.time(n), dt)
        if not np.all(np.isfinite(q)):
            raise SolverDivergence(n + 1)
        if storage_policy == STORE_ALL:
            traj._snapshots.append(q)
            traj._stages.append(stages)
        elif (n + 1) % interval == 0:
            traj.checkpoints[n + 1] = q
    if storage_policy == CHECKPOINT and n_steps not in traj.checkpoints:
        traj.checkpoints[n_steps] = q
    log.debug("forward run: %d steps, dt=%g, policy=%s", n_steps, dt, storage_policy)
    return traj


@dataclass
class AdjointTrajectory:
    """Dual snapshots y_n (n = 0..N) and per-step stage multipliers."""

    dt: float
    n_steps: int
    snapshots: list
    multipliers: list
    terminal: np.ndarray
    tag: str = ""


def run_adjoint(apply_transpose: Callable, trajectory: Trajectory, injection: Callable,
                tag: str = "") -> AdjointTrajectory:
    """Backward sweep with the transposed RK4 step.

    ``injection(n, q_n)`` returns the dual-space cost sensitivity at step
    boundary n; it is added between steps, so each step itself is source-free.
    """
    N, dt = trajectory.n_steps, trajectory.dt
    y = np.asarray(injection(N, trajectory.snapshot(N)), dtype=float)
    terminal = y.copy()
    snaps = [None] * (N + 1)
    mults = [None] * N
    snaps[N] = y
    for n in range(N - 1, -1, -1):
        y, kappa = adjoint_rk4_step(apply_transpose, y, dt)
        y = y + injection(n, trajectory.snapshot(n))
        if not np.all(np.isfinite(y)):
            raise SolverDivergence(n, "adjoint")
        snaps[n] = y
        mults[n] = kappa
    return AdjointTrajectory(dt, N, snaps, mults, terminal, tag)
