"""Gradient and operator checks: FD sweeps, transposition defects,
convergence studies and weak/strong consistency."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import SemiDiscreteSystem, adjoint_operator, state_operator
from .basis import OVER_INTEGRATION, build_basis
from .field import sample, write_csv
from .models import STRONG, WEAK, ModelSpec
from .objective import compute_gradient, directional_derivative, solve_objective
from .problems import Problem, perturbed, wave_problem
from .timestep import adjoint_rk4_step, run_forward

DEFAULT_EPSILONS = tuple(10.0 ** -k for k in range(2, 9))
ONE_SIDED = "one-sided"
CENTRAL = "central"


def fd_directional(problem: Problem, d, eps: float, scheme: str = CENTRAL, base_value: float | None = None) -> float:
    """Finite-difference quotient of the discrete cost along ``d``."""
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    if not np.any(np.asarray(d)):
        return 0.0
    plus = _objective(perturbed(problem, d, eps))
    if scheme == ONE_SIDED:
        base = _objective(problem) if base_value is None else base_value
        return (plus - base) / eps
    if scheme == CENTRAL:
        return (plus - _objective(perturbed(problem, d, -eps))) / (2.0 * eps)
    raise ValueError(f"unknown FD scheme {scheme!r}")


def _objective(problem: Problem) -> float:
    return solve_objective(problem.spec, problem.q0, problem.T, problem.n_steps, problem.cost)


def matched_digits(value: float, reference: float) -> int:
    rel = abs(value - reference) / abs(reference)
    return 16 if rel == 0 else int(math.floor(-math.log10(rel)))


@dataclass
class FdSweepResult:
    epsilons: np.ndarray
    one_sided: np.ndarray
    central: np.ndarray
    reference: float
    comparator: float = float("nan")

    @property
    def one_sided_digits(self) -> list[int]:
        return [matched_digits(v, self.reference) for v in self.one_sided]

    @property
    def central_digits(self) -> list[int]:
        return [matched_digits(v, self.reference) for v in self.central]

    @property
    def central_rel_errors(self) -> np.ndarray:
        return np.abs(self.central - self.reference) / abs(self.reference)

    @property
    def best_central_error(self) -> float:
        return float(np.min(self.central_rel_errors))

    def one_sided_monotone(self) -> bool:
        """Digits never decrease as epsilon shrinks, up to the best epsilon, and do increase."""
        digits = self.one_sided_digits
        best = int(np.argmax(digits))
        head = digits[:best + 1]
        return best > 0 and all(b >= a for a, b in zip(head, head[1:]))

    def csv_rows(self):
        for e, o, c, do, dc in zip(self.epsilons, self.one_sided, self.central,
                                   self.one_sided_digits, self.central_digits):
            yield [repr(float(e)), repr(float(o)), repr(float(c)), do, dc, repr(self.reference)]

    csv_columns = ["epsilon", "one_sided", "central", "digits_one_sided", "digits_central", "d_di"]


def fd_sweep(problem: Problem, d, epsilons=DEFAULT_EPSILONS) -> FdSweepResult:
    eps = np.asarray(epsilons, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise ValueError("epsilons must be strictly decreasing")
    run = compute_gradient(problem.spec, problem.q0, problem.T, problem.n_steps, problem.cost)
    ref = directional_derivative(run.report, d)
    comp = directional_derivative(run.report, d, comparator=True)
    one = [fd_directional(problem, d, e, ONE_SIDED, base_value=run.cost_value) for e in eps]
    cen = [fd_directional(problem, d, e, CENTRAL) for e in eps]
    return FdSweepResult(eps, np.array(one), np.array(cen), ref, comp)


def weighted_norm(M, q) -> float:
    return float(np.sqrt(q @ (M @ q)))


def adjoint_identity_check(spec: ModelSpec, seed: int = 0, n_pairs: int = 1,
                           adjoint_spec: ModelSpec | None = None, system: SemiDiscreteSystem | None = None) -> float:
    """max over random pairs of |<Lq, p>_W - <q, L*p>_W| / (|q|_W |p|_W).

    ``adjoint_spec`` lets the adjoint operator come from a different model
    instance (negative controls).
    """
    system = system or SemiDiscreteSystem(spec)
    L = system.L
    L_adj = system.L_adj if adjoint_spec is None else SemiDiscreteSystem(adjoint_spec).L_adj
    M = system.M
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        q = rng.uniform(-1.0, 1.0, spec.n_dofs)
        p = rng.uniform(-1.0, 1.0, spec.n_dofs)
        lhs = (L @ q) @ (M @ p)
        rhs = q @ (M @ (L_adj @ p))
        worst = max(worst, abs(lhs - rhs) / (weighted_norm(M, q) * weighted_norm(M, p)))
    return worst


def weak_strong_consistency(spec: ModelSpec) -> dict:
    """Relative max-norm differences between the operator assemblies."""
    A_strong = state_operator(spec.with_options(form=STRONG))
    A_weak = state_operator(spec.with_options(form=WEAK))
    adj_weak = adjoint_operator(spec, WEAK)
    adj_strong = adjoint_operator(spec, STRONG)
    scale = float(np.max(np.abs(A_strong)))
    return {
        "weak_vs_strong": float(np.max(np.abs(A_weak - A_strong))) / scale,
        "strong_transpose_vs_weak_adjoint": float(np.max(np.abs(A_strong.T - adj_weak))) / scale,
        "weak_transpose_vs_strong_adjoint": float(np.max(np.abs(A_weak.T - adj_strong))) / scale,
    }


# -- convergence -------------------------------------------------------------

def l2_error(spec: ModelSpec, values: np.ndarray, exact: dict, extra_points: int = 3) -> float:
    """Broken L2 error against exact component functions on a refined Gauss rule."""
    fine = build_basis(spec.basis.order, OVER_INTEGRATION, spec.basis.order + 1 + extra_points)
    mesh = spec.mesh
    x = mesh.map_points(fine.quad_points)
    vals = values.reshape(spec.state_shape)
    total = 0.0
    for c, name in enumerate(exact):
        diff = vals[c] @ fine.interp.T - exact[name](x)
        total += float(np.sum(mesh.jacobians[:, None] * fine.quad_weights * diff**2))
    return math.sqrt(total)


@dataclass
class ConvergenceTable:
    kind: str
    rows: list = field(default_factory=list)

    def orders(self, order: int, which: str = "state") -> list[float]:
        errs = [(r["K"], r[f"{which}_error"]) for r in self.rows if r["N"] == order]
        return [math.log(e0 / e1) / math.log(k1 / k0) for (k0, e0), (k1, e1) in zip(errs, errs[1:])]

    csv_columns = ["N", "K", "n_steps", "state_error", "state_order", "adjoint_error", "adjoint_order"]

    def csv_rows(self):
        for r in self.rows:
            yield [r["N"], r["K"], r["n_steps"], repr(r["state_error"]), r.get("state_order", ""),
                   repr(r["adjoint_error"]), r.get("adjoint_order", "")]


def convergence_study(kind: str, orders=(1, 2, 3), levels=(8, 16, 32), quad_mode: str = "collocation",
                      T: float = 1.0, alpha: float = 0.0) -> ConvergenceTable:
    """State and adjoint L2 errors at the end of the sweep, per order and mesh."""
    table = ConvergenceTable(kind)
    for N in orders:
        prev = None
        for K in levels:
            spec, state, adjoint, n_steps = wave_problem(kind, K, N, quad_mode, T, alpha)
            system = SemiDiscreteSystem(spec)
            q0 = sample(spec.mesh, spec.basis, state(0.0)).flat
            traj = run_forward(system.rhs, q0, T, n_steps)
            err_s = l2_error(spec, traj.snapshot(n_steps), state(T))
            err_a = float("nan")
            if alpha == 0.0:
                y = sample(spec.mesh, spec.basis, adjoint(T)).flat
                for _ in range(n_steps):
                    y, _k = adjoint_rk4_step(system.adjoint_apply, y, traj.dt)
                err_a = l2_error(spec, y, adjoint(0.0))
            row = {"N": N, "K": K, "n_steps": n_steps, "state_error": err_s, "adjoint_error": err_a}
            if prev is not None:
                r = math.log(K / prev["K"])
                row["state_order"] = math.log(prev["state_error"] / err_s) / r
                if alpha == 0.0:
                    row["adjoint_order"] = math.log(prev["adjoint_error"] / err_a) / r
            table.rows.append(row)
            prev = row
    return table


# -- reporting ------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: measured {self.value:.3e}, threshold {self.threshold:.1e}{extra}"


def write_summary(path, results: list[CheckResult], header_lines=()):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for r in results:
            fh.write(r.line() + "\n")


def write_results_csv(path, results: list[CheckResult], header_lines=()):
    rows = ([r.name, repr(r.value), repr(r.threshold), "PASS" if r.passed else "FAIL", r.detail] for r in results)
    write_csv(path, header_lines, ["check", "value", "threshold", "status", "detail"], rows)
