"""Command-line drivers: forward, gradient, verify, convergence."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .assembly import SemiDiscreteSystem
from .config import ConfigError, RunConfig, load_config
from .field import DgField, write_csv
from .models import ADVECTION
from .objective import compute_gradient, directional_derivative, evaluate_cost
from .problems import direction
from .timestep import SolverDivergence, run_forward
from .verification import (CheckResult, adjoint_identity_check, convergence_study, fd_sweep,
                           weak_strong_consistency, write_results_csv, write_summary)

EXIT_OK, EXIT_CONFIG, EXIT_NAN, EXIT_FAIL = 0, 2, 3, 4
TRANSPOSE_TOL = 1e-12
FD_TOL = 1e-7
NEGATIVE_CONTROL_MIN = 1e-6
VERIFY_CHOICES = ("fd", "adjoint", "weakstrong", "all")


def output_dir(cfg: RunConfig) -> Path:
    path = Path(os.environ.get("ADG_OUTPUT_DIR") or cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def header(cfg: RunConfig, command: str) -> list[str]:
    return [f"dgadjoint {__version__}", f"command: {command}", f"config: {cfg.source}", *cfg.resolved_lines()]


def _emit(lines):
    for line in lines:
        print(line)


# -- commands -------------------------------------------------------------------

def cmd_forward(cfg: RunConfig) -> int:
    prob = cfg.problem()
    spec = prob.spec
    system = SemiDiscreteSystem(spec)
    traj = run_forward(system.rhs, prob.q0, prob.T, prob.n_steps, cfg.storage_policy, cfg.storage_interval)
    value = float(evaluate_cost(spec, traj, prob.cost))
    out = output_dir(cfg)
    hdr = header(cfg, "forward")
    to_field = lambda q: DgField(spec.mesh, spec.basis, spec.components, q.reshape(spec.state_shape))
    write_csv(out / "forward.csv", hdr, to_field(prob.q0).csv_header(with_time=True), traj.csv_rows(to_field))
    write_csv(out / "forward_summary.csv", hdr, ["quantity", "value"],
              [["cost", repr(value)], ["n_steps", prob.n_steps], ["dt", repr(traj.dt)]])
    print(f"cost = {value!r} ({prob.n_steps} steps)")
    return EXIT_OK


def cmd_gradient(cfg: RunConfig) -> int:
    prob = cfg.problem()
    run = compute_gradient(prob.spec, prob.q0, prob.T, prob.n_steps, prob.cost,
                           cfg.storage_policy, cfg.storage_interval)
    d = direction(prob, cfg.direction_preset, cfg.seed, cfg.direction_index)
    d_di = directional_derivative(run.report, d)
    d_co = directional_derivative(run.report, d, comparator=True)
    out = output_dir(cfg)
    hdr = header(cfg, "gradient")
    run.report.to_csv(out / "gradient.csv", hdr)
    write_csv(out / "gradient_summary.csv", hdr, ["quantity", "value"],
              [["cost", repr(float(run.cost_value))], ["d_di", repr(d_di)], ["d_co", repr(d_co)],
               ["direction", cfg.direction_preset]])
    print(f"cost = {float(run.cost_value)!r}\nd_di = {d_di!r}\nd_co = {d_co!r}")
    return EXIT_OK


def check_fd(cfg: RunConfig, out: Path, hdr) -> list[CheckResult]:
    prob = cfg.problem()
    d = direction(prob, cfg.direction_preset, cfg.seed, cfg.direction_index)
    sweep = fd_sweep(prob, d, cfg.verify_epsilons)
    write_csv(out / "verify_fd.csv", hdr, sweep.csv_columns, sweep.csv_rows())
    best = sweep.best_central_error
    digits = " ".join(str(v) for v in sweep.one_sided_digits)
    return [CheckResult("fd_central", best, FD_TOL, best <= FD_TOL, f"d_di = {sweep.reference!r}"),
            CheckResult("fd_one_sided_digits", float(max(sweep.one_sided_digits)), 1.0,
                        sweep.one_sided_monotone(), f"digits {digits}")]


def check_adjoint(cfg: RunConfig, out: Path, hdr) -> list[CheckResult]:
    spec = cfg.problem().spec
    defect = adjoint_identity_check(spec, cfg.seed, cfg.verify_pairs)
    results = [CheckResult("adjoint_identity", defect, TRANSPOSE_TOL, defect <= TRANSPOSE_TOL,
                           f"{cfg.verify_pairs} pairs, seed {cfg.seed}")]
    if spec.kind == ADVECTION:
        mismatch = adjoint_identity_check(spec, cfg.seed, cfg.verify_pairs, spec.with_options(alpha=0.5))
        results.append(CheckResult("adjoint_negative_control", mismatch, NEGATIVE_CONTROL_MIN,
                                   mismatch > NEGATIVE_CONTROL_MIN, "alpha=0.5 adjoint against alpha=0 state"))
    return results


def check_weakstrong(cfg: RunConfig, out: Path, hdr) -> list[CheckResult]:
    spec = cfg.problem().spec
    gaps = weak_strong_consistency(spec)
    results = []
    for name, value in gaps.items():
        asserted = name != "weak_vs_strong" or not spec.basis.collocated
        passed = value <= TRANSPOSE_TOL if asserted else True
        results.append(CheckResult(name, value, TRANSPOSE_TOL, passed, "" if asserted else "recorded only"))
    return results


CHECKS = {"fd": check_fd, "adjoint": check_adjoint, "weakstrong": check_weakstrong}


def cmd_verify(cfg: RunConfig, which: str = "all") -> int:
    out = output_dir(cfg)
    hdr = header(cfg, f"verify {which}")
    names = list(CHECKS) if which == "all" else [which]
    results = []
    for name in names:
        results += CHECKS[name](cfg, out, hdr)
    write_results_csv(out / "verify_results.csv", results, hdr)
    write_summary(out / "verify_summary.txt", results, hdr)
    _emit(r.line() for r in results)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_convergence(cfg: RunConfig, orders=None, levels=None) -> int:
    orders = tuple(orders or cfg.convergence_orders)
    levels = tuple(levels or cfg.convergence_levels)
    table = convergence_study(cfg.model_kind, orders, levels, cfg.basis_quadrature, cfg.time_T)
    out = output_dir(cfg)
    hdr = header(cfg, "convergence")
    write_csv(out / "convergence.csv", hdr, table.csv_columns, table.csv_rows())
    results = []
    for N in orders:
        for which in ("state", "adjoint"):
            observed = min(table.orders(N, which))
            results.append(CheckResult(f"order_{which}_N{N}", observed, N + 0.5, observed >= N + 0.5,
                                       "minimum observed order"))
    write_summary(out / "convergence_summary.txt", results, hdr)
    _emit(r.line() for r in results)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgadjoint", description="1D dG discrete-adjoint gradient laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("forward", "solve the state equation and write snapshots"),
                       ("gradient", "compute the discrete gradient and the comparator")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="key = value configuration file")
    p = sub.add_parser("verify", help="run gradient and operator checks")
    p.add_argument("which", nargs="?", default="all", choices=VERIFY_CHOICES)
    p.add_argument("--config")
    p = sub.add_parser("convergence", help="state and adjoint convergence study")
    p.add_argument("--config")
    p.add_argument("--orders", type=int, nargs="+")
    p.add_argument("--levels", type=int, nargs="+")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "forward":
            return cmd_forward(cfg)
        if args.command == "gradient":
            return cmd_gradient(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.which)
        return cmd_convergence(cfg, args.orders, args.levels)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverDivergence as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NAN


if __name__ == "__main__":
    sys.exit(main())
