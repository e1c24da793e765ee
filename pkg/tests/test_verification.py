import numpy as np
import pytest

from dgadjoint.basis import COLLOCATION, OVER_INTEGRATION
from dgadjoint.models import ACOUSTIC, ADVECTION, MAXWELL
from dgadjoint.objective import compute_gradient, directional_derivative
from dgadjoint.problems import canonical_problem, direction, wave_problem
from dgadjoint.verification import (CENTRAL, adjoint_identity_check, convergence_study, fd_directional,
                                    fd_sweep, matched_digits, weak_strong_consistency)


def small(kind, **kw):
    kw.setdefault("K", 4)
    kw.setdefault("order", 2)
    kw.setdefault("n_steps", 30)
    kw.setdefault("T", 0.5)
    return canonical_problem(kind, **kw)


def test_fd_zero_direction_and_bad_epsilon():
    prob = small(ADVECTION)
    d = np.zeros_like(prob.spec.params["a"])
    assert fd_directional(prob, d, 1e-3) == 0.0
    with pytest.raises(ValueError):
        fd_directional(prob, direction(prob), 0.0)
    with pytest.raises(ValueError):
        fd_directional(prob, direction(prob), 1e-3, "two-sided")


def test_fd_rejects_nonpositive_perturbed_parameter():
    prob = small(ACOUSTIC)
    with pytest.raises(ValueError):
        fd_directional(prob, -np.ones_like(prob.spec.params["c"]), 5.0)


def test_central_fd_exact_for_quadratic_cost():
    # the maxwell1d state is linear in J_s, so the cost is quadratic in it
    prob = small(MAXWELL)
    d = direction(prob, "random", seed=2)
    ref = directional_derivative(compute_gradient(prob.spec, prob.q0, prob.T, prob.n_steps, prob.cost).report, d)
    for eps in (1e-1, 1e-2, 1e-3):
        assert fd_directional(prob, d, eps, CENTRAL) == pytest.approx(ref, rel=1e-10)


def test_one_sided_errors_shrink_tenfold_per_decade():
    prob = small(ACOUSTIC)
    sweep = fd_sweep(prob, direction(prob), (1e-3, 1e-4, 1e-5))
    err = np.abs(sweep.one_sided - sweep.reference)
    ratios = err[:-1] / err[1:]
    assert np.all((ratios > 7) & (ratios < 13))


def test_sweep_digits_and_determinism():
    prob = small(ADVECTION)
    d = direction(prob)
    a = fd_sweep(prob, d)
    b = fd_sweep(prob, d)
    assert max(a.central_digits) >= 6
    assert a.one_sided_monotone()
    np.testing.assert_array_equal(a.one_sided, b.one_sided)
    np.testing.assert_array_equal(a.central, b.central)
    assert a.reference == b.reference
    with pytest.raises(ValueError):
        fd_sweep(prob, d, (1e-4, 1e-3))


def test_matched_digits():
    assert matched_digits(1.0002, 1.0) == 3
    assert matched_digits(2.0, 2.0) == 16


@pytest.mark.parametrize("kind", [ADVECTION, ACOUSTIC, MAXWELL])
@pytest.mark.parametrize("mode", [COLLOCATION, OVER_INTEGRATION])
def test_adjoint_identity(kind, mode):
    spec = small(kind, quad_mode=mode).spec
    assert adjoint_identity_check(spec, seed=5, n_pairs=5) <= 1e-12


def test_adjoint_identity_negative_control():
    spec = small(ADVECTION).spec
    assert adjoint_identity_check(spec, 0, 3, adjoint_spec=spec.with_options(alpha=0.5)) > 1e-3


def test_advection_second_order_rate():
    table = convergence_study(ADVECTION, orders=(2,), levels=(8, 16, 32))
    assert min(table.orders(2)) >= 2.5
    assert min(table.orders(2, "adjoint")) >= 2.5


def test_central_flux_first_order_rate():
    table = convergence_study(ADVECTION, orders=(1,), levels=(8, 16, 32), alpha=1.0)
    assert min(table.orders(1)) >= 1.0
    assert np.isnan(table.rows[0]["adjoint_error"])


def test_wave_problem_initial_data_is_exact():
    spec, state, adjoint, n = wave_problem(ACOUSTIC, 4, 2)
    assert n >= 1 and set(state(0.3)) == {"e", "v"} and set(adjoint(0.3)) == {"h", "w"}


def test_weak_strong_consistency():
    over = weak_strong_consistency(small(ACOUSTIC, quad_mode=OVER_INTEGRATION).spec)
    assert max(over.values()) <= 1e-12
    coll = weak_strong_consistency(small(ADVECTION).spec)
    assert coll["strong_transpose_vs_weak_adjoint"] <= 1e-12
    assert coll["weak_transpose_vs_strong_adjoint"] <= 1e-12
    assert coll["weak_vs_strong"] >= 0.0  # recorded, not asserted
