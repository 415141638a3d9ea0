import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import BETA_TILDE, damping_prior_joint, grid_min_kl_2x2, kl
from qbridge import rate_function, solve_bridge, solve_coupling
from qbridge import random as R
from qbridge.bridge import schrodinger_system, updated_channel
from qbridge.errors import ConsistencyViolation, NoConvergence, PriorDegenerate, SupportViolation
from qbridge.qcore import apply_channel, diag_in_basis


def test_trivial_marginals_return_the_prior():
    p = np.array([[0.3, 0.2], [0.1, 0.4]])
    res = solve_coupling(p, p.sum(1), p.sum(0))
    assert np.allclose(res.coupling, p, atol=1e-15)
    assert np.allclose(res.potentials.a, 0.5) and np.allclose(res.potentials.b, 0.5)
    assert rate_function(res.coupling, p) == pytest.approx(0.0, abs=1e-15)


def test_product_prior_gives_product_coupling():
    p = damping_prior_joint()
    res = solve_coupling(p, [2 / 3, 1 / 3], BETA_TILDE)
    assert np.allclose(res.coupling, np.outer([2 / 3, 1 / 3], BETA_TILDE), atol=1e-14)
    beta = p.sum(0)
    assert rate_function(res.coupling, p) == pytest.approx(kl(BETA_TILDE, beta), abs=1e-14)


def test_kl_matches_grid_scan_on_2x2(rng):
    for _ in range(25):
        p = rng.dirichlet(np.ones(4)).reshape(2, 2)
        at, bt = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
        res = solve_coupling(p, at, bt)
        assert abs(rate_function(res.coupling, p) - grid_min_kl_2x2(p, at, bt)) < 1e-8


def _feasible_direction(rng, n, m):
    d = rng.standard_normal((n, m))
    d = d - d.mean(1, keepdims=True) - d.mean(0, keepdims=True) + d.mean()
    return d / np.abs(d).max()


def test_feasible_perturbations_never_lower_kl(rng):
    for _ in range(10):
        p = rng.dirichlet(np.ones(9)).reshape(3, 3)
        at, bt = rng.dirichlet(2 * np.ones(3)), rng.dirichlet(2 * np.ones(3))
        q = solve_coupling(p, at, bt).coupling
        base = rate_function(q, p)
        step = min(1e-3, 0.5 * q.min())
        for _ in range(200):
            d = _feasible_direction(rng, 3, 3)
            assert rate_function(q + step * d, p) >= base - 1e-15


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4), m=st.integers(2, 4))
def test_marginals_and_scaled_form(seed, n, m):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(n * m)).reshape(n, m) + 1e-3
    p /= p.sum()
    at, bt = rng.dirichlet(2 * np.ones(n)), rng.dirichlet(2 * np.ones(m))
    res = solve_coupling(p, at, bt)
    q, a, b = res.coupling, res.potentials.a, res.potentials.b
    assert np.abs(q.sum(1) - at).max() + np.abs(q.sum(0) - bt).max() <= 1e-12
    assert np.allclose(q, (b[None] / a[:, None]) * (at / p.sum(1))[:, None] * p, rtol=1e-13, atol=0)
    assert b.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(q > 0)


def test_residual_history_decreases(rng):
    for _ in range(10):
        p = rng.dirichlet(np.ones(9)).reshape(3, 3)
        res = solve_coupling(p, rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3)))
        h = res.history
        assert np.all(np.diff(h) <= 1e-15 + 1e-12 * h[:-1])


def test_budget_exhaustion_reports_residual():
    p = np.array([[0.45, 0.05], [0.05, 0.45]])
    with pytest.raises(NoConvergence) as err:
        solve_coupling(p, [0.9, 0.1], [0.2, 0.8], max_iter=2)
    assert err.value.max_iter == 2 and err.value.residual > 1e-12


def test_prior_with_empty_row_is_rejected():
    with pytest.raises(PriorDegenerate):
        solve_coupling(np.array([[0.5, 0.5], [0.0, 0.0]]), [0.5, 0.5], [0.5, 0.5])


def test_rate_function_support():
    assert rate_function([[0.5, 0.5]], [[0.5, 0.5]]) == 0.0
    assert rate_function([[1.0, 0.0]], [[0.5, 0.5]]) == pytest.approx(np.log(2))
    with pytest.raises(SupportViolation):
        rate_function([[0.5, 0.5]], [[1.0, 0.0]])


def test_worked_bridge_maps_reported_states(worked):
    sol = solve_bridge(worked)
    assert sol.updated.completeness_residual() <= 1e-10
    rho0t = diag_in_basis(worked.basis0, [2 / 3, 1 / 3])
    rho1t = np.diag([0.75, 0.25])
    assert np.linalg.norm(apply_channel(sol.updated, rho0t) - rho1t) <= 1e-9
    assert sol.passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_schrodinger_system_on_random_specs(n, rng):
    for k in range(6):
        spec = R.spec(n, rng, split=bool(k % 2))
        sol = solve_bridge(spec)
        for c in sol.checks:
            assert c.value <= c.tol, c


def test_gauge_rescaling_leaves_channel_unchanged(rng):
    spec = R.spec(3, rng)
    sol = solve_bridge(spec)
    for c in (1e-3, 7.0):
        # residuals scale with the gauge, so only the channel is compared
        system = schrodinger_system(sol.prior, sol.potentials.scaled(c), spec.rho0_tilde, spec.rho1_tilde,
                                    verify=False)
        other = updated_channel(sol.prior, system.phi0, system.phi1)
        assert np.allclose(other.operators, sol.updated.operators, atol=1e-12)


def test_verification_failure_is_reported(worked):
    # a loose solve cannot satisfy tight identities
    sol = solve_bridge(worked.with_observed([0.9, 0.1], [0.2, 0.8]), tol=1e-3, verify=False)
    assert sol.n_iter >= 1
    with pytest.raises(ConsistencyViolation) as err:
        solve_bridge(worked.with_observed([0.9, 0.1], [0.2, 0.8]), tol=1e-3, system_tol=1e-16,
                     bridging_tol=1e-16)
    assert err.value.residuals
