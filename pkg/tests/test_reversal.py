import numpy as np
import pytest

from qbridge import check_equivalence, prior_joint, reverse_channel, solve_bridge, solve_reverse_bridge
from qbridge import random as R
from qbridge.errors import ConsistencyViolation, SingularBelowFloor
from qbridge.qcore import AmplitudeDamping, KrausChannel, apply_channel, hermitian_sqrt, map_distance


def test_unitary_reversal(rng):
    u = R.unitary(3, rng)
    rho_out = R.density(3, rng)
    rho_in = u.conj().T @ rho_out @ u
    rev = reverse_channel(KrausChannel(u[None]), rho_in, rho_out)
    expected = hermitian_sqrt(rho_in) @ u.conj().T @ hermitian_sqrt(rho_out, inverse=True)
    assert np.allclose(rev.operators[0], expected)
    assert np.allclose(apply_channel(rev, rho_out), rho_in, atol=1e-12)


def test_identity_reversal_is_identity(rng):
    rho = R.density(2, rng)
    rev = reverse_channel(KrausChannel.identity(2), rho, rho)
    assert np.allclose(rev.operators[0], np.eye(2), atol=1e-12)


def test_damping_prior_reversal(worked):
    pm = prior_joint(worked)
    fam = AmplitudeDamping(1.5)(0, 1)
    rev = reverse_channel(fam, pm.rho0, apply_channel(fam, pm.rho0))
    assert len(rev) == 2 and rev.completeness_residual() <= 1e-10


def test_reversal_is_an_involution(rng):
    ch = R.channel(3, 2, rng)
    rho_in = R.density(3, rng)
    rho_out = apply_channel(ch, rho_in)
    rev = reverse_channel(ch, rho_in, rho_out)
    back = reverse_channel(rev, rho_out, rho_in)
    assert map_distance(back, ch) <= 1e-9


def test_singular_output_state():
    ch = AmplitudeDamping(1.0)(0, 1)
    with pytest.raises(SingularBelowFloor):
        reverse_channel(ch, np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))


def test_mismatched_anchors_fail_verification(rng):
    ch = R.channel(2, 2, rng)
    with pytest.raises(ConsistencyViolation):
        reverse_channel(ch, R.density(2, rng), R.density(2, rng))


def test_trivial_marginals_give_constant_coefficients(rng):
    spec = R.spec(3, rng)
    pm = prior_joint(spec)
    spec = spec.with_observed(pm.alpha, pm.beta)
    fwd = solve_bridge(spec)
    rev = solve_reverse_bridge(fwd.prior, fwd, spec)
    assert np.ptp(rev.c) < 1e-12 and np.ptp(rev.d) < 1e-12
    assert np.allclose(rev.coupling, pm.joint, atol=1e-14)


def test_worked_reversed_bridge(worked):
    fwd = solve_bridge(worked)
    rev = solve_reverse_bridge(fwd.prior, fwd, worked, cross_check=True)
    assert rev.passed
    for c in check_equivalence(fwd, rev):
        assert c.passed, c


def test_random_reversal_suite(rng):
    for k in range(50):
        n = (2, 3, 4)[k % 3]
        spec = R.spec(n, rng, split=bool(k % 2))
        fwd = solve_bridge(spec)
        rev = solve_reverse_bridge(fwd.prior, fwd, spec, cross_check=True)
        assert np.abs(rev.coupling - fwd.coupling).max() <= 1e-10
        for c in rev.checks + check_equivalence(fwd, rev):
            assert c.passed, (k, c)
