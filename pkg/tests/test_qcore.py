import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbridge import random as R
from qbridge.errors import InputError, NotHermitian, NotPositive, SingularBelowFloor, TraceNotOne
from qbridge.qcore import (
    AmplitudeDamping,
    DepolarizingFamily,
    IdentityFamily,
    KrausChannel,
    PositiveDiagonalOperator,
    UnitaryFamily,
    apply_adjoint_channel,
    apply_channel,
    compose_channels,
    hermitian_sqrt,
    map_distance,
    named_basis,
    validate_density,
)


def test_named_bases_are_orthonormal_eigenbases():
    x = named_basis("x")
    sx = np.array([[0, 1], [1, 0]])
    assert np.allclose(x.conj().T @ x, np.eye(2))
    assert np.allclose(sx @ x[:, 0], x[:, 0]) and np.allclose(sx @ x[:, 1], -x[:, 1])
    y = named_basis("y")
    sy = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(sy @ y[:, 0], y[:, 0])
    assert np.allclose(named_basis("z", 3), np.eye(3))
    with pytest.raises(InputError):
        named_basis("x", 3)


def test_validate_density_reports_each_violation():
    validate_density(np.diag([0.25, 0.75]))
    with pytest.raises(NotHermitian):
        validate_density(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(NotPositive):
        validate_density(np.diag([1.5, -0.5]))
    with pytest.raises(TraceNotOne) as err:
        validate_density(np.diag([0.5, 0.6]))
    assert err.value.value == pytest.approx(0.1)


def test_hermitian_sqrt_and_inverse(rng):
    rho = R.density(3, rng)
    s = hermitian_sqrt(rho)
    assert np.allclose(s @ s, rho, atol=1e-12)
    inv = hermitian_sqrt(rho, inverse=True)
    assert np.allclose(inv @ s, np.eye(3), atol=1e-9)


def test_hermitian_sqrt_singular_paths():
    p = np.diag([1.0, 0.0])
    assert np.allclose(hermitian_sqrt(p), p)
    with pytest.raises(SingularBelowFloor):
        hermitian_sqrt(p, inverse=True)
    assert np.allclose(hermitian_sqrt(p, inverse=True, pseudo_inverse=True), p)
    with pytest.raises(NotPositive):
        hermitian_sqrt(np.diag([1.0, -0.1]))


def test_amplitude_damping_closed_form():
    gamma = 1.5
    ch = AmplitudeDamping(gamma)(0.0, 0.7)
    lam = 1 - np.exp(-gamma * 0.7)
    out = apply_channel(ch, np.diag([0.0, 1.0]))
    assert np.allclose(out, np.diag([lam, 1 - lam]), atol=1e-15)
    assert ch.completeness_residual() < 1e-14
    # the family only depends on the interval length
    assert map_distance(AmplitudeDamping(gamma)(0.2, 0.5), AmplitudeDamping(gamma)(0.5, 0.8)) < 1e-14


def test_amplitude_damping_semigroup():
    fam = AmplitudeDamping(0.9)
    two = compose_channels(fam(0.0, 0.3), fam(0.3, 1.0))
    assert map_distance(two, fam(0.0, 1.0)) < 1e-13


def test_depolarizing_family_endpoint():
    p = 0.3
    ch = DepolarizingFamily(3, p)(0.0, 1.0)
    rho = np.diag([1.0, 0.0, 0.0])
    assert np.allclose(apply_channel(ch, rho), (1 - p) * rho + p * np.eye(3) / 3, atol=1e-14)
    assert ch.completeness_residual() < 1e-13


def test_unitary_and_identity_families():
    h = np.array([[1.0, 0.3], [0.3, -1.0]])
    u = UnitaryFamily(h)(0.0, 1.0).operators[0]
    assert np.allclose(u.conj().T @ u, np.eye(2))
    assert map_distance(IdentityFamily(2)(0.1, 0.9), KrausChannel.identity(2)) == 0.0
    with pytest.raises(NotHermitian):
        UnitaryFamily(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InputError):
        AmplitudeDamping(1.0)(0.5, 0.2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4), k=st.integers(1, 4))
def test_adjoint_is_dual_under_trace(seed, n, k):
    rng = np.random.default_rng(seed)
    ch = R.channel(n, k, rng)
    rho = R.density(n, rng)
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    lhs = np.trace(x @ apply_channel(ch, rho))
    rhs = np.trace(apply_adjoint_channel(ch, x) @ rho)
    assert abs(lhs - rhs) < 1e-12
    assert np.allclose(apply_adjoint_channel(ch, np.eye(n)), np.eye(n), atol=1e-12)
    assert abs(np.trace(apply_channel(ch, rho)) - 1) < 1e-12


def test_kraus_channel_is_read_only_and_labelled():
    ch = KrausChannel(np.eye(2)[None], labels=["only"])
    with pytest.raises(ValueError):
        ch.operators[0, 0, 0] = 2.0
    with pytest.raises(InputError):
        KrausChannel(np.eye(2)[None], labels=[1, 2])
    with pytest.raises(InputError):
        KrausChannel(0.5 * np.eye(2)[None]).check_complete()


def test_positive_diagonal_operator_powers(rng):
    basis = R.unitary(3, rng)
    w = np.array([0.2, 1.0, 3.0])
    op = PositiveDiagonalOperator(basis, w)
    assert np.allclose(op.sqrt() @ op.sqrt(), op.matrix)
    assert np.allclose(op.inv_sqrt() @ op.matrix @ op.inv_sqrt(), np.eye(3))
    with pytest.raises(NotPositive):
        PositiveDiagonalOperator(basis, [1.0, 0.0, 1.0])
