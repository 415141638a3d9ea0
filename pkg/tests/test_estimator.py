import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from oracles import damping_bridge_intermediate, damping_prior_intermediate, damping_prior_joint
from qbridge import QuantumBridge, SinkhornCoupling, solve_bridge
from qbridge.errors import InputError, PriorDegenerate
from qbridge.experiment import ExperimentSpec
from qbridge.qcore import IdentityFamily, apply_channel, named_basis


def test_params_round_trip():
    est = QuantumBridge(tol=1e-11, verify=False)
    assert est.get_params()["tol"] == 1e-11
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(max_iter=50)
    assert est.max_iter == 50


def test_fit_sets_attributes(worked):
    est = QuantumBridge().fit(worked)
    sol = solve_bridge(worked)
    assert np.allclose(est.coupling_, sol.coupling, atol=1e-15)
    assert np.allclose(est.prior_, damping_prior_joint(), atol=1e-14)
    assert est.kl_ == pytest.approx(sol.kl, abs=1e-15)
    assert est.n_features_in_ == 2
    assert est.passed_


def test_transform_bridges_the_endpoints(worked):
    est = QuantumBridge().fit(worked)
    assert np.abs(est.transform(worked.rho0_tilde) - worked.rho1_tilde).max() <= 1e-10
    assert np.abs(est.inverse_transform(worked.rho1_tilde) - worked.rho0_tilde).max() <= 1e-10
    stack = est.transform(np.stack([worked.rho0_tilde] * 3))
    assert stack.shape == (3, 2, 2)
    assert np.allclose(stack[1], apply_channel(est.updated_kraus_, worked.rho0_tilde))


def test_transform_rejects_wrong_dimension(worked):
    est = QuantumBridge().fit(worked)
    with pytest.raises(InputError):
        est.transform(np.eye(3) / 3)


def test_predict_proba_tracks_the_bridge_curve(worked):
    est = QuantumBridge().fit(worked)
    taus = [0.2, 0.5, 0.8]
    want = np.stack([damping_bridge_intermediate(t) for t in taus])
    assert np.abs(est.predict_proba(taus) - want).max() <= 1e-12
    prior = np.stack([damping_prior_intermediate(t) for t in taus])
    assert np.abs(est.prior_proba(taus) - prior).max() <= 1e-12


def test_not_fitted():
    with pytest.raises(NotFittedError):
        QuantumBridge().transform(np.eye(2) / 2)
    with pytest.raises(NotFittedError):
        SinkhornCoupling().predict_proba([0])


def test_fit_rejects_non_spec():
    with pytest.raises(InputError):
        QuantumBridge().fit(np.eye(2))


def test_sinkhorn_coupling_estimator():
    p = np.array([[0.4, 0.1], [0.2, 0.3]])
    est = SinkhornCoupling().fit(p, alpha_tilde=[0.6, 0.4], beta_tilde=[0.5, 0.5])
    assert np.abs(est.coupling_.sum(axis=1) - [0.6, 0.4]).max() <= 1e-12
    proba = est.predict_proba([0, 1])
    assert np.allclose(proba.sum(axis=1), 1.0)
    assert list(est.predict([0, 1])) == list(np.argmax(proba, axis=1))
    assert est.kl_ > 0


def test_epsilon_regularize_handles_degenerate_prior():
    z = named_basis("z")
    spec = ExperimentSpec(z, z, [0.5, 0.5], IdentityFamily(2)(0.0, 1.0), [0.5, 0.5], [0.5, 0.5])
    with pytest.raises(PriorDegenerate):
        QuantumBridge().fit(spec)
    est = QuantumBridge(epsilon_regularize=1e-6).fit(spec)
    assert np.abs(est.coupling_.sum(axis=0) - 0.5).max() <= 1e-10
    assert len(est.checks_) > 0
