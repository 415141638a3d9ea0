"""scikit-learn style front ends for the classical coupling and the quantum bridge."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_square
from .bridge import rate_function, solve_bridge, solve_coupling
from .errors import InputError
from .experiment import ExperimentSpec, prior_intermediate_state, prior_joint
from .inference import most_likely_projective_distribution
from .qcore import apply_channel
from .reversal import check_equivalence, solve_reverse_bridge
from .tolerances import SINKHORN_MAX_ITER, SINKHORN_TOL

__all__ = ["SinkhornCoupling", "QuantumBridge"]


class SinkhornCoupling(BaseEstimator):
    """Most likely joint distribution with prescribed marginals.

    ``fit(p, alpha_tilde=..., beta_tilde=...)`` rescales the prior joint
    ``p``; ``predict_proba(i)`` then gives the bridged conditional
    distribution of the final outcome for initial outcomes ``i``.
    """

    def __init__(self, tol=SINKHORN_TOL, max_iter=SINKHORN_MAX_ITER):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None, *, alpha_tilde, beta_tilde):
        p = np.asarray(X, dtype=float)
        res = solve_coupling(p, alpha_tilde, beta_tilde, tol=self.tol, max_iter=self.max_iter)
        self.prior_ = p
        self.coupling_ = res.coupling
        self.a_, self.b_ = res.potentials.a, res.potentials.b
        self.n_iter_ = res.n_iter
        self.residual_ = res.residual
        self.history_ = res.history
        self.kl_ = rate_function(res.coupling, p)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "coupling_")
        idx = np.asarray(X, dtype=int).reshape(-1)
        cond = self.coupling_ / self.coupling_.sum(axis=1, keepdims=True)
        return cond[idx]

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


def _as_states(X, n):
    arr = np.asarray(X, dtype=complex)
    single = arr.ndim == 2
    arr = arr[None] if single else arr
    if arr.ndim != 3:
        raise InputError(f"expected a density matrix or a stack of them, got shape {arr.shape}")
    for m in arr:
        check_square(m, "state")
    if arr.shape[1] != n:
        raise InputError(f"state dimension {arr.shape[1]} does not match the channel ({n})")
    return arr, single


class QuantumBridge(TransformerMixin, BaseEstimator):
    """Bridged Kraus channel for a pre/post-selected experiment.

    Parameters
    ----------
    tol, max_iter : float, int
        Stopping rule of the coupling solve.
    verify : bool
        Raise when any consistency identity exceeds its tolerance.
    epsilon_regularize : float
        Shift a degenerate prior joint by this amount before solving. The
        prior operators then no longer reproduce the joint, so the operator
        identities are recorded but never enforced.

    Attributes
    ----------
    prior_, coupling_, kl_, potentials_, updated_kraus_, reversed_kraus_,
    checks_ : results of ``fit``.
    """

    def __init__(self, tol=SINKHORN_TOL, max_iter=SINKHORN_MAX_ITER, verify=True, epsilon_regularize=0.0):
        self.tol = tol
        self.max_iter = max_iter
        self.verify = verify
        self.epsilon_regularize = epsilon_regularize

    def fit(self, X, y=None):
        if not isinstance(X, ExperimentSpec):
            raise InputError("QuantumBridge.fit expects an ExperimentSpec")
        prior = prior_joint(X, epsilon_regularize=self.epsilon_regularize)
        enforce = self.verify and self.epsilon_regularize == 0
        sol = solve_bridge(X, tol=self.tol, max_iter=self.max_iter, prior=prior, verify=enforce)
        rev = solve_reverse_bridge(prior, sol, X, verify=enforce)
        eq = check_equivalence(sol, rev, raise_on_failure=enforce)
        self.spec_ = X
        self.solution_ = sol
        self.reversed_ = rev
        self.prior_ = prior.joint
        self.coupling_ = sol.coupling
        self.potentials_ = sol.potentials
        self.kl_ = sol.kl
        self.n_iter_ = sol.n_iter
        self.updated_kraus_ = sol.updated
        self.reversed_kraus_ = rev.updated_reversed_kraus
        self.checks_ = sol.checks + rev.checks + eq
        self.n_features_in_ = X.dim
        return self

    def transform(self, X):
        """Push initial states through the bridged channel."""
        check_is_fitted(self, "updated_kraus_")
        states, single = _as_states(X, self.n_features_in_)
        out = apply_channel(self.updated_kraus_, states)
        return out[0] if single else out

    def inverse_transform(self, X):
        """Pull final states back through the bridged time-reversed channel."""
        check_is_fitted(self, "reversed_kraus_")
        states, single = _as_states(X, self.n_features_in_)
        out = apply_channel(self.reversed_kraus_, states)
        return out[0] if single else out

    def predict_proba(self, X):
        """Bridged intermediate outcome distributions at the split times in ``X``.

        Each split time rebuilds the experiment and re-solves its bridge.
        """
        check_is_fitted(self, "spec_")
        taus = np.atleast_1d(np.asarray(X, dtype=float))
        return np.stack([most_likely_projective_distribution(self.spec_.at_tau(t)).probs for t in taus])

    def prior_proba(self, X):
        """Unconditioned intermediate outcome distributions at the split times in ``X``."""
        check_is_fitted(self, "spec_")
        taus = np.atleast_1d(np.asarray(X, dtype=float))
        return np.stack([prior_intermediate_state(self.spec_.at_tau(t)).probs for t in taus])

    @property
    def passed_(self):
        check_is_fitted(self, "checks_")
        return all(c.passed for c in self.checks_)
