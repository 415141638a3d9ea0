"""Most likely coupling and the bridged Kraus channel.

The coupling minimizes relative entropy to the prior joint distribution under
the reported marginals. It has the scaled form

    q_ij = (b_j / a_i) (alpha_tilde_i / alpha_i) p_ij

and the potentials ``a``, ``b`` are found by alternating the two marginal
constraints. Lifting them to operators diagonal in the endpoint bases turns
the prior channel into one that maps the reported initial state onto the
reported final state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import rel_entr

from ._checks import Check, raise_if_failed
from ._validation import check_probability_vector
from .errors import (
    ConsistencyViolation,
    NoConvergence,
    PriorDegenerate,
    SupportViolation,
)
from .experiment import PriorModel, prior_joint
from .qcore import (
    KrausChannel,
    PositiveDiagonalOperator,
    apply_adjoint_channel,
    apply_channel,
    diag_in_basis,
)
from .tolerances import (
    BRIDGING_TOL,
    COMPLETENESS_TOL,
    PRIOR_FLOOR,
    SINKHORN_MAX_ITER,
    SINKHORN_TOL,
    SYSTEM_TOL,
)

__all__ = [
    "ScalingPotentials",
    "SinkhornResult",
    "solve_coupling",
    "rate_function",
    "SchrodingerSystem",
    "schrodinger_system",
    "updated_channel",
    "BridgeSolution",
    "solve_bridge",
]


class ScalingPotentials(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    gauge: str = "sum_b=1"

    def scaled(self, c):
        return ScalingPotentials(c * self.a, c * self.b, gauge="custom")


class SinkhornResult(NamedTuple):
    coupling: np.ndarray
    potentials: ScalingPotentials
    n_iter: int
    residual: float
    history: np.ndarray


def _marginal_residual(q, alpha_tilde, beta_tilde):
    return float(np.abs(q.sum(axis=1) - alpha_tilde).max() + np.abs(q.sum(axis=0) - beta_tilde).max())


def solve_coupling(p, alpha_tilde, beta_tilde, *, tol=SINKHORN_TOL, max_iter=SINKHORN_MAX_ITER,
                   floor=PRIOR_FLOOR):
    """Relative-entropy projection of ``p`` onto the reported marginals.

    Parameters
    ----------
    p : array-like, shape (n, m)
        Prior joint distribution; its row sums are the prior ``alpha``.
    alpha_tilde, beta_tilde : array-like
        Target row and column marginals, strictly positive.
    tol : float
        Stop when ``||rows - alpha_tilde||_inf + ||cols - beta_tilde||_inf <= tol``.
    max_iter : int
        Sweep budget; exceeding it raises :class:`NoConvergence`.

    Returns
    -------
    SinkhornResult
        Coupling, potentials normalized so that ``sum(b) == 1``, sweep count,
        final residual and the residual after every sweep.

    Notes
    -----
    Each sweep sets ``a_i = sum_j b_j p_ij / alpha_i`` (rows exact) and then
    ``b_j = beta_tilde_j / sum_i (alpha_tilde_i / (a_i alpha_i)) p_ij``
    (columns exact), starting from ``b = 1``.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise PriorDegenerate("prior joint must be a finite nonnegative matrix")
    alpha_tilde = check_probability_vector(alpha_tilde, "alpha_tilde", p.shape[0])
    beta_tilde = check_probability_vector(beta_tilde, "beta_tilde", p.shape[1])
    alpha = p.sum(axis=1)
    if np.any(alpha <= floor) or np.any(p.sum(axis=0) <= floor):
        raise PriorDegenerate("prior joint has an empty row or column", float(min(alpha.min(), p.sum(0).min())))
    kernel = p / alpha[:, None]

    b = np.ones(p.shape[1])
    history = []
    residual = np.inf
    for it in range(1, max_iter + 1):
        a = kernel @ b
        b = beta_tilde / ((alpha_tilde / a) @ kernel)
        q = (alpha_tilde / a)[:, None] * kernel * b[None, :]
        residual = _marginal_residual(q, alpha_tilde, beta_tilde)
        history.append(residual)
        if residual <= tol:
            break
    else:
        raise NoConvergence(
            f"Sinkhorn did not reach tol={tol:.1e} in {max_iter} sweeps (residual {residual:.3e})",
            max_iter=max_iter,
            residual=residual,
        )
    # closing row update keeps the adjoint relation for the potentials exact
    a = kernel @ b
    scale = b.sum()
    a, b = a / scale, b / scale
    q = (alpha_tilde / a)[:, None] * kernel * b[None, :]
    residual = _marginal_residual(q, alpha_tilde, beta_tilde)
    return SinkhornResult(q, ScalingPotentials(a, b), it, residual, np.asarray(history))


def rate_function(q, p):
    """Relative entropy ``sum q log(q / p)`` with ``0 log 0 = 0``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape:
        raise ValueError(f"shape mismatch {q.shape} vs {p.shape}")
    bad = (q > 0) & (p <= 0)
    if np.any(bad):
        raise SupportViolation(f"q has mass outside the support of p at {np.argwhere(bad).tolist()}",
                               float(q[bad].sum()))
    return float(rel_entr(q, p).sum())


class SchrodingerSystem(NamedTuple):
    phi0: PositiveDiagonalOperator
    phi1: PositiveDiagonalOperator
    phihat0: np.ndarray
    phihat1: np.ndarray
    checks: tuple


def schrodinger_system(prior, potentials, rho0_tilde, rho1_tilde, *, tol=SYSTEM_TOL, verify=True):
    """Operators ``phi``/``phihat`` at both ends and their consistency checks.

    ``phi0`` must be the adjoint prior evolution of ``phi1`` and ``phihat1``
    the forward prior evolution of ``phihat0``; the reported states factor
    as ``phi^(1/2) phihat phi^(1/2)``.
    """
    phi0 = PositiveDiagonalOperator(prior.basis0, potentials.a)
    phi1 = PositiveDiagonalOperator(prior.basis1, potentials.b)
    inv0, inv1 = phi0.inv_sqrt(), phi1.inv_sqrt()
    phihat0 = inv0 @ rho0_tilde @ inv0
    phihat1 = inv1 @ rho1_tilde @ inv1
    s0, s1 = phi0.sqrt(), phi1.sqrt()
    checks = (
        Check("phi0_is_adjoint_of_phi1",
              np.linalg.norm(phi0.matrix - apply_adjoint_channel(prior.selected, phi1.matrix)), tol),
        Check("phihat1_is_forward_of_phihat0",
              np.linalg.norm(phihat1 - apply_channel(prior.selected, phihat0)), tol),
        Check("rho0_tilde_factorization", np.linalg.norm(rho0_tilde - s0 @ phihat0 @ s0), tol),
        Check("rho1_tilde_factorization", np.linalg.norm(rho1_tilde - s1 @ phihat1 @ s1), tol),
    )
    if verify:
        raise_if_failed(checks, ConsistencyViolation, "Schrodinger system")
    return SchrodingerSystem(phi0, phi1, phihat0, phihat1, checks)


def updated_channel(prior, phi0, phi1):
    """Bridged operators ``phi1^(1/2) L_ikj phi0^(-1/2)`` with the prior labels."""
    s1 = phi1.sqrt() if isinstance(phi1, PositiveDiagonalOperator) else phi1
    inv0 = phi0.inv_sqrt() if isinstance(phi0, PositiveDiagonalOperator) else phi0
    ops = s1[None] @ prior.selected.operators @ inv0[None]
    return KrausChannel(ops, prior.selected.labels)


@dataclass(frozen=True)
class BridgeSolution:
    """Everything the forward bridge produces for one experiment."""

    prior: PriorModel
    alpha_tilde: np.ndarray
    beta_tilde: np.ndarray
    coupling: np.ndarray
    potentials: ScalingPotentials
    phi0: PositiveDiagonalOperator
    phi1: PositiveDiagonalOperator
    phihat0: np.ndarray
    phihat1: np.ndarray
    updated: KrausChannel
    kl: float
    n_iter: int
    residual: float
    history: np.ndarray = field(repr=False)
    checks: tuple = ()

    @property
    def rho0_tilde(self):
        return diag_in_basis(self.prior.basis0, self.alpha_tilde)

    @property
    def rho1_tilde(self):
        return diag_in_basis(self.prior.basis1, self.beta_tilde)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def solve_bridge(spec, *, tol=SINKHORN_TOL, max_iter=SINKHORN_MAX_ITER, prior=None, verify=True,
                 system_tol=SYSTEM_TOL, bridging_tol=BRIDGING_TOL,
                 completeness_tol=COMPLETENESS_TOL):
    """Solve the bridge for ``spec`` and verify the resulting channel.

    With ``verify=False`` failed checks are only recorded on the solution.
    """
    prior = prior_joint(spec) if prior is None else prior
    res = solve_coupling(prior.joint, spec.alpha_tilde, spec.beta_tilde, tol=tol, max_iter=max_iter)
    rho0t, rho1t = spec.rho0_tilde, spec.rho1_tilde
    system = schrodinger_system(prior, res.potentials, rho0t, rho1t, tol=system_tol, verify=verify)
    updated = updated_channel(prior, system.phi0, system.phi1)
    checks = system.checks + (
        Check("marginal_residual", res.residual, max(tol, 1e-15)),
        Check("updated_completeness", updated.completeness_residual(), completeness_tol),
        Check("updated_bridges_endpoints", np.linalg.norm(apply_channel(updated, rho0t) - rho1t),
              bridging_tol),
    )
    if verify:
        raise_if_failed(checks, ConsistencyViolation, "bridge verification")
    return BridgeSolution(
        prior=prior,
        alpha_tilde=np.asarray(spec.alpha_tilde),
        beta_tilde=np.asarray(spec.beta_tilde),
        coupling=res.coupling,
        potentials=res.potentials,
        phi0=system.phi0,
        phi1=system.phi1,
        phihat0=system.phihat0,
        phihat1=system.phihat1,
        updated=updated,
        kl=rate_function(res.coupling, prior.joint),
        n_iter=res.n_iter,
        residual=res.residual,
        history=res.history,
        checks=checks,
    )
