"""Time-reversed channels and the reversed bridge.

A channel that carries ``rho_in`` to ``rho_out`` has a reverse
``M_k = rho_in^(1/2) L_k^dagger rho_out^(-1/2)`` that carries ``rho_out``
back. The reversed bridge rescales the reverse of the prior by
``psi0 = sum_i c_i P0^i`` and ``psi1 = sum_j d_j P1^j`` where the
coefficients follow in closed form from the forward potentials.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._checks import Check, raise_if_failed
from .bridge import solve_coupling
from .errors import ConsistencyViolation, EquivalenceViolation
from .qcore import (
    KrausChannel,
    PositiveDiagonalOperator,
    apply_adjoint_channel,
    apply_channel,
    dagger,
    diag_in_basis,
    hermitian_sqrt,
)
from .tolerances import (
    BRIDGING_TOL,
    COMPLETENESS_TOL,
    EQUIVALENCE_OP_TOL,
    EQUIVALENCE_STATE_TOL,
    HERMITIAN_TOL,
    REVERSE_CROSSCHECK_TOL,
    SYSTEM_TOL,
)

__all__ = ["reverse_channel", "ReversedBridge", "solve_reverse_bridge", "check_equivalence"]


def reverse_channel(ops, rho_in, rho_out, *, verify=True, tol=COMPLETENESS_TOL,
                    map_tol=BRIDGING_TOL):
    """Reverse of ``ops`` anchored at ``rho_in -> rho_out``.

    Raises :class:`SingularBelowFloor` if ``rho_out`` is not invertible and,
    when ``verify`` is set, :class:`ConsistencyViolation` if the reverse is
    not trace preserving or does not send ``rho_out`` back to ``rho_in``.
    """
    ch = ops if isinstance(ops, KrausChannel) else KrausChannel(ops)
    s_in = hermitian_sqrt(rho_in)
    inv_out = hermitian_sqrt(rho_out, inverse=True)
    rev = KrausChannel(s_in[None] @ dagger(ch.operators) @ inv_out[None], ch.labels)
    if verify:
        checks = (
            Check("reverse_completeness", rev.completeness_residual(), tol),
            Check("reverse_maps_out_to_in", np.linalg.norm(apply_channel(rev, rho_out) - rho_in), map_tol),
        )
        raise_if_failed(checks, ConsistencyViolation, "channel reversal")
    return rev


@dataclass(frozen=True)
class ReversedBridge:
    reversed_kraus: KrausChannel
    c: np.ndarray
    d: np.ndarray
    psi0: PositiveDiagonalOperator
    psi1: PositiveDiagonalOperator
    psihat0: np.ndarray
    psihat1: np.ndarray
    updated_reversed_kraus: KrausChannel
    coupling: np.ndarray
    checks: tuple = ()

    @property
    def potentials_rev(self):
        return self.c, self.d

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _cross_check(prior, forward, c, d):
    """Solve the reversed coupling problem from scratch and compare."""
    res = solve_coupling(prior.joint.T, forward.beta_tilde, forward.alpha_tilde)
    # reversed potentials are (a', b') = (d, c) up to a common scale
    scale = c.sum() / res.potentials.b.sum()
    return (
        Check("crosscheck_coupling", np.abs(res.coupling.T - forward.coupling).max(), REVERSE_CROSSCHECK_TOL),
        Check("crosscheck_c", np.abs(c - scale * res.potentials.b).max() / np.abs(c).max(),
              REVERSE_CROSSCHECK_TOL),
        Check("crosscheck_d", np.abs(d - scale * res.potentials.a).max() / np.abs(d).max(),
              REVERSE_CROSSCHECK_TOL),
    )


def solve_reverse_bridge(prior, forward, spec=None, *, cross_check=False, verify=True,
                         system_tol=SYSTEM_TOL, bridging_tol=BRIDGING_TOL):
    """Reversed bridge built from a solved forward bridge.

    ``spec`` is accepted for symmetry with the forward solver; the reported
    marginals are taken from ``forward``.
    """
    a, b = forward.potentials.a, forward.potentials.b
    alpha_t, beta_t = forward.alpha_tilde, forward.beta_tilde
    c = alpha_t / (a * prior.alpha)
    d = beta_t / (b * prior.beta)
    rev = reverse_channel(prior.selected, prior.rho0, prior.rho1, verify=False)
    psi0 = PositiveDiagonalOperator(prior.basis0, c)
    psi1 = PositiveDiagonalOperator(prior.basis1, d)
    updated = KrausChannel(psi0.sqrt()[None] @ rev.operators @ psi1.inv_sqrt()[None], rev.labels)
    rho0t, rho1t = forward.rho0_tilde, forward.rho1_tilde
    psihat0 = psi0.inv_sqrt() @ rho0t @ psi0.inv_sqrt()
    psihat1 = psi1.inv_sqrt() @ rho1t @ psi1.inv_sqrt()
    coupling = (c[:, None] / d[None, :]) * (beta_t / prior.beta)[None, :] * prior.joint

    checks = [
        Check("reverse_completeness", rev.completeness_residual(), COMPLETENESS_TOL),
        Check("updated_reverse_completeness", updated.completeness_residual(), COMPLETENESS_TOL),
        Check("alpha_tilde_link", np.abs(alpha_t - a * c * prior.alpha).max(), EQUIVALENCE_STATE_TOL),
        Check("beta_tilde_link", np.abs(beta_t - b * d * prior.beta).max(), EQUIVALENCE_STATE_TOL),
        Check("reversed_bridges_endpoints", np.linalg.norm(apply_channel(updated, rho1t) - rho0t),
              bridging_tol),
        Check("psi1_is_adjoint_of_psi0",
              np.linalg.norm(psi1.matrix - apply_adjoint_channel(rev, psi0.matrix)), system_tol),
        Check("psihat0_is_reverse_of_psihat1",
              np.linalg.norm(psihat0 - apply_channel(rev, psihat1)), system_tol),
        Check("reversed_coupling_matches", np.abs(coupling - forward.coupling).max(), EQUIVALENCE_STATE_TOL),
        Check("psihat_trace_balance", abs(np.trace(psihat0) - np.trace(psihat1)), EQUIVALENCE_STATE_TOL),
    ]
    if cross_check:
        checks.extend(_cross_check(prior, forward, c, d))
    checks = tuple(checks)
    if verify:
        raise_if_failed(checks, ConsistencyViolation, "reversed bridge")
    return ReversedBridge(rev, c, d, psi0, psi1, psihat0, psihat1, updated, coupling, checks)


def check_equivalence(forward, reversed_, rho0t=None, rho1t=None, *, raise_on_failure=True,
                      op_tol=EQUIVALENCE_OP_TOL, state_tol=EQUIVALENCE_STATE_TOL):
    """Check that the reversed bridge is the time reversal of the forward one.

    Returns the list of :class:`Check` records; raises
    :class:`EquivalenceViolation` on any failure unless told not to.
    """
    prior = forward.prior
    rho0t = forward.rho0_tilde if rho0t is None else rho0t
    rho1t = forward.rho1_tilde if rho1t is None else rho1t
    from_forward = reverse_channel(forward.updated, rho0t, rho1t, verify=False)
    op_res = np.linalg.norm(from_forward.operators - reversed_.updated_reversed_kraus.operators,
                            axis=(1, 2)).max()
    rho0_inv = diag_in_basis(prior.basis0, 1.0 / prior.alpha)
    rho1_inv = diag_in_basis(prior.basis1, 1.0 / prior.beta)
    products = {
        "rho0_tilde_psi_rho_phi": reversed_.psi0.matrix @ prior.rho0 @ forward.phi0.matrix,
        "rho1_tilde_psi_rho_phi": reversed_.psi1.matrix @ prior.rho1 @ forward.phi1.matrix,
        "rho0_tilde_psihat_rhoinv_phihat": reversed_.psihat0 @ rho0_inv @ forward.phihat0,
        "rho1_tilde_psihat_rhoinv_phihat": reversed_.psihat1 @ rho1_inv @ forward.phihat1,
    }
    checks = [Check("reversed_operators_match", op_res, op_tol)]
    for name, prod in products.items():
        target = rho0t if name.startswith("rho0") else rho1t
        checks.append(Check(name, np.linalg.norm(prod - target), state_tol))
        checks.append(Check(name + "_hermitian", np.linalg.norm(prod - dagger(prod)), max(state_tol, HERMITIAN_TOL)))
    checks = tuple(checks)
    if raise_on_failure:
        raise_if_failed(checks, EquivalenceViolation, "forward/reverse equivalence")
    return checks
