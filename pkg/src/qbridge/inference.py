"""Most likely intermediate statistics under pre- and post-selection.

All quantities are built from the bridge potentials pushed to the split time:
``phihat_tau`` is the forward evolution of ``phihat0`` through the first
segment and ``phi_tau`` the adjoint evolution of ``phi1`` through the second.
Time-reversed versions use the reversed segments anchored at the prior state
at the split time.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._checks import Check, raise_if_failed
from .bridge import solve_bridge
from .errors import (
    AssumptionViolated,
    ConsistencyViolation,
    InputError,
    NoSplitChannel,
    QuadratureTolExceeded,
    ZeroConditional,
    ZeroOverlap,
)
from .experiment import Generalized, Projective, Weak, prior_intermediate_state
from .qcore import (
    KrausChannel,
    PositiveDiagonalOperator,
    apply_adjoint_channel,
    apply_channel,
    compose_channels,
    dagger,
    hermitian_sqrt,
    map_distance,
)
from .reversal import reverse_channel, solve_reverse_bridge
from .tolerances import (
    BRIDGING_TOL,
    COMPLETENESS_TOL,
    DISINTEGRATION_TOL,
    EQUIVALENCE_OP_TOL,
    EQUIVALENCE_STATE_TOL,
    NORMALIZATION_TOL,
    OVERLAP_FLOOR,
    PRIOR_FLOOR,
    QUADRATURE_NODES,
    QUADRATURE_TOL,
    TRACE_FORM_TOL,
    WEAK_AGREEMENT_TOL,
)

__all__ = [
    "IntermediateDistribution",
    "ReversedIntermediate",
    "IntermediateSplit",
    "GeneralizedDistribution",
    "WeakValueResult",
    "conditional_outcome_prob",
    "conditional_time_asymmetry",
    "most_likely_projective_distribution",
    "intermediate_state_and_split",
    "reversed_projective_distribution",
    "generalized_distribution",
    "weak_operator",
    "weak_value",
    "finite_delta_weak_average",
    "most_likely_weak_value",
    "projective_tau_sweep",
]


class IntermediateDistribution(NamedTuple):
    tau: float
    outcomes: np.ndarray
    probs: np.ndarray
    varphi: np.ndarray
    varphi_hat: np.ndarray
    checks: tuple = ()


class ReversedIntermediate(NamedTuple):
    distribution: IntermediateDistribution
    psi: np.ndarray
    psi_hat: np.ndarray
    prior_probs: np.ndarray
    first_reversed: KrausChannel
    """Updated reversed operators carrying the state at ``tau`` back to time 0."""
    second_reversed: KrausChannel
    """Updated reversed operators carrying the final state back to ``tau``."""
    checks: tuple = ()


class IntermediateSplit(NamedTuple):
    rho_tau_tilde: np.ndarray
    first_leg: KrausChannel
    second_leg: KrausChannel
    checks: tuple = ()


class GeneralizedDistribution(NamedTuple):
    outcomes: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    density_reversed: np.ndarray
    mass: float
    checks: tuple = ()

    def mean(self):
        return float(np.sum(self.weights * self.outcomes * self.density) / self.mass)


class WeakValueResult(NamedTuple):
    value: float
    tau: float
    delta_used: float = 0.0
    quadrature_error_estimate: float = 0.0
    forward: float | None = None
    reversed: float | None = None
    disintegration: float | None = None
    checks: tuple = ()


# ---------------------------------------------------------------- helpers

def _at(spec, tau):
    if tau is None or (spec.tau is not None and abs(float(tau) - spec.tau) == 0.0):
        return spec
    return spec.at_tau(float(tau))


def _ensure_bridge(spec, bridge):
    if bridge is None or bridge.prior.tau != spec.tau:
        return solve_bridge(spec)
    return bridge


def _projective(spec):
    meas = spec.split.measurement
    if not isinstance(meas, Projective):
        raise NoSplitChannel("an intermediate projective measurement is required")
    return meas


def _sandwich(ch, left=None, right=None):
    """Operators ``|l_a><l_a| K |r_b><r_b|`` labelled ``(b, k, a)``.

    A missing basis means no projection on that side (label ``None``).
    """
    ops = ch.operators
    n = ch.dim
    kl = ch.labels or tuple(range(len(ch)))
    if right is None:
        rproj, rlab = np.eye(n, dtype=complex)[None], (None,)
    else:
        rproj, rlab = np.einsum("ab,cb->bac", right, right.conj()), tuple(range(right.shape[1]))
    if left is None:
        lproj, llab = np.eye(n, dtype=complex)[None], (None,)
    else:
        lproj, llab = np.einsum("ab,cb->bac", left, left.conj()), tuple(range(left.shape[1]))
    out = np.einsum("Aab,kbc,Bcd->BkAad", lproj, ops, rproj).reshape(-1, n, n)
    labels = [(b, k, a) for b in rlab for k in kl for a in llab]
    return KrausChannel(out, labels)


def _diag_expect(basis, op):
    return np.einsum("az,ab,bz->z", basis.conj(), op, basis).real


def _segment_potentials(spec, bridge):
    """``(phihat_tau, phi_tau)`` as full operators on either side of the slot."""
    split = spec.split
    phihat_tau = apply_channel(split.pre_channel(), bridge.phihat0)
    phi_tau = apply_adjoint_channel(split.post_channel(), bridge.phi1.matrix)
    return phihat_tau, phi_tau


def _segment_probs(spec):
    """``|<z|K_l|x_i>|^2`` summed over l as ``[i, z]``; same for ``|<y_j|K_l'|z>|^2`` as ``[z, j]``."""
    split = spec.split
    zb = _projective(spec).basis
    pre = np.einsum("az,kab,bi->kiz", zb.conj(), split.pre_channel().operators, spec.basis0)
    post = np.einsum("aj,kab,bz->kzj", spec.basis1.conj(), split.post_channel().operators, zb)
    return (np.abs(pre) ** 2).sum(0), (np.abs(post) ** 2).sum(0), pre, post


# ------------------------------------------------------------- projective

def conditional_outcome_prob(spec, i, j, tau=None, *, method="direct", floor=PRIOR_FLOOR):
    """Probability of each intermediate outcome given initial ``i`` and final ``j``.

    ``method="direct"`` sums the squared two-step amplitudes over both Kraus
    indices; ``method="factored"`` multiplies the per-segment transition
    probabilities. Both give the same vector.
    """
    spec = _at(spec, tau)
    pre_p, post_p, pre_a, post_a = _segment_probs(spec)
    if method == "direct":
        amp = pre_a[:, i, :][:, None, :] * post_a[:, :, j][None, :, :]  # [l, l', z]
        num = (np.abs(amp) ** 2).sum(axis=(0, 1))
    elif method == "factored":
        num = pre_p[i] * post_p[:, j]
    else:
        raise InputError(f"unknown method {method!r}")
    total = num.sum()
    if total <= floor:
        raise ZeroConditional(f"outcome pair ({i}, {j}) is unreachable", float(total))
    return num / total


def conditional_time_asymmetry(spec, i, j, tau=None, *, floor=PRIOR_FLOOR):
    """Largest gap between forward and reversed-process conditional probabilities.

    The reversed process runs the reversed selected segments from final
    outcome ``j`` back to initial outcome ``i``; the gap is reported, not
    interpreted.
    """
    spec = _at(spec, tau)
    fwd = conditional_outcome_prob(spec, i, j, floor=floor)
    first, second, rho_tau, prior = _reversed_segments(spec)
    zb = _projective(spec).basis
    # <x_i| M_pre |z> and <z| M_post |y_j>
    a1 = np.einsum("a,kab,bz->kz", spec.basis0[:, i].conj(), first.operators, zb)
    a2 = np.einsum("az,kab,b->kz", zb.conj(), second.operators, spec.basis1[:, j])
    num = (np.abs(a1) ** 2).sum(0) * (np.abs(a2) ** 2).sum(0)
    if num.sum() <= floor:
        raise ZeroConditional(f"outcome pair ({i}, {j}) is unreachable in reverse", float(num.sum()))
    return float(np.abs(fwd - num / num.sum()).max())


def most_likely_projective_distribution(spec, bridge=None, tau=None, *, floor=PRIOR_FLOOR,
                                        verify=True):
    """Bridged outcome distribution of the intermediate projective measurement.

    Returns the product ``varphi * varphi_hat`` together with its factors.
    Passing ``tau`` rebuilds the experiment at that split time and re-solves
    the bridge there.
    """
    spec = _at(spec, tau)
    meas = _projective(spec)
    bridge = _ensure_bridge(spec, bridge)
    phihat_tau, phi_tau = _segment_potentials(spec, bridge)
    vhat = _diag_expect(meas.basis, phihat_tau)
    v = _diag_expect(meas.basis, phi_tau)
    if np.any(vhat <= floor) or np.any(v <= floor):
        raise AssumptionViolated("a forward or backward potential vanishes at an intermediate outcome",
                                 float(min(vhat.min(), v.min())))
    probs = v * vhat

    pre_p, post_p, _, _ = _segment_probs(spec)
    cond = pre_p[:, None, :] * post_p.T[None, :, :]  # [i, j, z]
    norm = cond.sum(axis=2, keepdims=True)
    if np.any(norm <= floor):
        raise ZeroConditional("some outcome pair is unreachable", float(norm.min()))
    disintegrated = np.einsum("ij,ijz->z", bridge.coupling, cond / norm)
    checks = (
        Check("disintegration", np.abs(probs - disintegrated).max(), DISINTEGRATION_TOL),
        Check("normalization", abs(probs.sum() - 1.0), NORMALIZATION_TOL),
    )
    if verify:
        raise_if_failed(checks, ConsistencyViolation, "projective distribution")
    return IntermediateDistribution(spec.tau, meas.eigenvalues, probs, v, vhat, checks)


def intermediate_state_and_split(spec, bridge=None, tau=None, *, verify=True):
    """Bridged state at ``tau`` and the two legs of the updated channel."""
    spec = _at(spec, tau)
    meas = _projective(spec)
    bridge = _ensure_bridge(spec, bridge)
    dist = most_likely_projective_distribution(spec, bridge, verify=verify)
    phi_tau = PositiveDiagonalOperator(meas.basis, dist.varphi)
    rho_tau = PositiveDiagonalOperator(meas.basis, dist.probs).matrix
    split = spec.split
    pre_sel = _sandwich(split.pre_channel(), left=meas.basis, right=spec.basis0)
    post_sel = _sandwich(split.post_channel(), left=spec.basis1, right=meas.basis)
    first = KrausChannel(phi_tau.sqrt()[None] @ pre_sel.operators @ bridge.phi0.inv_sqrt()[None],
                         pre_sel.labels)
    second = KrausChannel(bridge.phi1.sqrt()[None] @ post_sel.operators @ phi_tau.inv_sqrt()[None],
                          post_sel.labels)
    rho0t, rho1t = bridge.rho0_tilde, bridge.rho1_tilde
    s = phi_tau.sqrt()
    phihat_diag = PositiveDiagonalOperator(meas.basis, dist.varphi_hat).matrix
    checks = (
        Check("state_factorization", np.linalg.norm(rho_tau - s @ phihat_diag @ s), EQUIVALENCE_STATE_TOL),
        Check("first_leg_completeness", first.completeness_residual(), COMPLETENESS_TOL),
        Check("second_leg_completeness", second.completeness_residual(), COMPLETENESS_TOL),
        Check("first_leg_bridges", np.linalg.norm(apply_channel(first, rho0t) - rho_tau), BRIDGING_TOL),
        Check("second_leg_bridges", np.linalg.norm(apply_channel(second, rho_tau) - rho1t), BRIDGING_TOL),
        Check("legs_compose_to_updated",
              map_distance(compose_channels(first, second), bridge.updated), BRIDGING_TOL),
    )
    if verify:
        raise_if_failed(checks, ConsistencyViolation, "intermediate split")
    return IntermediateSplit(rho_tau, first, second, checks)


def _reversed_segments(spec):
    """Reversed selected segments anchored at the dephased prior at ``tau``."""
    from .experiment import prior_joint

    meas = _projective(spec)
    prior = prior_joint(spec)
    inter = prior_intermediate_state(spec)
    rho_tau = inter.rho_measured
    split = spec.split
    pre_sel = _sandwich(split.pre_channel(), left=meas.basis, right=spec.basis0)
    post_sel = _sandwich(split.post_channel(), left=spec.basis1, right=meas.basis)
    first = reverse_channel(pre_sel, prior.rho0, rho_tau)
    second = reverse_channel(post_sel, rho_tau, prior.rho1)
    return first, second, inter, prior


def reversed_projective_distribution(spec, reversed_=None, tau=None, *, bridge=None, verify=True):
    """The intermediate distribution through the time-reversed bridge.

    Checks both time-symmetric forms of the distribution against the forward
    product and that the updated reversed legs are the time reversal of the
    forward legs.
    """
    spec = _at(spec, tau)
    meas = _projective(spec)
    bridge = _ensure_bridge(spec, bridge)
    if reversed_ is None or bridge.prior.tau != spec.tau:
        reversed_ = solve_reverse_bridge(bridge.prior, bridge, spec)
    first, second, inter, _ = _reversed_segments(spec)
    p_tau = inter.probs
    psi_tau_op = apply_adjoint_channel(first, reversed_.psi0.matrix)
    psihat_tau_op = apply_channel(second, reversed_.psihat1)
    psi = _diag_expect(meas.basis, psi_tau_op)
    psi_hat = _diag_expect(meas.basis, psihat_tau_op)

    fwd = most_likely_projective_distribution(spec, bridge, verify=verify)
    form1 = psi * p_tau * fwd.varphi
    form2 = fwd.varphi_hat * psi_hat / p_tau

    psi_tau = PositiveDiagonalOperator(meas.basis, psi)
    n_first = KrausChannel(reversed_.psi0.sqrt()[None] @ first.operators @ psi_tau.inv_sqrt()[None],
                           first.labels)
    n_second = KrausChannel(psi_tau.sqrt()[None] @ second.operators @ reversed_.psi1.inv_sqrt()[None],
                            second.labels)
    split = intermediate_state_and_split(spec, bridge, verify=verify)
    rho0t, rho1t, rho_tau_t = bridge.rho0_tilde, bridge.rho1_tilde, split.rho_tau_tilde
    want_first = reverse_channel(split.first_leg, rho0t, rho_tau_t, verify=False)
    want_second = reverse_channel(split.second_leg, rho_tau_t, rho1t, verify=False)

    def op_gap(a, b):
        return float(np.linalg.norm(a.operators - b.operators, axis=(1, 2)).max())

    checks = (
        Check("psi_p_phi_form", np.abs(form1 - fwd.probs).max(), EQUIVALENCE_STATE_TOL),
        Check("phihat_pinv_psihat_form", np.abs(form2 - fwd.probs).max(), EQUIVALENCE_STATE_TOL),
        Check("reversed_second_bridges", np.linalg.norm(apply_channel(n_second, rho1t) - rho_tau_t),
              BRIDGING_TOL),
        Check("reversed_first_bridges", np.linalg.norm(apply_channel(n_first, rho_tau_t) - rho0t),
              BRIDGING_TOL),
        Check("first_leg_time_reversal", op_gap(n_first, want_first), EQUIVALENCE_OP_TOL),
        Check("second_leg_time_reversal", op_gap(n_second, want_second), EQUIVALENCE_OP_TOL),
    )
    if verify:
        raise_if_failed(checks, ConsistencyViolation, "reversed projective distribution")
    dist = IntermediateDistribution(spec.tau, meas.eigenvalues, form1, fwd.varphi, fwd.varphi_hat, checks)
    return ReversedIntermediate(dist, psi, psi_hat, p_tau, n_first, n_second, checks)


def projective_tau_sweep(spec, taus):
    """Prior and bridged intermediate distributions on a grid of split times."""
    taus = np.asarray(taus, dtype=float)
    n = spec.dim
    prior = np.empty((taus.size, n))
    bridged = np.empty((taus.size, n))
    for k, t in enumerate(taus):
        s = spec.at_tau(t)
        inter = prior_intermediate_state(s)
        if inter.probs is None:
            raise NoSplitChannel("a projective intermediate measurement is required")
        prior[k] = inter.probs
        bridged[k] = most_likely_projective_distribution(s).probs
    return prior, bridged


# ------------------------------------------------------------ generalized

def _measurement_family(meas, nodes):
    if isinstance(meas, Generalized):
        return meas
    if isinstance(meas, Weak):
        return meas.as_generalized(nodes)
    if isinstance(meas, Projective):
        return Generalized(meas.projectors, meas.eigenvalues)
    raise NoSplitChannel("an intermediate measurement is required")


def generalized_distribution(spec, bridge=None, omega=None, *, reversed_=None,
                             nodes=QUADRATURE_NODES, mass_tol=QUADRATURE_TOL,
                             trace_tol=TRACE_FORM_TOL, verify=True):
    """Most likely outcome density of a generalized intermediate measurement.

    The bridge has to be solved on the prior that includes the measurement
    (the default when ``bridge`` is None). ``omega`` defaults to the
    measurement of the split; weak measurements are discretized on the
    trapezoid grid. Returns the density from the forward trace form and from
    the time-reversed trace form.
    """
    split = spec.split
    fam = _measurement_family(split.measurement if omega is None else omega, nodes)
    bridge = _ensure_bridge(spec, bridge)
    if reversed_ is None:
        reversed_ = solve_reverse_bridge(bridge.prior, bridge, spec)
    prior = bridge.prior
    pre, post = split.pre_channel(), split.post_channel()
    phihat_t1 = apply_channel(pre, bridge.phihat0)
    phi_t2 = apply_adjoint_channel(post, bridge.phi1.matrix)
    ops = fam.operators
    density = np.einsum("ab,mbc,cd,mad->m", phi_t2, ops, phihat_t1, ops.conj()).real
    mass = float(np.sum(fam.weights * density))

    # reversed trace form through segments anchored at the prior before and after the slot
    rho_t1 = apply_channel(pre, prior.rho0)
    mid = split.middle_channel()
    rho_t2 = rho_t1 if mid is None else apply_channel(mid, rho_t1)
    m_pre = reverse_channel(_sandwich(pre, right=spec.basis0), prior.rho0, rho_t1, verify=False)
    m_post = reverse_channel(_sandwich(post, left=spec.basis1), rho_t2, prior.rho1, verify=False)
    psi_t1 = apply_adjoint_channel(m_pre, reversed_.psi0.matrix)
    psihat_t2 = apply_channel(m_post, reversed_.psihat1)
    s1 = hermitian_sqrt(rho_t1)
    inv2 = hermitian_sqrt(rho_t2, inverse=True)
    omega_rev = s1[None] @ dagger(ops) @ inv2[None]
    density_rev = np.einsum("ab,mbc,cd,mad->m", psi_t1, omega_rev, psihat_t2, omega_rev.conj()).real

    checks = (
        Check("mass", abs(mass - 1.0), mass_tol),
        Check("reversed_trace_form", np.abs(density - density_rev).max(), trace_tol),
        Check("reverse_pre_completeness", m_pre.completeness_residual(), COMPLETENESS_TOL),
        Check("reverse_post_completeness", m_post.completeness_residual(), COMPLETENESS_TOL),
    )
    if verify:
        if not checks[0].passed:
            raise QuadratureTolExceeded(f"outcome density integrates to {mass!r}", abs(mass - 1.0))
        raise_if_failed(checks, ConsistencyViolation, "generalized distribution")
    return GeneralizedDistribution(fam.outcomes, fam.weights, density, density_rev, mass, checks)


# ------------------------------------------------------------------- weak

def weak_operator(Z, delta, zbar):
    """``(delta / 2 pi)^(1/4) sum_z exp(-delta (z - zbar)^2 / 4) |z><z|``."""
    if isinstance(Z, (Projective, Weak)):
        basis, ev = Z.basis, Z.eigenvalues
    else:
        ev, basis = np.linalg.eigh(np.asarray(Z, dtype=complex))
    return Weak(basis, ev, delta).operators(zbar)[0]


def _weak_observable(spec, observable):
    if observable is not None:
        return np.asarray(observable, dtype=complex)
    meas = spec.split.measurement
    if meas is None:
        raise InputError("pass the observable when the experiment has no intermediate measurement")
    return meas.observable


def _sigmas(spec):
    """Forward-evolved initial projectors and backward-evolved final projectors at ``tau``."""
    split = spec.split
    proj0 = np.einsum("ai,bi->iab", spec.basis0, spec.basis0.conj())
    proj1 = np.einsum("aj,bj->jab", spec.basis1, spec.basis1.conj())
    sighat = apply_channel(split.pre_channel(), proj0)
    sig = apply_adjoint_channel(split.post_channel(), proj1)
    return sighat, sig


def weak_value(spec, i, j, tau=None, *, observable=None, floor=OVERLAP_FLOOR, return_complex=False):
    """Weak value of the intermediate observable for initial ``i`` and final ``j``.

    ``Re tr(sigma_j Z sighat_i) / tr(sigma_j sighat_i)``, evaluated without
    the disturbance of the measurement itself.
    """
    spec = _at(spec, tau)
    Z = _weak_observable(spec, observable)
    sighat, sig = _sigmas(spec)
    den = np.trace(sig[j] @ sighat[i])
    if abs(den) <= floor:
        raise ZeroOverlap(f"pre/post pair ({i}, {j}) has overlap {abs(den):.3e}", float(abs(den)))
    val = np.trace(sig[j] @ Z @ sighat[i]) / den
    return complex(val) if return_complex else float(val.real)


def finite_delta_weak_average(spec, i, j, tau=None, delta=None, *, nodes=QUADRATURE_NODES,
                              tol=QUADRATURE_TOL, floor=OVERLAP_FLOOR):
    """Mean pointer reading at measurement strength ``delta`` given ``i`` and ``j``.

    The outcome density is proportional to ``tr(sigma_j Omega sighat_i Omega^H)``;
    numerator and denominator are integrated on the trapezoid grid.
    """
    spec = _at(spec, tau)
    meas = spec.split.measurement
    if isinstance(meas, Weak):
        basis, ev = meas.basis, meas.eigenvalues
        delta = meas.delta if delta is None else delta
    elif isinstance(meas, Projective):
        basis, ev = meas.basis, meas.eigenvalues
    else:
        raise NoSplitChannel("a weak or projective intermediate observable is required")
    if delta is None:
        raise InputError("delta is required")
    fam = Weak(basis, ev, delta).as_generalized(nodes, tol=tol)
    sighat, sig = _sigmas(spec)
    dens = np.einsum("ab,mbc,cd,mad->m", sig[j], fam.operators, sighat[i], fam.operators.conj()).real
    den = np.sum(fam.weights * dens)
    if den <= floor:
        raise ZeroOverlap(f"pre/post pair ({i}, {j}) has overlap {den:.3e}", float(den))
    return float(np.sum(fam.weights * fam.outcomes * dens) / den)


def most_likely_weak_value(spec, bridge=None, reversed_=None, tau=None, *, observable=None,
                           agreement_tol=WEAK_AGREEMENT_TOL, disintegration_tol=EQUIVALENCE_STATE_TOL,
                           verify=True):
    """Weak value of the intermediate observable under the bridged ensemble.

    Evaluated in the weak limit: the bridge is solved on the experiment with
    the intermediate measurement removed (pass such a bridge, or None).
    Returns the forward trace form and checks it against the time-reversed
    form and the coupling-weighted average of the per-pair weak values.
    """
    spec = _at(spec, tau)
    Z = _weak_observable(spec, observable)
    limit = spec.weak_limit()
    bridge = _ensure_bridge(limit, bridge)
    if reversed_ is None:
        reversed_ = solve_reverse_bridge(bridge.prior, bridge, limit)
    prior = bridge.prior
    split = limit.split
    pre, post = split.pre_channel(), split.post_channel()

    phihat_tau = apply_channel(pre, bridge.phihat0)
    phi_tau = apply_adjoint_channel(post, bridge.phi1.matrix)
    forward = float(np.trace(phi_tau @ Z @ phihat_tau).real)

    rho_tau = apply_channel(pre, prior.rho0)
    m_pre = reverse_channel(_sandwich(pre, right=limit.basis0), prior.rho0, rho_tau, verify=False)
    m_post = reverse_channel(_sandwich(post, left=limit.basis1), rho_tau, prior.rho1, verify=False)
    psi_tau = apply_adjoint_channel(m_pre, reversed_.psi0.matrix)
    psihat_tau = apply_channel(m_post, reversed_.psihat1)
    z_rev = hermitian_sqrt(rho_tau) @ Z @ hermitian_sqrt(rho_tau, inverse=True)
    backward = float(np.trace(psi_tau @ z_rev @ psihat_tau).real)

    n = limit.dim
    zw = np.array([[weak_value(limit, i, j, observable=Z) for j in range(n)] for i in range(n)])
    disint = float(np.sum(bridge.coupling * zw))
    checks = (
        Check("forward_vs_reversed", abs(forward - backward), agreement_tol),
        Check("forward_vs_disintegration", abs(forward - disint), disintegration_tol),
    )
    if verify:
        raise_if_failed(checks, ConsistencyViolation, "most likely weak value")
    return WeakValueResult(forward, limit.tau, 0.0, 0.0, forward, backward, disint, checks)
