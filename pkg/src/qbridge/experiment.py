"""Pre- and post-selected experiments and their prior model.

An experiment prepares an eigenstate of ``X0`` (weights ``alpha``), evolves it
with a known Kraus channel and measures ``Y1`` at the end. The channel can be
split at ``tau`` with an intermediate measurement of an observable ``Z``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from ._validation import (
    check_orthonormal_basis,
    check_positive_scalar,
    check_probability_vector,
    check_same_dim,
    check_tau,
)
from .errors import (
    InputError,
    NoSplitChannel,
    PriorDegenerate,
    QuadratureTolExceeded,
    SpecInvalid,
)
from .qcore import (
    ChannelFamily,
    KrausChannel,
    apply_channel,
    diag_in_basis,
    validate_density,
)
from .tolerances import (
    COMPLETENESS_TOL,
    GENERALIZED_NORM_TOL,
    PRIOR_FLOOR,
    QUADRATURE_NODES,
    QUADRATURE_SIGMAS,
    QUADRATURE_TOL,
)

__all__ = [
    "Projective",
    "Weak",
    "Generalized",
    "SplitChannel",
    "ExperimentSpec",
    "PriorModel",
    "IntermediatePrior",
    "build_selected_kraus",
    "prior_joint",
    "prior_intermediate_state",
]


def _check_eigenvalues(eigenvalues, n):
    ev = np.asarray(eigenvalues, dtype=float).reshape(-1)
    if ev.size != n:
        raise SpecInvalid(f"expected {n} eigenvalues, got {ev.size}")
    if np.unique(ev).size != ev.size:
        raise SpecInvalid("observable must be non-degenerate (distinct eigenvalues)")
    return ev


@dataclass(frozen=True)
class Projective:
    """Ideal measurement of ``Z = sum_z z |z><z|``."""

    basis: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        basis = check_orthonormal_basis(self.basis, "measurement basis")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "eigenvalues", _check_eigenvalues(self.eigenvalues, basis.shape[0]))

    @property
    def observable(self):
        return diag_in_basis(self.basis, self.eigenvalues)

    @property
    def projectors(self):
        return np.einsum("az,bz->zab", self.basis, self.basis.conj())

    def channel(self):
        return KrausChannel(self.projectors, labels=tuple(range(self.basis.shape[0])))


@dataclass(frozen=True)
class Weak:
    """Gaussian-smeared measurement of ``Z`` with strength ``delta``.

    ``Omega(zbar) = (delta / 2 pi)^(1/4) sum_z exp(-delta (z - zbar)^2 / 4) |z><z|``
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    delta: float

    def __post_init__(self):
        basis = check_orthonormal_basis(self.basis, "measurement basis")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "eigenvalues", _check_eigenvalues(self.eigenvalues, basis.shape[0]))
        object.__setattr__(self, "delta", check_positive_scalar(self.delta, "delta"))

    @property
    def observable(self):
        return diag_in_basis(self.basis, self.eigenvalues)

    def amplitudes(self, zbar):
        """Gaussian weights ``(len(zbar), n_outcomes)`` of each eigenprojector."""
        zbar = np.atleast_1d(np.asarray(zbar, dtype=float))
        d = self.delta
        return (d / (2 * np.pi)) ** 0.25 * np.exp(-d * (self.eigenvalues[None] - zbar[:, None]) ** 2 / 4)

    def operators(self, zbar):
        amps = self.amplitudes(zbar)
        return np.einsum("mz,az,bz->mab", amps, self.basis, self.basis.conj())

    def grid(self, nodes=QUADRATURE_NODES, sigmas=QUADRATURE_SIGMAS):
        """Trapezoid nodes and weights covering all outcome Gaussians."""
        if nodes < 3:
            raise InputError("quadrature needs at least 3 nodes")
        lo, hi = self.eigenvalues.min(), self.eigenvalues.max()
        half = sigmas / np.sqrt(self.delta) * max(1.0, hi - lo)
        z = np.linspace(lo - half, hi + half, int(nodes))
        w = np.full(z.size, z[1] - z[0])
        w[0] = w[-1] = w[0] / 2
        return z, w

    def dephasing_channel(self):
        """Exact Kraus form of ``rho -> int Omega rho Omega^H dzbar``.

        The integral multiplies the ``(z, z')`` block of ``rho`` by
        ``exp(-delta (z - z')^2 / 8)``; a Kraus family follows from the
        eigendecomposition of that positive semidefinite coefficient matrix.
        """
        z = self.eigenvalues
        coeff = np.exp(-self.delta * (z[:, None] - z[None, :]) ** 2 / 8)
        lam, vec = np.linalg.eigh(coeff)
        lam = np.clip(lam, 0.0, None)
        keep = lam > 1e-15 * lam.max()
        ops = np.einsum("m,zm,az,bz->mab", np.sqrt(lam[keep]), vec[:, keep], self.basis,
                        self.basis.conj())
        return KrausChannel(ops, labels=tuple(range(int(keep.sum()))))

    def channel(self):
        return self.dephasing_channel()

    def as_generalized(self, nodes=QUADRATURE_NODES, tol=QUADRATURE_TOL):
        """Discretize on the trapezoid grid; raises if normalization drifts past ``tol``."""
        z, w = self.grid(nodes)
        gen = Generalized(self.operators(z), z, w, tol=np.inf)
        res = gen.normalization_residual()
        if res > tol:
            raise QuadratureTolExceeded(
                f"quadrature of Omega^H Omega deviates from I by {res:.3e}", res)
        return gen


@dataclass(frozen=True)
class Generalized:
    """Outcome-indexed measurement operators ``Omega_zbar``.

    ``weights`` are quadrature weights for a continuous outcome set (all ones
    for a discrete one). ``sum_m w_m Omega_m^H Omega_m`` must equal the identity.
    """

    operators: np.ndarray
    outcomes: np.ndarray
    weights: np.ndarray | None = None
    tol: float = GENERALIZED_NORM_TOL

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise SpecInvalid(f"measurement operators must have shape (m, n, n), got {ops.shape}")
        outcomes = np.asarray(self.outcomes, dtype=float).reshape(-1)
        weights = np.ones(ops.shape[0]) if self.weights is None else np.asarray(self.weights, float)
        if outcomes.size != ops.shape[0] or weights.shape != (ops.shape[0],):
            raise SpecInvalid("one outcome and one weight per operator required")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "weights", weights)
        res = self.normalization_residual()
        if res > self.tol:
            raise SpecInvalid(f"measurement operators are not normalized (residual {res:.3e})", res)

    def normalization_residual(self):
        s = np.einsum("m,mba,mbc->ac", self.weights, self.operators.conj(), self.operators)
        return float(np.linalg.norm(s - np.eye(self.operators.shape[1])))

    def channel(self):
        ops = np.sqrt(self.weights)[:, None, None] * self.operators
        return KrausChannel(ops, labels=tuple(range(ops.shape[0])))


def _segment(family, t1, t2, name):
    if isinstance(family, KrausChannel):
        return family
    if isinstance(family, ChannelFamily):
        return family(t1, t2)
    raise SpecInvalid(f"{name} must be a KrausChannel or a ChannelFamily")


@dataclass(frozen=True)
class SplitChannel:
    """Evolution split at ``tau`` around an intermediate measurement.

    ``pre`` covers ``(0, tau)`` and ``post`` covers ``(tau_end, 1)``; ``tau_end``
    defaults to ``tau`` and only differs for a measurement with duration.
    Segments given as fixed :class:`KrausChannel` objects pin the split time.
    """

    pre: ChannelFamily | KrausChannel
    post: ChannelFamily | KrausChannel
    tau: float
    measurement: Projective | Weak | Generalized | None = None
    tau_end: float | None = None

    def __post_init__(self):
        tau = check_tau(self.tau)
        object.__setattr__(self, "tau", tau)
        if self.tau_end is not None:
            end = check_tau(self.tau_end, "tau_end")
            if end < tau:
                raise SpecInvalid("tau_end must not precede tau")
            object.__setattr__(self, "tau_end", end)

    @property
    def end(self):
        return self.tau if self.tau_end is None else self.tau_end

    @property
    def dim(self):
        return self.pre_channel().dim

    def pre_channel(self, t=None):
        t = self.tau if t is None else t
        if isinstance(self.pre, KrausChannel) and t not in (self.tau,):
            if t == 0:
                return KrausChannel.identity(self.pre.dim)
            raise NoSplitChannel("pre segment is a fixed channel; intermediate times need a family")
        return _segment(self.pre, 0.0, t, "pre")

    def post_channel(self, t=1.0):
        if isinstance(self.post, KrausChannel) and t != 1.0:
            raise NoSplitChannel("post segment is a fixed channel; intermediate times need a family")
        return _segment(self.post, self.end, t, "post")

    def middle_channel(self):
        if self.measurement is None:
            return None
        return self.measurement.channel()

    def composed(self):
        """Full channel on ``(0, 1)`` labelled by ``(l, z, l')``.

        Products that vanish identically are dropped; for rank-deficient
        segments (amplitude damping, projectors) many of them do.
        """
        pre, post = self.pre_channel(), self.post_channel()
        mid = self.middle_channel()
        pre_labels = pre.labels or tuple(range(len(pre)))
        post_labels = post.labels or tuple(range(len(post)))
        if mid is None:
            mids, mid_labels = np.eye(pre.dim, dtype=complex)[None], (None,)
        else:
            mids, mid_labels = mid.operators, mid.labels
        ops = np.einsum("pab,zbc,lcd->lzpad", post.operators, mids, pre.operators)
        labels = [(l, z, p) for l in pre_labels for z in mid_labels for p in post_labels]
        ch = KrausChannel(ops.reshape(-1, pre.dim, pre.dim), labels)
        return ch.dropping_zeros(atol=1e-300)

    def at_tau(self, tau):
        if isinstance(self.pre, KrausChannel) or isinstance(self.post, KrausChannel):
            raise NoSplitChannel("moving the split point needs channel families, not fixed channels")
        if self.tau_end is not None:
            return replace(self, tau=tau, tau_end=tau + (self.tau_end - self.tau))
        return replace(self, tau=tau)

    def without_measurement(self):
        return replace(self, measurement=None)


@dataclass(frozen=True)
class ExperimentSpec:
    """Endpoint bases, prior weights, dynamics, and reported marginals.

    Parameters
    ----------
    basis0, basis1 : ndarray, shape (n, n)
        Eigenbases of the initial and final observables, vectors as columns.
    alpha : array-like, shape (n,)
        Prior probabilities of the initial outcomes.
    channel : KrausChannel or SplitChannel
        Dynamics over ``(0, 1)``.
    alpha_tilde, beta_tilde : array-like, shape (n,)
        Reported fractions of initial and final outcomes.
    """

    basis0: np.ndarray
    basis1: np.ndarray
    alpha: np.ndarray
    channel: KrausChannel | SplitChannel
    alpha_tilde: np.ndarray
    beta_tilde: np.ndarray

    def __post_init__(self):
        b0 = check_orthonormal_basis(self.basis0, "basis0")
        b1 = check_orthonormal_basis(self.basis1, "basis1")
        n = b0.shape[0]
        check_same_dim(n, b1.shape[0], "basis dimensions")
        if not isinstance(self.channel, (KrausChannel, SplitChannel)):
            raise SpecInvalid("channel must be a KrausChannel or a SplitChannel")
        check_same_dim(n, self.channel.dim, "channel and basis dimensions")
        kraus = self.kraus
        res = kraus.completeness_residual()
        if res > COMPLETENESS_TOL:
            raise SpecInvalid(f"channel is not trace preserving (residual {res:.3e})", res)
        for name in ("alpha", "alpha_tilde", "beta_tilde"):
            object.__setattr__(self, name, check_probability_vector(getattr(self, name), name, n))
        object.__setattr__(self, "basis0", b0)
        object.__setattr__(self, "basis1", b1)

    @classmethod
    def from_pre_measurement_state(cls, rho_pre, basis0, basis1, channel, alpha_tilde, beta_tilde):
        """Build a spec with ``alpha_i = <x_i| rho_pre |x_i>`` (Born rule)."""
        rho_pre = validate_density(rho_pre)
        b0 = check_orthonormal_basis(basis0, "basis0")
        alpha = np.einsum("ai,ab,bi->i", b0.conj(), rho_pre, b0).real
        return cls(b0, basis1, alpha, channel, alpha_tilde, beta_tilde)

    @property
    def dim(self):
        return self.basis0.shape[0]

    @property
    def is_split(self):
        return isinstance(self.channel, SplitChannel)

    @property
    def split(self):
        if not self.is_split:
            raise NoSplitChannel("experiment has no intermediate split")
        return self.channel

    @property
    def tau(self):
        return self.channel.tau if self.is_split else None

    @property
    def kraus(self):
        """The full channel on ``(0, 1)`` as Kraus operators."""
        if self.is_split:
            return self.channel.composed()
        return self.channel

    @property
    def rho0_tilde(self):
        return diag_in_basis(self.basis0, self.alpha_tilde)

    @property
    def rho1_tilde(self):
        return diag_in_basis(self.basis1, self.beta_tilde)

    def at_tau(self, tau):
        return replace(self, channel=self.split.at_tau(tau))

    def weak_limit(self):
        """Same experiment with the intermediate measurement removed."""
        return replace(self, channel=self.split.without_measurement())

    def with_observed(self, alpha_tilde, beta_tilde):
        return replace(self, alpha_tilde=alpha_tilde, beta_tilde=beta_tilde)


class PriorModel(NamedTuple):
    joint: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    rho0: np.ndarray
    rho1: np.ndarray
    selected: KrausChannel
    basis0: np.ndarray
    basis1: np.ndarray
    tau: float | None


def _amplitudes(spec, kraus=None):
    """``<y_j| L_k |x_i>`` as an array indexed ``[k, j, i]``."""
    kraus = spec.kraus if kraus is None else kraus
    return np.einsum("aj,kab,bi->kji", spec.basis1.conj(), kraus.operators, spec.basis0)


def build_selected_kraus(spec):
    """Rank-one operators ``L_ikj = P1^j L_k P0^i`` labelled ``(i, k, j)``.

    All ``(i, j)`` pairs are kept for every ``k`` so the family can be
    regrouped by index.
    """
    kraus = spec.kraus
    amps = _amplitudes(spec, kraus)
    n, n_k = spec.dim, len(kraus)
    klabels = kraus.labels or tuple(range(n_k))
    ops = np.einsum("kji,aj,bi->ikjab", amps, spec.basis1, spec.basis0.conj())
    labels = [(i, klabels[k], j) for i in range(n) for k in range(n_k) for j in range(n)]
    selected = KrausChannel(ops.reshape(-1, n, n), labels)
    res = selected.completeness_residual()
    if res > COMPLETENESS_TOL:
        raise SpecInvalid(f"selected Kraus family is not complete (residual {res:.3e})", res)
    return selected


def prior_joint(spec, *, floor=PRIOR_FLOOR, epsilon_regularize=0.0):
    """Prior joint probabilities ``p_ij`` of initial and final outcomes.

    Raises :class:`PriorDegenerate` when some ``p_ij <= floor``. With
    ``epsilon_regularize > 0`` the joint is shifted by epsilon and renormalized
    instead; this changes the problem, so ``alpha`` and ``beta`` of the
    returned model are the marginals of the shifted joint and the selected
    operators no longer reproduce it.
    """
    amps = _amplitudes(spec)
    joint = spec.alpha[:, None] * np.einsum("kji->ij", np.abs(amps) ** 2)
    alpha = spec.alpha
    if np.any(joint <= floor):
        if epsilon_regularize <= 0:
            bad = np.argwhere(joint <= floor)
            raise PriorDegenerate(
                f"prior joint probability vanishes at {[tuple(map(int, b)) for b in bad]}",
                float(joint.min()),
            )
        joint = joint + epsilon_regularize
        joint = joint / joint.sum()
        alpha = joint.sum(axis=1)
    beta = joint.sum(axis=0)
    selected = build_selected_kraus(spec)
    return PriorModel(
        joint=joint,
        alpha=alpha,
        beta=beta,
        rho0=diag_in_basis(spec.basis0, alpha),
        rho1=diag_in_basis(spec.basis1, beta),
        selected=selected,
        basis0=spec.basis0,
        basis1=spec.basis1,
        tau=spec.tau,
    )


class IntermediatePrior(NamedTuple):
    rho: np.ndarray
    """State just before the intermediate measurement (or at ``t``)."""
    probs: np.ndarray | None
    """Outcome probabilities ``P_tau(z)`` for a projective measurement at ``tau``."""
    rho_measured: np.ndarray | None
    """State right after the unread projective measurement."""


def prior_intermediate_state(spec, t=None, *, floor=PRIOR_FLOOR):
    """Prior state at time ``t`` (default: the split time).

    For ``t <= tau`` this is the pre segment applied to ``rho0``; later times
    apply the measurement and the post segment up to ``t``.
    """
    split = spec.split
    t = split.tau if t is None else float(t)
    rho0 = diag_in_basis(spec.basis0, spec.alpha)
    if not 0.0 <= t <= 1.0:
        raise InputError(f"t must lie in [0, 1], got {t}")
    if t <= split.tau:
        rho = apply_channel(split.pre_channel(t), rho0)
        if t == split.tau and isinstance(split.measurement, Projective):
            basis = split.measurement.basis
            probs = np.einsum("az,ab,bz->z", basis.conj(), rho, basis).real
            if np.any(probs <= floor):
                raise PriorDegenerate("prior intermediate outcome probability vanishes",
                                      float(probs.min()))
            return IntermediatePrior(rho, probs, diag_in_basis(basis, probs))
        return IntermediatePrior(rho, None, None)
    if t < split.end:
        raise InputError("t falls inside the measurement window")
    rho_tau = apply_channel(split.pre_channel(), rho0)
    mid = split.middle_channel()
    if mid is not None:
        rho_tau = apply_channel(mid, rho_tau)
    return IntermediatePrior(apply_channel(split.post_channel(t), rho_tau), None, None)
