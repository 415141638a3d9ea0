"""Dense quantum primitives: states, Kraus channels, channel families.

Matrices are plain complex ``numpy`` arrays. A Kraus channel stores its
operators as a ``(k, n, n)`` array so application is a single ``einsum``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ._validation import (
    check_operator_stack,
    check_same_dim,
    check_square,
)
from .errors import (
    DimensionMismatch,
    InputError,
    NotHermitian,
    NotPositive,
    SingularBelowFloor,
    TraceNotOne,
)
from .tolerances import (
    COMPLETENESS_TOL,
    HERMITIAN_TOL,
    POSITIVITY_FLOOR,
    PSD_TOL,
    SQRT_HERMITIAN_TOL,
    TRACE_TOL,
)

__all__ = [
    "dagger",
    "projector",
    "diag_in_basis",
    "named_basis",
    "validate_density",
    "hermitian_sqrt",
    "KrausChannel",
    "apply_channel",
    "apply_adjoint_channel",
    "compose_channels",
    "superoperator",
    "map_distance",
    "PositiveDiagonalOperator",
    "ChannelFamily",
    "AmplitudeDamping",
    "IdentityFamily",
    "DepolarizingFamily",
    "UnitaryFamily",
    "FixedChannel",
]


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def projector(v):
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def diag_in_basis(basis, weights):
    """Return ``sum_i w_i |v_i><v_i|`` for the columns ``v_i`` of ``basis``."""
    basis = np.asarray(basis, dtype=complex)
    return (basis * np.asarray(weights)) @ basis.conj().T


def named_basis(name, dim=2):
    """Eigenbasis of a named observable, vectors as columns.

    ``"z"`` (or ``"computational"``) works in any dimension; ``"x"`` and ``"y"``
    are the qubit Pauli eigenbases ordered (+1, -1).
    """
    name = name.lower()
    if name in ("z", "computational"):
        return np.eye(dim, dtype=complex)
    if dim != 2:
        raise InputError(f"basis {name!r} is only defined for dim=2")
    s = 1 / np.sqrt(2)
    if name == "x":
        return np.array([[s, s], [s, -s]], dtype=complex)
    if name == "y":
        return np.array([[s, s], [1j * s, -1j * s]], dtype=complex)
    raise InputError(f"unknown basis name {name!r}")


def validate_density(m, *, herm_tol=HERMITIAN_TOL, psd_tol=PSD_TOL, trace_tol=TRACE_TOL):
    """Check that ``m`` is a density matrix and return it.

    Raises
    ------
    NotHermitian, NotPositive, TraceNotOne
        With the measured violation on ``.value``.
    """
    m = check_square(m, "density matrix")
    norm = np.linalg.norm(m)
    herm = np.linalg.norm(m - m.conj().T)
    if herm > herm_tol * max(norm, 1.0):
        raise NotHermitian(f"matrix is not Hermitian (||A - A^H||_F = {herm:.3e})", herm)
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if evals[0] < -psd_tol:
        raise NotPositive(
            f"matrix is not positive semidefinite (eigenvalues {np.array2string(evals, precision=3)})",
            float(evals[0]),
        )
    dev = abs(np.trace(m) - 1.0)
    if dev > trace_tol:
        raise TraceNotOne(f"trace differs from 1 by {dev:.3e}", float(dev))
    return m


def hermitian_sqrt(a, *, inverse=False, pseudo_inverse=False, floor=POSITIVITY_FLOOR,
                   herm_tol=SQRT_HERMITIAN_TOL):
    """Square root (or inverse square root) of a Hermitian PSD matrix.

    Eigenvalues below ``floor * max_eigenvalue`` count as zero. In inverse
    mode such eigenvalues raise :class:`SingularBelowFloor` unless
    ``pseudo_inverse`` is set, in which case they are left at zero.
    """
    a = check_square(a, "matrix")
    dev = np.linalg.norm(a - a.conj().T)
    if dev > herm_tol * max(np.linalg.norm(a), 1.0):
        raise NotHermitian(f"matrix is not Hermitian (deviation {dev:.3e})", dev)
    evals, vecs = np.linalg.eigh((a + a.conj().T) / 2)
    cutoff = floor * max(np.abs(evals).max(), np.finfo(float).tiny)
    if evals[0] < -cutoff:
        raise NotPositive(f"matrix has a negative eigenvalue {evals[0]:.3e}", float(evals[0]))
    keep = evals > cutoff
    if not inverse:
        roots = np.where(keep, np.sqrt(np.clip(evals, 0.0, None)), 0.0)
    else:
        if not keep.all() and not pseudo_inverse:
            raise SingularBelowFloor(
                f"smallest eigenvalue {evals[0]:.3e} is below the positivity floor {cutoff:.3e}",
                float(evals[0]),
            )
        roots = np.zeros_like(evals)
        roots[keep] = 1.0 / np.sqrt(evals[keep])
    return (vecs * roots) @ vecs.conj().T


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive map ``rho -> sum_k K_k rho K_k^H``.

    Parameters
    ----------
    operators : array-like, shape (k, n, n)
        Kraus operators. A single ``(n, n)`` matrix is promoted to one operator.
    labels : sequence, optional
        One hashable label per operator, e.g. ``(i, k, j)`` index tuples.
    """

    operators: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        ops = check_operator_stack(self.operators).copy()
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != ops.shape[0]:
                raise InputError(f"{len(labels)} labels for {ops.shape[0]} operators")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self):
        return self.operators.shape[1]

    def __len__(self):
        return self.operators.shape[0]

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim, dtype=complex)[None])

    def completeness_residual(self):
        """Frobenius norm of ``sum_k K_k^H K_k - I``."""
        s = np.einsum("kji,kjl->il", self.operators.conj(), self.operators)
        return float(np.linalg.norm(s - np.eye(self.dim)))

    def is_complete(self, tol=COMPLETENESS_TOL):
        return self.completeness_residual() <= tol

    def check_complete(self, tol=COMPLETENESS_TOL):
        res = self.completeness_residual()
        if res > tol:
            raise InputError(f"Kraus operators are not complete (residual {res:.3e})", res)
        return self

    def __call__(self, rho):
        return apply_channel(self, rho)

    def adjoint(self, x):
        return apply_adjoint_channel(self, x)

    def dropping_zeros(self, atol=0.0):
        """Copy without operators whose Frobenius norm is ``<= atol``."""
        norms = np.linalg.norm(self.operators, axis=(1, 2))
        keep = norms > atol
        labels = None if self.labels is None else tuple(l for l, k in zip(self.labels, keep) if k)
        return KrausChannel(self.operators[keep], labels)


def _as_ops(ch):
    return ch.operators if isinstance(ch, KrausChannel) else check_operator_stack(ch)


def apply_channel(ch, rho):
    """Apply ``ch`` to ``rho``; ``rho`` may also be a stack ``(..., n, n)``."""
    ops = _as_ops(ch)
    rho = np.asarray(rho, dtype=complex)
    check_same_dim(ops.shape[2], rho.shape[-1], "channel and state dimensions")
    return np.einsum("kab,...bc,kdc->...ad", ops, rho, ops.conj(), optimize=True)


def apply_adjoint_channel(ch, x):
    """Heisenberg-picture map ``X -> sum_k K_k^H X K_k``."""
    ops = _as_ops(ch)
    x = np.asarray(x, dtype=complex)
    check_same_dim(ops.shape[1], x.shape[-1], "channel and observable dimensions")
    return np.einsum("kba,...bc,kcd->...ad", ops.conj(), x, ops, optimize=True)


def compose_channels(first, second):
    """Channel that applies ``first`` and then ``second``.

    The operators are the products ``B_j A_i`` over all pairs, labelled
    ``(label_i, label_j)`` when both inputs carry labels.
    """
    a, b = _as_ops(first), _as_ops(second)
    check_same_dim(a.shape[1], b.shape[2], "composed channel dimensions")
    ops = np.einsum("jab,ibc->ijac", b, a).reshape(-1, b.shape[1], a.shape[2])
    la = getattr(first, "labels", None)
    lb = getattr(second, "labels", None)
    labels = None
    if la is not None and lb is not None:
        labels = [(x, y) for x in la for y in lb]
    return KrausChannel(ops, labels)


def superoperator(ch):
    """Matrix of the channel acting on row-major vectorized matrices."""
    ops = _as_ops(ch)
    return np.einsum("kab,kcd->acbd", ops, ops.conj()).reshape(
        ops.shape[1] ** 2, ops.shape[2] ** 2
    )


def map_distance(ch1, ch2):
    """Frobenius distance between two channels as linear maps."""
    return float(np.linalg.norm(superoperator(ch1) - superoperator(ch2)))


class PositiveDiagonalOperator:
    """``sum_i w_i |v_i><v_i|`` with strictly positive weights.

    Powers are taken on the weights, so square roots and inverse square roots
    never go through an eigendecomposition.
    """

    def __init__(self, basis, weights):
        self.basis = np.asarray(basis, dtype=complex)
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (self.basis.shape[1],):
            raise DimensionMismatch("one weight per basis vector required")
        if not np.all(self.weights > 0):
            raise NotPositive("weights must be strictly positive", float(self.weights.min()))

    @property
    def matrix(self):
        return diag_in_basis(self.basis, self.weights)

    def power(self, p):
        return diag_in_basis(self.basis, self.weights ** p)

    def sqrt(self):
        return self.power(0.5)

    def inv_sqrt(self):
        return self.power(-0.5)

    def scaled(self, c):
        return PositiveDiagonalOperator(self.basis, c * self.weights)

    def __array__(self, dtype=None, copy=None):
        m = self.matrix
        return m if dtype is None else m.astype(dtype)

    def __repr__(self):
        return f"PositiveDiagonalOperator(weights={self.weights!r})"


class ChannelFamily:
    """Markovian family of channels indexed by an interval ``(t1, t2)``."""

    dim: int

    def channel(self, t1, t2):
        raise NotImplementedError

    def __call__(self, t1, t2):
        if not 0.0 <= t1 <= t2:
            raise InputError(f"invalid interval ({t1}, {t2})")
        return self.channel(float(t1), float(t2))


@dataclass(frozen=True)
class AmplitudeDamping(ChannelFamily):
    """Qubit decay ``|1> -> |0>`` with probability ``1 - exp(-gamma (t2 - t1))``."""

    gamma: float
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise InputError(f"gamma must be nonnegative, got {self.gamma!r}")

    def decay_probability(self, t):
        return -np.expm1(-self.gamma * t)

    def channel(self, t1, t2):
        lam = self.decay_probability(t2 - t1)
        k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - lam)]], dtype=complex)
        k1 = np.array([[0.0, np.sqrt(lam)], [0.0, 0.0]], dtype=complex)
        return KrausChannel(np.stack([k0, k1]), labels=(0, 1))


@dataclass(frozen=True)
class IdentityFamily(ChannelFamily):
    dim: int

    def channel(self, t1, t2):
        return KrausChannel(np.eye(self.dim, dtype=complex)[None], labels=(0,))


def _weyl_operators(n):
    omega = np.exp(2j * np.pi / n)
    shift = np.roll(np.eye(n), 1, axis=0)
    clock = np.diag(omega ** np.arange(n))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(n) for b in range(n)]


@dataclass(frozen=True)
class DepolarizingFamily(ChannelFamily):
    """``rho -> (1 - q) rho + q I/n`` with survival ``(1 - p) ** (t2 - t1)``.

    ``p`` is the depolarizing probability over the unit interval, so
    ``family(0, 1)`` is the depolarizing channel with parameter ``p``.
    """

    dim: int
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InputError(f"depolarizing probability must lie in [0, 1], got {self.p!r}")

    def channel(self, t1, t2):
        n = self.dim
        dt = t2 - t1
        survive = 0.0 if self.p == 1.0 and dt > 0 else (1.0 - self.p) ** dt
        q = 1.0 - survive
        weyl = _weyl_operators(n)
        ops = [np.sqrt(1.0 - q + q / n**2) * weyl[0]]
        ops += [np.sqrt(q) / n * w for w in weyl[1:]]
        return KrausChannel(np.stack(ops).astype(complex), labels=tuple(range(n * n)))


@dataclass(frozen=True)
class UnitaryFamily(ChannelFamily):
    """``exp(-i H (t2 - t1))`` for a Hermitian generator ``H``."""

    hamiltonian: np.ndarray

    def __post_init__(self):
        h = check_square(self.hamiltonian, "hamiltonian")
        if np.linalg.norm(h - h.conj().T) > 1e-12 * max(1.0, np.linalg.norm(h)):
            raise NotHermitian("hamiltonian must be Hermitian")
        object.__setattr__(self, "hamiltonian", h)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def channel(self, t1, t2):
        return KrausChannel(expm(-1j * self.hamiltonian * (t2 - t1))[None], labels=(0,))


@dataclass(frozen=True)
class FixedChannel(ChannelFamily):
    """Wraps a single channel; only usable for the interval it was built for."""

    kraus: KrausChannel

    @property
    def dim(self):
        return self.kraus.dim

    def channel(self, t1, t2):
        return self.kraus
