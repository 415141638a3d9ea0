"""Seeded random instances for tests, sweeps and benchmarks."""

import numpy as np

from .experiment import ExperimentSpec, Projective, SplitChannel
from .qcore import KrausChannel


def unitary(n, rng):
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def channel(n, n_ops, rng):
    """Random channel from a random Stinespring isometry."""
    z = rng.standard_normal((n_ops * n, n)) + 1j * rng.standard_normal((n_ops * n, n))
    q, _ = np.linalg.qr(z)
    return KrausChannel(q.reshape(n_ops, n, n), labels=tuple(range(n_ops)))


def density(n, rng, rank=None):
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def probability(n, rng, concentration=2.0):
    return rng.dirichlet(np.full(n, concentration))


def spec(n, rng, *, split=False, n_ops=2):
    """Random experiment with strictly positive prior and observed marginals."""
    if split:
        ch = SplitChannel(
            channel(n, n_ops, rng),
            channel(n, n_ops, rng),
            tau=float(rng.uniform(0.2, 0.8)),
            measurement=Projective(unitary(n, rng), np.arange(n, dtype=float)),
        )
    else:
        ch = channel(n, n_ops, rng)
    return ExperimentSpec(
        unitary(n, rng), unitary(n, rng), probability(n, rng), ch,
        probability(n, rng), probability(n, rng),
    )
