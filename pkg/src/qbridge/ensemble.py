"""Monte Carlo of the pre/post-selected experiment and enumeration oracles.

Sampling draws fixed-size blocks of trials, each from a Philox stream whose
counter is set by the block index, so counts do not depend on how blocks are
spread over workers. Enumeration of the lattice points of the transportation
polytope gives exact event probabilities for small tables.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import multinomial

from ._validation import check_probability_vector
from .bridge import rate_function, solve_coupling
from .errors import InfeasibleMarginals, InputError, TooLarge
from .experiment import ExperimentSpec, PriorModel, prior_joint

__all__ = [
    "TrajectoryCounts",
    "SanovReport",
    "sample_experiment",
    "sample_from_coupling",
    "empirical_kl",
    "transportation_tables",
    "multinomial_logpmf",
    "exhaustive_most_likely_coupling",
    "sanov_decay_check",
]

BLOCK_SIZE = 1 << 16
MAX_TABLES = 2_000_000
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TrajectoryCounts:
    n_trials: int
    counts: np.ndarray
    seed: int

    @property
    def empirical_joint(self):
        if self.n_trials == 0:
            return np.zeros(self.counts.shape)
        return self.counts / self.n_trials

    @property
    def row_marginal(self):
        return self.empirical_joint.sum(axis=1)

    @property
    def col_marginal(self):
        return self.empirical_joint.sum(axis=0)

    def to_dict(self):
        return {"n_trials": int(self.n_trials), "seed": int(self.seed),
                "counts": self.counts.astype(int).tolist()}


def _block_counts(seed, block, size, flat_p):
    bitgen = np.random.Philox(key=seed & _SEED_MASK, counter=[0, 0, block, 0])
    rng = np.random.Generator(bitgen)
    cells = rng.choice(flat_p.size, size=size, p=flat_p)
    return np.bincount(cells, minlength=flat_p.size)


def _as_joint(source):
    if isinstance(source, ExperimentSpec):
        return prior_joint(source).joint
    if isinstance(source, PriorModel):
        return source.joint
    q = np.asarray(source, dtype=float)
    if q.ndim != 2 or np.any(q < 0) or abs(q.sum() - 1.0) > 1e-12:
        raise InputError("coupling must be a nonnegative matrix summing to 1")
    return q


def sample_from_coupling(q, N, seed, *, workers=1, block_size=BLOCK_SIZE):
    """Draw ``N`` i.i.d. cells of the joint distribution ``q``.

    The result depends only on ``(q, N, seed, block_size)``.
    """
    q = _as_joint(q)
    N = int(N)
    if N < 0:
        raise InputError("N must be nonnegative")
    flat = q.ravel() / q.sum()
    sizes = [min(block_size, N - start) for start in range(0, N, block_size)]
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _block_counts(seed, job[0], job[1], flat), jobs))
    else:
        parts = [_block_counts(seed, b, s, flat) for b, s in jobs]
    total = np.sum(parts, axis=0) if parts else np.zeros(flat.size, dtype=np.int64)
    return TrajectoryCounts(N, total.reshape(q.shape).astype(np.int64), int(seed))


def sample_experiment(spec, N, seed, *, workers=1, block_size=BLOCK_SIZE):
    """Simulate ``N`` runs of the experiment under its prior model."""
    return sample_from_coupling(spec, N, seed, workers=workers, block_size=block_size)


def empirical_kl(counts, q):
    """Relative entropy of the empirical joint of ``counts`` to ``q``."""
    c = counts.counts if isinstance(counts, TrajectoryCounts) else np.asarray(counts)
    return rate_function(c / c.sum(), q)


def _integral_targets(alpha_tilde, beta_tilde, N, tol=1e-9):
    rows = np.asarray(alpha_tilde, dtype=float) * N
    cols = np.asarray(beta_tilde, dtype=float) * N
    r, c = np.rint(rows), np.rint(cols)
    if np.abs(rows - r).max() > tol or np.abs(cols - c).max() > tol:
        raise InfeasibleMarginals(f"N={N} times the marginals is not integral")
    return r.astype(int), c.astype(int)


def _row_fillings(total, caps):
    """All nonnegative integer vectors summing to ``total`` with entries below ``caps``."""
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    rest = sum(caps[1:])
    for x in range(max(0, total - rest), min(total, caps[0]) + 1):
        for tail in _row_fillings(total - x, caps[1:]):
            yield (x,) + tail


def _count_bound(rows, cols):
    # crude upper bound: product over free cells of (cap + 1)
    bound = 1
    for r in rows[:-1]:
        bound *= (r + 1) ** (len(cols) - 1)
    return bound


def transportation_tables(rows, cols, *, max_tables=MAX_TABLES):
    """Every nonnegative integer matrix with the given row and column sums."""
    rows, cols = [int(r) for r in rows], [int(c) for c in cols]
    if sum(rows) != sum(cols):
        raise InfeasibleMarginals("row and column totals differ")
    n, m = len(rows), len(cols)
    if n == 2 and m == 2:
        lo, hi = max(0, rows[0] - cols[1]), min(rows[0], cols[0])
        x = np.arange(lo, hi + 1)
        return np.stack([np.stack([x, rows[0] - x], -1), np.stack([cols[0] - x, rows[1] - cols[0] + x], -1)], 1)
    if _count_bound(rows, cols) > max_tables:
        raise TooLarge(f"enumeration of a {n}x{m} table with N={sum(rows)} is too large")

    out = []

    def fill(i, caps, acc):
        if i == n - 1:
            out.append(acc + [list(caps)])
            return
        for row in _row_fillings(rows[i], caps):
            fill(i + 1, [c - x for c, x in zip(caps, row)], acc + [list(row)])

    fill(0, cols, [])
    return np.asarray(out, dtype=int).reshape(-1, n, m)


def multinomial_logpmf(tables, p):
    """Log-probability of each count table under i.i.d. draws from ``p``."""
    tables = np.asarray(tables)
    p = np.asarray(p, dtype=float)
    flat = tables.reshape(tables.shape[0] if tables.ndim == 3 else 1, -1)
    N = flat.sum(axis=1)
    return multinomial.logpmf(flat, N, p.ravel())


def exhaustive_most_likely_coupling(p, alpha_tilde, beta_tilde, N, *, max_tables=MAX_TABLES):
    """Most probable count table among those with the target marginals.

    Returns ``(table, log_probability)``.
    """
    p = _as_joint(p)
    if max(p.shape) > 3:
        raise TooLarge("exhaustive enumeration supports at most 3x3 tables")
    rows, cols = _integral_targets(alpha_tilde, beta_tilde, N)
    tables = transportation_tables(rows, cols, max_tables=max_tables)
    logp = multinomial_logpmf(tables, p)
    best = int(np.argmax(logp))
    return tables[best], float(logp[best])


@dataclass(frozen=True)
class SanovReport:
    N_ladder: tuple
    target_marginals: tuple
    log_prob: np.ndarray
    """Exact log-probability of the marginal-constrained event at each N."""
    rate: np.ndarray
    """``-log P_N / N``."""
    corrected_rate: np.ndarray
    """``-(log P_N + log N) / N``, removing the leading polynomial prefactor."""
    bridge_kl: float
    best_empirical_kl: np.ndarray
    maximizer_kl_to_coupling: np.ndarray
    envelope_constant: float

    @property
    def relative_deviation(self):
        return np.abs(self.rate - self.bridge_kl) / self.bridge_kl

    @property
    def corrected_relative_deviation(self):
        return np.abs(self.corrected_rate - self.bridge_kl) / self.bridge_kl

    @property
    def monotone(self):
        dev = np.abs(self.rate - self.bridge_kl)
        return bool(np.all(np.diff(dev) < 0))

    def to_dict(self):
        return {
            "N_ladder": [int(n) for n in self.N_ladder],
            "alpha_tilde": list(map(float, self.target_marginals[0])),
            "beta_tilde": list(map(float, self.target_marginals[1])),
            "log_prob": self.log_prob.tolist(),
            "rate": self.rate.tolist(),
            "corrected_rate": self.corrected_rate.tolist(),
            "bridge_kl": self.bridge_kl,
            "relative_deviation": self.relative_deviation.tolist(),
            "corrected_relative_deviation": self.corrected_relative_deviation.tolist(),
            "best_empirical_kl": self.best_empirical_kl.tolist(),
            "maximizer_kl_to_coupling": self.maximizer_kl_to_coupling.tolist(),
            "envelope_constant": self.envelope_constant,
            "monotone": self.monotone,
        }


def sanov_decay_check(p, alpha_tilde, beta_tilde, N_ladder):
    """Exact probability that ``N`` draws from ``p`` show the target marginals.

    For every ``N`` the constrained event is enumerated exactly; its decay
    rate is compared with the relative entropy of the most likely coupling.
    ``envelope_constant`` is the least-squares ``C`` in
    ``|rate - KL| ~ C log(N) / N``.
    """
    p = _as_joint(p)
    if p.shape != (2, 2):
        raise TooLarge("the decay check enumerates 2x2 tables only")
    alpha_tilde = check_probability_vector(alpha_tilde, "alpha_tilde", 2)
    beta_tilde = check_probability_vector(beta_tilde, "beta_tilde", 2)
    coupling = solve_coupling(p, alpha_tilde, beta_tilde).coupling
    kl = rate_function(coupling, p)
    ladder = tuple(int(n) for n in N_ladder)
    log_prob, best_kl, max_kl = [], [], []
    for N in ladder:
        rows, cols = _integral_targets(alpha_tilde, beta_tilde, N)
        tables = transportation_tables(rows, cols)
        logp = multinomial_logpmf(tables, p)
        log_prob.append(float(logsumexp(logp)))
        emp_kl = [rate_function(t / N, p) for t in tables]
        best_kl.append(min(emp_kl))
        max_kl.append(rate_function(tables[int(np.argmax(logp))] / N, coupling))
    Ns = np.asarray(ladder, dtype=float)
    log_prob = np.asarray(log_prob)
    rate = -log_prob / Ns
    env = np.log(Ns) / Ns
    dev = np.abs(rate - kl)
    C = float(env @ dev / (env @ env)) if np.any(env > 0) else 0.0
    return SanovReport(
        N_ladder=ladder,
        target_marginals=(alpha_tilde, beta_tilde),
        log_prob=log_prob,
        rate=rate,
        corrected_rate=-(log_prob + np.log(Ns)) / Ns,
        bridge_kl=kl,
        best_empirical_kl=np.asarray(best_kl),
        maximizer_kl_to_coupling=np.asarray(max_kl),
        envelope_constant=C,
    )
