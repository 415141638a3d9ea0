import numpy as np
import pytest
from scipy.stats import binom, chi2_contingency

from conftest import damping_spec
from oracles import damping_prior_joint, grid_min_kl_2x2, kl
from qbridge import solve_coupling
from qbridge.ensemble import (
    empirical_kl,
    exhaustive_most_likely_coupling,
    sample_experiment,
    sample_from_coupling,
    sanov_decay_check,
    transportation_tables,
)
from qbridge.errors import InfeasibleMarginals, InputError, TooLarge

SANOV_P = np.array([[0.4, 0.1], [0.2, 0.3]])


def test_zero_trials():
    counts = sample_from_coupling(SANOV_P, 0, seed=1)
    assert counts.counts.sum() == 0
    assert np.all(counts.empirical_joint == 0)


def test_point_mass_coupling():
    q = np.array([[0.0, 1.0], [0.0, 0.0]])
    counts = sample_from_coupling(q, 1000, seed=3)
    assert counts.counts[0, 1] == 1000


def test_negative_trials_rejected():
    with pytest.raises(InputError):
        sample_from_coupling(SANOV_P, -1, seed=0)


def test_worked_example_counts_within_binomial_bands(worked):
    N = 1_000_000
    p = damping_prior_joint()
    counts = sample_experiment(worked, N, seed=42).counts
    lo, hi = binom.interval(0.99, N, p)
    inside = (counts >= lo) & (counts <= hi)
    assert inside.mean() >= 0.95


def test_bridge_coupling_samples_show_target_marginals(worked):
    from qbridge import solve_bridge
    q = solve_bridge(worked).coupling
    counts = sample_from_coupling(q, 100_000, seed=5)
    assert np.abs(counts.row_marginal - worked.alpha_tilde).max() <= 0.01
    assert np.abs(counts.col_marginal - worked.beta_tilde).max() <= 0.01


def test_product_coupling_passes_independence_test():
    q = np.outer([0.3, 0.7], [0.6, 0.4])
    counts = sample_from_coupling(q, 50_000, seed=11).counts
    assert chi2_contingency(counts).pvalue > 1e-3


def test_single_trial():
    counts = sample_from_coupling(SANOV_P, 1, seed=9)
    assert counts.counts.sum() == 1


def test_counts_do_not_depend_on_worker_count():
    a = sample_from_coupling(SANOV_P, 300_001, seed=17, workers=1).counts
    b = sample_from_coupling(SANOV_P, 300_001, seed=17, workers=4).counts
    assert np.array_equal(a, b)


def test_seeds_differ():
    a = sample_from_coupling(SANOV_P, 10_000, seed=1).counts
    b = sample_from_coupling(SANOV_P, 10_000, seed=2).counts
    assert not np.array_equal(a, b)


def test_empirical_kl_shrinks_with_trials():
    vals = [np.mean([empirical_kl(sample_from_coupling(SANOV_P, N, seed=s), SANOV_P) for s in range(20)])
            for N in (20, 100, 300)]
    assert vals[0] > vals[1] > vals[2]


def test_table_counts():
    # 3x3 tables with all margins 3: 55 of them
    assert len(transportation_tables([3, 3, 3], [3, 3, 3])) == 55
    tabs = transportation_tables([2, 3], [4, 1])
    assert np.all(tabs.sum(axis=2) == [2, 3]) and np.all(tabs.sum(axis=1) == [4, 1])
    assert len(tabs) == 2


def test_closest_lattice_point_is_most_likely():
    q = solve_coupling(SANOV_P, [0.6, 0.4], [0.5, 0.5]).coupling
    table, _ = exhaustive_most_likely_coupling(SANOV_P, [0.6, 0.4], [0.5, 0.5], 100)
    assert np.abs(table / 100 - q).max() <= 1 / 100


def test_zero_rate_when_marginals_match_prior():
    at, bt = SANOV_P.sum(axis=1), SANOV_P.sum(axis=0)
    table, _ = exhaustive_most_likely_coupling(SANOV_P, at, bt, 100)
    assert np.array_equal(table, np.rint(SANOV_P * 100))
    assert solve_coupling(SANOV_P, at, bt).coupling == pytest.approx(SANOV_P, abs=1e-12)


def test_extreme_marginals():
    at, bt = [0.95, 0.05], [0.1, 0.9]
    q = solve_coupling(SANOV_P, at, bt).coupling
    table, _ = exhaustive_most_likely_coupling(SANOV_P, at, bt, 300)
    kl_q = kl(q, SANOV_P)
    assert abs(kl(table / 300, SANOV_P) - kl_q) / kl_q <= 0.15


def test_coupling_is_the_kl_minimiser():
    at, bt = [0.6, 0.4], [0.5, 0.5]
    q = solve_coupling(SANOV_P, at, bt).coupling
    assert kl(q, SANOV_P) <= grid_min_kl_2x2(SANOV_P, at, bt) + 1e-12


def test_decay_report_structure():
    rep = sanov_decay_check(SANOV_P, [0.6, 0.4], [0.5, 0.5], [20, 60, 100, 300])
    assert rep.monotone
    assert np.all(rep.best_empirical_kl >= rep.bridge_kl - 1e-15)
    assert rep.maximizer_kl_to_coupling[-1] <= 1e-3
    assert np.all(rep.corrected_relative_deviation < rep.relative_deviation)


def test_maximizer_converges_on_random_instances(rng):
    from qbridge import random as R
    for _ in range(5):
        p = R.probability(4, rng).reshape(2, 2)
        at = np.array([rng.integers(1, 300), 0]); at[1] = 300 - at[0]
        bt = np.array([rng.integers(1, 300), 0]); bt[1] = 300 - bt[0]
        at, bt = at / 300, bt / 300
        q = solve_coupling(p, at, bt).coupling
        table, _ = exhaustive_most_likely_coupling(p, at, bt, 300)
        assert kl(table / 300, q) <= 5e-3


def test_enumeration_limits():
    with pytest.raises(TooLarge):
        exhaustive_most_likely_coupling(np.full((4, 4), 1 / 16), [0.25] * 4, [0.25] * 4, 4)
    with pytest.raises(TooLarge):
        transportation_tables([300, 300, 300], [300, 300, 300], max_tables=1000)
    with pytest.raises(InfeasibleMarginals):
        exhaustive_most_likely_coupling(SANOV_P, [0.6, 0.4], [0.5, 0.5], 7)
    with pytest.raises(InfeasibleMarginals):
        transportation_tables([1, 2], [2, 2])


def test_sampling_spec_uses_prior(worked):
    counts = sample_experiment(damping_spec(), 10, seed=0)
    assert counts.counts.shape == (2, 2)
