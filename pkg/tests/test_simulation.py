import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from switchkit import (
    GridSpec,
    InvalidArgumentError,
    estimate_covariance,
    estimate_expected_value,
    evaluate_stationary,
    make_rng,
    make_tabulated,
    path_rng,
    simulate_stationary,
    simulate_switch,
)

from conftest import grid_fn


# -- simulate_switch -------------------------------------------------------------


def test_starts_at_plus_one(exp1):
    traj = simulate_switch(exp1, 5.0, seed=1)
    assert traj.value(1e-12) == 1
    assert traj.initial_sign == 1


def test_sign_flips_between_first_epochs(exp1):
    traj = simulate_switch(exp1, 10.0, seed=4)
    mid = 0.5 * (traj.epochs[0] + traj.epochs[1])
    assert traj.value(mid) == -1


def test_epoch_count_matches_poisson_rate(exp1):
    # unit-rate renewals on [0, 5]: the count is Poisson(5)
    n = 10_000
    counts = np.array(
        [simulate_switch(exp1, 5.0, seed=path_rng(11, i)).count(5.0) for i in range(n)]
    )
    se = math.sqrt(5.0 / n)
    assert abs(counts.mean() - 5.0) < 4 * se


def test_bitwise_determinism(exp1):
    a = simulate_switch(exp1, 20.0, seed=99)
    b = simulate_switch(exp1, 20.0, seed=99)
    np.testing.assert_array_equal(a.epochs, b.epochs)


def test_horizon_validation(exp1):
    with pytest.raises(InvalidArgumentError):
        simulate_switch(exp1, 0.0, seed=1)


def test_inter_epoch_gaps_follow_switching_law(exp1):
    # two-sample KS between simulated gaps and direct draws
    gaps = []
    for i in range(40):
        ep = simulate_switch(exp1, 300.0, seed=path_rng(5, i)).epochs
        gaps.append(np.diff(ep))
    gaps = np.concatenate(gaps)[:10_000]
    direct = exp1.sample(make_rng(6), size=10_000)
    assert ks_2samp(gaps, direct).pvalue > 1e-3


# -- stationary construction --------------------------------------------------------


def test_stationary_value_at_origin_is_minus_delta(exp1):
    for i in range(25):
        init, fwd, bwd = simulate_stationary(exp1, 5.0, seed=path_rng(2, i))
        assert evaluate_stationary(init, fwd, bwd, 0.0) == -init.delta


def test_stationary_mean_is_zero(exp1):
    n = 20_000
    tgrid = np.array([0.0, 1.0, 2.0])
    acc = np.zeros(3)
    for i in range(n):
        init, fwd, bwd = simulate_stationary(exp1, 2.5, seed=path_rng(3, i))
        acc += evaluate_stationary(init, fwd, bwd, tgrid)
    mean = acc / n
    # each Y(t) is +/-1, so the standard error is at most 1/sqrt(n)
    assert np.all(np.abs(mean) < 4 / math.sqrt(n))


def test_forward_delay_density(exp1):
    # the forward delay of a unit-rate stationary process has density
    # (1 - F(t))/mu = e^{-t}
    n = 30_000
    draws = np.empty(n)
    for i in range(n):
        init, _, _ = simulate_stationary(exp1, 1.0, seed=path_rng(8, i))
        draws[i] = init.a
    xs = np.linspace(0.0, 3.0, 200)
    emp = np.searchsorted(np.sort(draws), xs, side="right") / n
    want = 1.0 - np.exp(-xs)
    assert np.max(np.abs(emp - want)) < 0.02


def test_stationary_negative_time_branch(exp1):
    init, fwd, bwd = simulate_stationary(exp1, 5.0, seed=17)
    t = -init.b - 1e-9
    assert evaluate_stationary(init, fwd, bwd, t) in (-1, 1)
    inside = evaluate_stationary(init, fwd, bwd, -init.b / 2 if init.b > 0 else 0.0)
    assert inside == -init.delta


def test_stationary_size_biased_requires_density(compound2):
    with pytest.raises(InvalidArgumentError):
        simulate_stationary(compound2, 5.0, seed=1)


def test_tabulated_size_biased_sampler_mean():
    # for the tabulated unit-rate exponential the straddling interval is a
    # shape-2 gamma with mean 2
    tab = make_tabulated(grid_fn(lambda t: np.exp(-t), 40.0, 2e-3))
    drails = tab.sample_size_biased(make_rng(21), size=20_000)
    se = drails.std(ddof=1) / math.sqrt(len(drails))
    assert abs(drails.mean() - 2.0) < 4 * se


# -- estimators -----------------------------------------------------------------------


def test_estimate_expected_value_exponential(exp1):
    grid = GridSpec.from_t_end(4.0, 0.5)
    mean, stderr = estimate_expected_value(exp1, grid, 20_000, seed=12)
    t = grid.times()
    want = np.exp(-2 * t)
    z = np.abs(mean.values - want) / np.where(stderr.values > 0, stderr.values, 1.0)
    assert np.max(z[1:]) < 4.0
    assert mean.values[0] == 1.0 and stderr.values[0] == 0.0


def test_estimate_expected_value_limits(exp1):
    # near the origin the estimate sits at 1; at t = 20 * mean the start-up
    # bias has died out and it sits at 0
    grid = GridSpec(h=1e-3, n=2)
    mean, stderr = estimate_expected_value(exp1, grid, 5_000, seed=13)
    assert abs(mean.values[1] - 1.0) < 4 * max(stderr.values[1], 1e-12) + 1e-12
    grid = GridSpec(h=20.0, n=2)
    mean, stderr = estimate_expected_value(exp1, grid, 5_000, seed=13)
    assert abs(mean.values[1]) < 4 * stderr.values[1]


def test_estimate_covariance_exponential(exp1):
    grid = GridSpec.from_t_end(2.0, 0.5)
    mean, stderr = estimate_covariance(exp1, grid, 20_000, seed=14)
    assert mean.values[0] == 1.0
    want = math.exp(-2.0)
    i = 2  # t = 1
    assert abs(mean.values[i] - want) < 4 * stderr.values[i]


def test_estimate_covariance_gamma(gamma22):
    grid = GridSpec.from_t_end(2.0, 1.0)
    mean, stderr = estimate_covariance(gamma22, grid, 20_000, seed=15)
    want = 0.19876611034641298  # cos(1) e^{-1}
    assert abs(mean.values[2] - want) < 4 * stderr.values[2]


def test_estimators_are_scheduling_independent(exp1):
    grid = GridSpec.from_t_end(2.0, 0.5)
    a, _ = estimate_expected_value(exp1, grid, 600, seed=5, workers=1)
    b, _ = estimate_expected_value(exp1, grid, 600, seed=5, workers=3)
    np.testing.assert_array_equal(a.values, b.values)
    c, _ = estimate_covariance(exp1, grid, 600, seed=5, workers=1)
    d, _ = estimate_covariance(exp1, grid, 600, seed=5, workers=4)
    np.testing.assert_array_equal(c.values, d.values)


def test_estimators_need_enough_paths(exp1):
    with pytest.raises(InvalidArgumentError):
        estimate_expected_value(exp1, GridSpec.from_t_end(1.0, 0.5), 50, seed=0)


def test_estimated_variance_is_flat_in_time(exp1):
    # stationarity witness: Var Y(t) = 1 - C-ish mean^2 stays near 1
    grid = GridSpec.from_t_end(3.0, 1.0)
    n = 20_000
    acc = np.zeros(grid.n)
    acc2 = np.zeros(grid.n)
    t = grid.times()
    for i in range(n):
        init, fwd, bwd = simulate_stationary(exp1, 3.5, seed=path_rng(31, i))
        y = evaluate_stationary(init, fwd, bwd, t)
        acc += y
        acc2 += y * y
    var = acc2 / n - (acc / n) ** 2
    assert np.all(np.abs(var - 1.0) < 0.02)
