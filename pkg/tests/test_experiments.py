import math

import numpy as np
import pytest

from hybridauction.sim.experiments import (
    experiment_explore,
    experiment_theorem2,
    experiment_typical_case,
    lemma3_ratio,
)

from oracles import expected_second_order_statistic, lemma3_closed_form, lemma3_monte_carlo

BOUND = 1.0 - 1.0 / math.e
GRID = [1, 1.5, 2, 4, 8, 32, 1000]


@pytest.mark.parametrize("a", GRID)
@pytest.mark.parametrize("b", GRID)
def test_lemma3_matches_closed_form(a, b):
    value = lemma3_ratio(a, b)
    assert value == pytest.approx(lemma3_closed_form(a, b), abs=1e-9)
    assert value >= BOUND - 1e-6


def test_lemma3_worst_case_and_uniform():
    assert abs(lemma3_ratio(1, 1e4) - BOUND) < 1e-3
    assert lemma3_ratio(1, 1) == pytest.approx(0.75, abs=1e-12)


@pytest.mark.slow
def test_lemma3_monte_carlo_cross_check():
    mc, se = lemma3_monte_carlo(1, 1, 1_000_000, seed=0)
    assert abs(lemma3_ratio(1, 1) - mc) < 4 * se


def test_lemma3_concentrating_prior_tends_to_one():
    values = [lemma3_ratio(a, 2.0) for a in (2.0, 20.0, 200.0, 2000.0)]
    assert all(y > x for x, y in zip(values, values[1:]))
    assert values[-1] > 0.98


def test_revenue_ratio_small_run():
    res = experiment_theorem2(1, 1, trials=4000, seed=1)
    assert res.lower_bound == pytest.approx(0.75)
    assert res.ratio.mean >= res.lower_bound - 2 * res.ratio.stderr
    assert res.hybrid.mean >= res.per_click.mean * BOUND


def test_revenue_ratio_gittins_auctioneer():
    res = experiment_theorem2(2, 5, gamma_a=0.5, trials=2000, seed=1)
    assert res.ratio.mean >= BOUND - 2 * res.ratio.stderr


def test_revenue_ratio_validation():
    with pytest.raises(ValueError):
        experiment_theorem2(1, 1, n_advertisers=1, trials=10)


def test_typical_case_small_k_against_order_statistic_oracle():
    res = experiment_typical_case(2, trials=3000, seed=4)
    oracle = expected_second_order_statistic(2, 16)
    assert abs(res.second_ctr.mean - oracle) < 4 * res.second_ctr.stderr
    assert res.hybrid.mean >= res.second_ctr.mean
    assert res.gain.mean > 1


def test_typical_case_point_prior_has_no_gain():
    res = experiment_typical_case(2, trials=20, point_prior=True)
    assert res.gain.mean == pytest.approx(1.0, abs=1e-12)


def test_typical_case_validation():
    with pytest.raises(ValueError):
        experiment_typical_case(0, trials=1)


def test_explore_small_run():
    res = experiment_explore(0.5, 0.1, 1, 20, trials=300, seed=2)
    assert res.terminated == 300
    assert res.worst_case_negative and res.worst_case_max < 0
    assert res.hybrid_loss_max <= 0
    assert res.per_click_loss.mean > 0


def test_explore_degenerate_start():
    res = experiment_explore(0.5, 0.1, 10, 2, trials=20)
    assert res.length.mean == 0 and res.hybrid_loss_max == 0 and res.per_click_loss.mean == 0


def test_explore_competitor_limit():
    with pytest.raises(ValueError):
        experiment_explore(0.5, 0.1, 1, 20, r_star=0.5, trials=1)


def test_explore_path_deterministic():
    a = experiment_explore(0.5, 0.1, 1, 20, trials=50, seed=7)
    b = experiment_explore(0.5, 0.1, 1, 20, trials=50, seed=7)
    assert a == b


def test_rows_are_finite_numbers():
    for res in (
        experiment_theorem2(1, 3, trials=100),
        experiment_typical_case(1, trials=100),
        experiment_explore(0.5, 0.1, 1, 20, trials=50),
    ):
        for name, value, stderr in res.rows():
            assert isinstance(name, str)
            assert np.isfinite(value)
