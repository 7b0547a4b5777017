import numpy as np
import pytest

from hybridauction.indices import (
    BiddingGameState,
    IndexOptions,
    bidding_index,
    check_discount,
    gittins_index,
    gittins_index_fn,
    horizon_for,
)
from hybridauction.priors import Beta, Point, mean

from oracles import gittins_by_tree

# gittins_by_tree(a, b, gamma, depth=20, tol=1e-12), frozen
TREE_VALUES = {
    (1, 1, 0.5): 0.5590187431423601,
    (2, 3, 0.7): 0.4545391280211107,
    (1, 5, 0.3): 0.17460352533612414,
}


def test_gamma_zero_is_mean():
    rng = np.random.default_rng(0)
    for a, b in rng.uniform(0.2, 50, size=(100, 2)):
        prior = Beta(float(a), float(b))
        assert abs(gittins_index(prior, 0.0) - mean(prior)) <= 1e-12


def test_point_prior_index():
    assert gittins_index(Point(0.3), 0.9) == 0.3


@pytest.mark.parametrize("gamma", [-0.1, 1.0, 1.5])
def test_discount_range(gamma):
    with pytest.raises(ValueError):
        gittins_index(Beta(1, 1), gamma)
    with pytest.raises(ValueError):
        check_discount(gamma)


def test_nondecreasing_in_gamma():
    rng = np.random.default_rng(1)
    gammas = np.round(np.arange(0, 1.0, 0.1), 1)
    for a, b in rng.uniform(0.5, 20, size=(20, 2)):
        prior = Beta(float(a), float(b))
        values = [gittins_index(prior, float(g)) for g in gammas]
        assert values[0] == pytest.approx(mean(prior), abs=1e-12)
        assert all(y >= x - 2e-9 for x, y in zip(values, values[1:]))
        assert all(v >= mean(prior) - 1e-12 for v in values)


@pytest.mark.parametrize("a,b", [(1, 1), (2, 3), (1, 5), (3, 1)])
def test_sharpening_lowers_index(a, b):
    values = [gittins_index(Beta(k * a, k * b), 0.5) for k in (1, 2, 4, 8)]
    assert all(y <= x + 2e-9 for x, y in zip(values, values[1:]))


@pytest.mark.parametrize("a,b", [(1, 1), (2, 3), (1, 5)])
@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.7])
def test_matches_tree_oracle(a, b, gamma):
    oracle = gittins_by_tree(a, b, gamma, depth=20)
    assert gittins_index(Beta(a, b), gamma) == pytest.approx(oracle, abs=1e-4)
    # on the oracle's own truncation the lattice DP agrees to bisection accuracy
    same_depth = gittins_index(Beta(a, b), gamma, IndexOptions(horizon=20, tolerance=1e-11))
    assert same_depth == pytest.approx(oracle, abs=1e-8)


@pytest.mark.parametrize("key", sorted(TREE_VALUES))
def test_frozen_tree_values(key):
    a, b, gamma = key
    assert gittins_index(Beta(a, b), gamma) == pytest.approx(TREE_VALUES[key], abs=1e-4)
    assert gittins_index(Beta(a, b), gamma, IndexOptions(horizon=20)) == pytest.approx(TREE_VALUES[key], abs=1e-8)


def test_truncation_error_below_tolerance():
    for gamma in (0.5, 0.8, 0.9):
        prior = Beta(2, 3)
        h = horizon_for(gamma)
        base = gittins_index(prior, gamma, IndexOptions(horizon=h))
        longer = gittins_index(prior, gamma, IndexOptions(horizon=h + 10))
        assert abs(base - longer) < 2e-9


def test_horizon_rule():
    opts = IndexOptions(tolerance=1e-9)
    h = horizon_for(0.5, opts)
    assert 0.5**h <= 1e-9 * 0.5 < 0.5 ** (h - 1)
    assert horizon_for(0.999, opts) == 400
    assert horizon_for(0.3, IndexOptions(horizon=7)) == 7


def test_index_fn_gamma_zero_is_mean():
    assert gittins_index_fn(0.0) is mean
    fn = gittins_index_fn(0.5)
    assert fn(Beta(1, 1)) == gittins_index(Beta(1, 1), 0.5)


# ------------------------------------------------------------ bidding index

def _random_beta(rng, lo=0.5, hi=20):
    a, b = rng.uniform(lo, hi, size=2)
    return Beta(float(a), float(b))


def test_myopic_bidding_index_is_truthful():
    rng = np.random.default_rng(2)
    for _ in range(10):
        p, q = _random_beta(rng), _random_beta(rng)
        v = float(rng.uniform(0.1, 3))
        res = bidding_index(v, BiddingGameState(p, q), 0.0)
        assert res.bid_index == pytest.approx(v * mean(p), abs=1e-6)
        assert res.bid_index == res.threshold_charge * min(1.0, mean(p) / mean(q))


def test_shared_prior_gives_gittins():
    rng = np.random.default_rng(3)
    opts = IndexOptions(tolerance=1e-9)
    for gamma in (0.3, 0.6):
        for _ in range(5):
            prior = _random_beta(rng)
            v = float(rng.uniform(0.5, 2))
            res = bidding_index(v, BiddingGameState(prior, prior), gamma, mean, opts)
            g = gittins_index(prior, gamma, opts)
            assert abs(res.threshold_charge - v * g) <= 2 * opts.tolerance * max(1.0, v) + 1e-12


def _schedule_fn(q0_prior: Beta, schedule):
    """Index function that depends only on how many impressions the auctioneer has seen."""
    base = q0_prior.alpha + q0_prior.beta

    def fn(prior):
        t = int(round(prior.alpha + prior.beta - base))
        return schedule(t)

    return fn


def test_point_prior_with_low_auctioneer_estimates():
    p, v = 0.4, 1.7
    q = Beta(1, 3)
    fn = _schedule_fn(q, lambda t: 0.4 * (0.5 + 0.5 * 0.9**t))  # q_t <= p
    res = bidding_index(v, BiddingGameState(Point(p), q), 0.8, fn)
    assert res.bid_index == pytest.approx(v * p, abs=1e-6)


def test_point_prior_with_decreasing_high_estimates():
    p, v = 0.3, 1.2
    q = Beta(1, 3)
    fn = _schedule_fn(q, lambda t: p + 0.4 * 0.8**t)  # q_t >= p, nonincreasing
    res = bidding_index(v, BiddingGameState(Point(p), q), 0.8, fn)
    assert res.bid_index == pytest.approx(v * p, abs=1e-6)
    assert res.threshold_charge == pytest.approx(v * (p + 0.4), abs=1e-6)


def test_zero_index_rejected():
    q = Beta(1, 3)
    fn = _schedule_fn(q, lambda t: 0.0 if t == 2 else 0.3)
    with pytest.raises(ValueError, match="zero"):
        bidding_index(1.0, BiddingGameState(Point(0.3), q), 0.5, fn)


def test_zero_advertiser_mean_rejected():
    with pytest.raises(ValueError):
        bidding_index(1.0, BiddingGameState(Point(0.0), Beta(1, 1)), 0.5)


def test_bid_index_nonnegative_and_consistent():
    rng = np.random.default_rng(4)
    for _ in range(10):
        p, q = _random_beta(rng), _random_beta(rng)
        res = bidding_index(1.0, BiddingGameState(p, q), 0.5)
        assert res.bid_index >= 0
        assert res.bid_index == res.threshold_charge * min(1.0, mean(p) / mean(q))
