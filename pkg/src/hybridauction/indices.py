"""Gittins index of a Beta prior and the two-prior bidding index.

Both indices are "largest per-step charge such that an optimal stop-anytime
player still wants to play the first step". They are computed the same way:
a finite-horizon value recursion on the (impressions, clicks) lattice,
wrapped in a bisection on the charge. Values beyond the horizon are taken as
zero, i.e. the player is forced to retire there, which can only lower the
value; the default horizon keeps that tail below the bisection tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .priors import Beta, Point, Prior, mean, update

IndexFn = Callable[[Prior], float]


@dataclass(frozen=True)
class IndexOptions:
    """Numerical knobs shared by both index computations.

    ``horizon=None`` picks the smallest depth H with
    ``gamma**H * payoff_scale <= tolerance * (1 - gamma)``, capped at
    ``max_horizon``.
    """

    tolerance: float = 1e-9
    horizon: int | None = None
    bracket_growth: float = 2.0
    max_horizon: int = 400

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        if not self.bracket_growth > 1:
            raise ValueError("bracket_growth must exceed 1")


DEFAULT_OPTIONS = IndexOptions()


def check_discount(gamma: float, name: str = "gamma") -> float:
    gamma = float(gamma)
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"discount factor {name} must lie in [0, 1), got {gamma!r}")
    return gamma


def horizon_for(gamma: float, opts: IndexOptions = DEFAULT_OPTIONS, payoff_scale: float = 1.0) -> int:
    if opts.horizon is not None:
        return opts.horizon
    if gamma == 0.0:
        return 1
    target = opts.tolerance * (1.0 - gamma) / max(payoff_scale, 1e-300)
    h = math.ceil(math.log(target) / math.log(gamma))
    return max(1, min(h, opts.max_horizon))


def _bisect_largest(value_at, lo: float, hi: float, tol: float) -> float:
    # value_at is nonincreasing; value_at(lo) >= 0 > value_at(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if value_at(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- Gittins

def _posterior_means(prior: Beta, horizon: int) -> list[np.ndarray]:
    a, b = prior.alpha, prior.beta
    return [(a + np.arange(d + 1)) / (a + b + d) for d in range(horizon)]


def _toss_value(means: list[np.ndarray], charge: float, gamma: float) -> float:
    """Value of tossing once at the root and then playing optimally."""
    nxt = np.zeros(len(means) + 1)
    for d in range(len(means) - 1, -1, -1):
        mu = means[d]
        cont = mu - charge + gamma * (mu * nxt[1:] + (1.0 - mu) * nxt[:-1])
        if d == 0:
            return float(cont[0])
        nxt = np.maximum(cont, 0.0)
    raise AssertionError("empty lattice")


@lru_cache(maxsize=65536)
def _gittins_cached(alpha: float, beta: float, gamma: float, opts: IndexOptions) -> float:
    prior = Beta(alpha, beta)
    mu = mean(prior)
    if gamma == 0.0:
        return mu
    means = _posterior_means(prior, horizon_for(gamma, opts))
    return _bisect_largest(lambda g: _toss_value(means, g, gamma), mu, 1.0, opts.tolerance)


def gittins_index(prior: Prior, gamma: float, opts: IndexOptions = DEFAULT_OPTIONS) -> float:
    """Gittins index of a Bernoulli arm, expressed as a per-toss charge.

    Returns the largest charge G at which an optimal retire-anytime tossing
    policy still tosses at least once. At ``gamma == 0`` this is exactly the
    prior mean; a point prior's index is its point.
    """
    gamma = check_discount(gamma)
    if isinstance(prior, Point):
        return prior.p
    return _gittins_cached(float(prior.alpha), float(prior.beta), gamma, opts)


def gittins_index_fn(gamma: float, opts: IndexOptions = DEFAULT_OPTIONS) -> IndexFn:
    """Auctioneer index function ``Q -> gittins_index(Q, gamma)``."""
    gamma = check_discount(gamma, "gamma_a")
    if gamma == 0.0:
        return mean

    def index(prior: Prior) -> float:
        return gittins_index(prior, gamma, opts)

    index.__name__ = f"gittins_{gamma!r}"
    return index


# ---------------------------------------------------------- bidding index

@dataclass(frozen=True)
class BiddingGameState:
    """Advertiser belief P and auctioneer belief Q at the current step.

    Both are advanced on the same click history inside the bidding game.
    """

    advertiser_prior: Prior
    auctioneer_prior: Prior


@dataclass(frozen=True)
class BiddingIndexResult:
    threshold_charge: float  # largest game charge with nonnegative value
    bid_index: float  # threshold_charge * min(1, p0 / q0)


def _belief_means(prior: Prior, horizon: int) -> list[np.ndarray]:
    if isinstance(prior, Point):
        return [np.full(d + 1, prior.p) for d in range(horizon)]
    return _posterior_means(prior, horizon)


def _index_lattice(index_fn: IndexFn, prior: Prior, horizon: int) -> list[np.ndarray]:
    if isinstance(prior, Point):
        q = float(index_fn(prior))
        return [np.full(d + 1, q) for d in range(horizon)]
    if index_fn is mean:
        return _posterior_means(prior, horizon)
    return [
        np.array([index_fn(update(prior, k, d)) for k in range(d + 1)], dtype=float)
        for d in range(horizon)
    ]


def _game_value(ps, ratios, v: float, charge: float, gamma: float) -> float:
    nxt = np.zeros(len(ps) + 1)
    for d in range(len(ps) - 1, -1, -1):
        p = ps[d]
        cont = v * p - charge * ratios[d] + gamma * (p * nxt[1:] + (1.0 - p) * nxt[:-1])
        if d == 0:
            return float(cont[0])
        nxt = np.maximum(cont, 0.0)
    raise AssertionError("empty lattice")


def bidding_index(
    v: float,
    state: BiddingGameState,
    gamma_b: float,
    auctioneer_index_fn: IndexFn = mean,
    opts: IndexOptions = DEFAULT_OPTIONS,
) -> BiddingIndexResult:
    """Threshold charge W and bidding index B of the advertiser's game.

    At each step the advertiser may stop, or play: it gains ``v * p_t`` and
    pays ``W * min(1, p_t / q_t)`` in expectation, where ``p_t`` is the mean
    of its own belief and ``q_t`` the auctioneer's index. Click transitions
    follow the advertiser's belief. W is the largest charge for which playing
    the first step is worthwhile.

    Raises ValueError when the advertiser's belief has zero mean (W would be
    unbounded) or when the auctioneer's index is zero at a reachable state.
    """
    gamma_b = check_discount(gamma_b, "gamma_b")
    if v < 0:
        raise ValueError("valuation must be nonnegative")
    p0 = mean(state.advertiser_prior)
    if p0 <= 0.0:
        raise ValueError("advertiser prior has zero mean; the bidding index is undefined")

    horizon = horizon_for(gamma_b, opts, payoff_scale=max(v, 1.0))
    ps = _belief_means(state.advertiser_prior, horizon)
    qs = _index_lattice(auctioneer_index_fn, state.auctioneer_prior, horizon)
    for d, q in enumerate(qs):
        if np.any(q <= 0.0):
            raise ValueError(
                f"auctioneer index is zero at a reachable state (depth {d}); "
                "per-click payments are undefined"
            )
    ratios = [np.minimum(1.0, p / q) for p, q in zip(ps, qs)]

    def value_at(w: float) -> float:
        return _game_value(ps, ratios, v, w, gamma_b)

    lo, hi = 0.0, max(v, opts.tolerance)
    while value_at(hi) >= 0.0:
        lo, hi = hi, hi * opts.bracket_growth
    w = _bisect_largest(value_at, lo, hi, opts.tolerance)
    return BiddingIndexResult(threshold_charge=w, bid_index=w * float(ratios[0][0]))
