"""Bidding strategies for the hybrid auction.

Four advertiser archetypes are covered:

* truthful myopic bidders, who bid ``(v*p, v)``;
* myopic bidders with a risk attitude, who bid ``(m*, v)`` where ``m*`` is
  the largest per-impression price with nonnegative expected utility;
* semi-myopic bidders, who bid ``(B, B/p)`` from the bidding index;
* certain advertisers running a two-phase explore/exploit plan that lifts
  the auctioneer's estimate at no expected cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import special

from . import indices
from .auction import Bid
from .indices import BiddingGameState, IndexFn, IndexOptions
from .priors import Beta, Point, Prior, log_density, mean

QUADRATURE_NODES = 128


# ---------------------------------------------------------------- utilities

@dataclass(frozen=True)
class RiskNeutral:
    def __call__(self, x):
        return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ExponentialAverse:
    """Concave utility ``1 - exp(-lam*x)``."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("risk parameter lambda must be positive")

    def __call__(self, x):
        return -np.expm1(-self.lam * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ExponentialSeeking:
    """Convex utility ``exp(lam*x) - 1``."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("risk parameter lambda must be positive")

    def __call__(self, x):
        return np.expm1(self.lam * np.asarray(x, dtype=float))


UtilitySpec = Union[RiskNeutral, ExponentialAverse, ExponentialSeeking]


def make_utility(kind: str, lam: float | None = None) -> UtilitySpec:
    kind = kind.lower()
    if kind in ("neutral", "risk_neutral"):
        return RiskNeutral()
    if lam is None:
        raise ValueError(f"utility {kind!r} needs a lambda")
    if kind in ("averse", "exponential_averse"):
        return ExponentialAverse(lam)
    if kind in ("seeking", "exponential_seeking"):
        return ExponentialSeeking(lam)
    raise ValueError(f"unknown utility {kind!r}; expected neutral, averse or seeking")


# --------------------------------------------------------------- quadrature

@lru_cache(maxsize=4096)
def _beta_nodes(alpha: float, beta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Jacobi absorbs x^(a-1) (1-x)^(b-1) into the weights, so smooth
    # integrands are handled exactly even with endpoint singular densities.
    with np.errstate(over="ignore", invalid="ignore"):
        t, w = special.roots_jacobi(n, beta - 1.0, alpha - 1.0)
    if np.all(np.isfinite(w)) and w.sum() > 0:
        return (t + 1.0) / 2.0, w / w.sum()
    # very sharp priors overflow the Jacobi normaliser; put Legendre nodes on
    # the +-40 sd window where the mass is and weight them by the density
    prior = Beta(alpha, beta)
    mu = alpha / (alpha + beta)
    sd = np.sqrt(alpha * beta / ((alpha + beta) ** 2 * (alpha + beta + 1.0)))
    lo, hi = max(0.0, mu - 40.0 * sd), min(1.0, mu + 40.0 * sd)
    t, w = np.polynomial.legendre.leggauss(n)
    x = lo + (hi - lo) * (t + 1.0) / 2.0
    logw = np.log(w) + log_density(prior, x)
    w = np.exp(logw - logw.max())
    return x, w / w.sum()


def expectation(prior: Prior, fn: Callable[[np.ndarray], np.ndarray], nodes: int = QUADRATURE_NODES) -> float:
    """E[fn(P)] for P distributed as ``prior``."""
    if isinstance(prior, Point):
        return float(fn(np.array([prior.p]))[0])
    x, w = _beta_nodes(float(prior.alpha), float(prior.beta), nodes)
    return float(np.dot(w, fn(x)))


# ------------------------------------------------------------------- bids

def truthful_bid(v: float, p: float) -> Bid:
    return Bid(v * p, v)


def risk_bid(v: float, prior: Prior, u: UtilitySpec, tol: float = 1e-12, nodes: int = QUADRATURE_NODES) -> Bid:
    """Bid ``(m*, v)`` with ``m* = max{y : E[U(v*P - y)] >= 0}``.

    ``E[U(v*P - y)]`` decreases in y, is nonnegative at y = 0 and
    nonpositive at y = v, so m* is bracketed by [0, v].
    """
    if v < 0:
        raise ValueError("valuation must be nonnegative")
    if isinstance(prior, Point):
        return Bid(v * prior.p, v)
    lo, hi = 0.0, v
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if expectation(prior, lambda x: u(v * x - mid), nodes) >= 0.0:
            lo = mid
        else:
            hi = mid
    return Bid(0.5 * (lo + hi), v)


def pricing_utilities(v: float, prior: Prior, r: float, u: UtilitySpec, nodes: int = QUADRATURE_NODES) -> tuple[float, float]:
    """Expected utility of winning against opposing effective bid ``r``.

    Returns ``(E[U(v*P - r)], E[U(v*P - r*P/p)])``: the per-impression and the
    per-click charge, with ``p = E[P]`` the (shared) auctioneer estimate.
    """
    p = mean(prior)
    per_impression = expectation(prior, lambda x: u(v * x - r), nodes)
    per_click = expectation(prior, lambda x: u(v * x - r * x / p), nodes)
    return per_impression, per_click


def myopic_profit(m, c, v, p, q, r_star, win_ties: bool = True):
    """Expected one-shot profit of bid (m, c) for a risk-neutral advertiser.

    ``p`` is the advertiser's expected CTR, ``q`` the auctioneer index and
    ``r_star`` the best opposing effective bid. Broadcasts over arrays.
    """
    m, c, v, p, q, r_star = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (m, c, v, p, q, r_star)))
    r = np.maximum(m, c * q)
    wins = r >= r_star if win_ties else r > r_star
    with np.errstate(divide="ignore", invalid="ignore"):
        pay = np.where(m > c * q, r_star, r_star * p / q)
    return np.where(wins, v * p - pay, 0.0)


def bidding_index_bid(
    state: "AdvertiserState",
    gamma_b: float,
    auctioneer_index_fn: IndexFn = mean,
    opts: IndexOptions = indices.DEFAULT_OPTIONS,
) -> Bid:
    p = mean(state.advertiser_prior)
    if p <= 0.0:
        raise ValueError("advertiser prior has zero mean; the per-click component B/p is undefined")
    result = _bidding_index_cached(
        state.v, BiddingGameState(state.advertiser_prior, state.auctioneer_prior), gamma_b, auctioneer_index_fn, opts
    )
    return Bid(result.bid_index, result.bid_index / p)


@lru_cache(maxsize=16384)
def _bidding_index_cached(v, game_state, gamma_b, index_fn, opts):
    return indices.bidding_index(v, game_state, gamma_b, index_fn, opts)


def explore_target(state: "AdvertiserState") -> float:
    """CTR level ``p*(1 - eps)`` the explore phase pushes the auctioneer to."""
    if state.true_ctr is None or state.epsilon is None:
        raise ValueError("the explore strategy needs a true CTR and an epsilon")
    return state.true_ctr * (1.0 - state.epsilon)


def explore_bid(state: "AdvertiserState", current_auctioneer_posterior: Prior) -> Bid:
    """Per-impression bid at the target while the auctioneer's mean is below it, pure per-click afterwards."""
    target = explore_target(state)
    if mean(current_auctioneer_posterior) < target:
        return Bid(state.v * target, state.v)
    return Bid(0.0, state.v)


# ---------------------------------------------------- advertiser + strategies

@dataclass(frozen=True)
class MarketContext:
    """What a strategy may read from the auction environment."""

    index_fn: IndexFn = mean
    gamma_b: float = 0.0
    opts: IndexOptions = indices.DEFAULT_OPTIONS


@dataclass
class AdvertiserState:
    v: float
    advertiser_prior: Prior
    auctioneer_prior: Prior
    true_ctr: float | None = None
    epsilon: float | None = None
    strategy: "Strategy | None" = None

    def __post_init__(self):
        if self.v < 0:
            raise ValueError("valuation must be nonnegative")
        if self.true_ctr is not None and not (0.0 <= self.true_ctr <= 1.0):
            raise ValueError("true CTR must lie in [0, 1]")
        if self.epsilon is not None and not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")

    def bid(self, ctx: MarketContext) -> Bid:
        return self.strategy.bid(self, ctx)


class Truthful:
    name = "truthful"

    def bid(self, adv: AdvertiserState, ctx: MarketContext) -> Bid:
        return truthful_bid(adv.v, mean(adv.advertiser_prior))


@dataclass
class RiskAware:
    utility: UtilitySpec
    name: str = field(default="risk", init=False)

    def bid(self, adv: AdvertiserState, ctx: MarketContext) -> Bid:
        return risk_bid(adv.v, adv.advertiser_prior, self.utility, tol=1e-10)


class BiddingIndexStrategy:
    name = "bidding_index"

    def bid(self, adv: AdvertiserState, ctx: MarketContext) -> Bid:
        return bidding_index_bid(adv, ctx.gamma_b, ctx.index_fn, ctx.opts)


@dataclass
class Explore:
    """Two-phase plan; once exploiting, never explores again."""

    exploring: bool = True
    name: str = field(default="explore", init=False)

    def bid(self, adv: AdvertiserState, ctx: MarketContext) -> Bid:
        if self.exploring and mean(adv.auctioneer_prior) >= explore_target(adv):
            self.exploring = False
        if not self.exploring:
            return Bid(0.0, adv.v)
        return explore_bid(adv, adv.auctioneer_prior)


Strategy = Union[Truthful, RiskAware, BiddingIndexStrategy, Explore]
STRATEGY_NAMES = ("truthful", "risk", "bidding_index", "explore")


def make_strategy(name: str, utility: UtilitySpec | None = None) -> Strategy:
    if name == "truthful":
        return Truthful()
    if name == "risk":
        if utility is None:
            raise ValueError("the risk strategy needs a utility")
        return RiskAware(utility)
    if name == "bidding_index":
        return BiddingIndexStrategy()
    if name == "explore":
        return Explore()
    raise ValueError(f"unknown strategy {name!r}; expected one of {', '.join(STRATEGY_NAMES)}")


# ------------------------------------------------------------ risk sweep

@dataclass(frozen=True)
class RiskCheck:
    utility: UtilitySpec
    prior: Beta
    v: float
    r: float
    per_impression_utility: float
    per_click_utility: float
    m_star: float

    @property
    def concave(self) -> bool:
        return isinstance(self.utility, ExponentialAverse)

    @property
    def holds(self) -> bool:
        """Risk-averse: per-click preferred and m* <= v*E[P]; risk-seeking: both reversed."""
        slack = 1e-12
        vp = self.v * mean(self.prior)
        if self.concave:
            return self.per_click_utility >= self.per_impression_utility - slack and self.m_star <= vp + slack
        return self.per_impression_utility >= self.per_click_utility - slack and self.m_star >= vp - slack


def risk_dominance_sweep(
    instances: int = 50,
    lambdas: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0),
    seed: int = 0,
) -> list[RiskCheck]:
    """Compare per-click and per-impression pricing under exponential utilities.

    Each random instance draws a Beta prior with parameters in [1, 20], a
    valuation in [0.5, 2] and an opposing effective bid r in [0, v*E[P]].
    """
    rng = np.random.default_rng(seed)
    checks = []
    for _ in range(instances):
        prior = Beta(float(rng.uniform(1, 20)), float(rng.uniform(1, 20)))
        v = float(rng.uniform(0.5, 2.0))
        r = float(rng.uniform(0.0, v * mean(prior)))
        for lam in lambdas:
            for u in (ExponentialAverse(lam), ExponentialSeeking(lam)):
                x_util, y_util = pricing_utilities(v, prior, r, u)
                m_star = risk_bid(v, prior, u).m
                checks.append(RiskCheck(u, prior, v, r, x_util, y_util, m_star))
    return checks
