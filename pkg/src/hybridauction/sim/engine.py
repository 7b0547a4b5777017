"""Repeated hybrid auctions with Bayesian learning, run as Monte Carlo trials."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..auction import (
    AuctionOutcome,
    Bid,
    SlotLayout,
    run_multi_slot,
    run_per_click_baseline,
    run_single_slot,
)
from ..indices import DEFAULT_OPTIONS, IndexOptions, check_discount, gittins_index_fn
from ..priors import Beta, Point, Prior, mean, sample, update
from ..strategies import (
    STRATEGY_NAMES,
    AdvertiserState,
    Explore,
    MarketContext,
    UtilitySpec,
    make_strategy,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AuctioneerSpec:
    index: str = "mean"  # "mean" or "gittins"
    gamma_a: float = 0.0

    def __post_init__(self):
        if self.index not in ("mean", "gittins"):
            raise ValueError(f"auctioneer index must be 'mean' or 'gittins', got {self.index!r}")
        check_discount(self.gamma_a, "gamma_a")

    def index_fn(self, opts: IndexOptions = DEFAULT_OPTIONS):
        if self.index == "mean":
            return mean
        return gittins_index_fn(self.gamma_a, opts)


@dataclass(frozen=True)
class AdvertiserSpec:
    """Static description of one advertiser.

    ``prior=None`` marks a certain advertiser whose belief is a point mass at
    its (possibly drawn) true CTR. A missing ``true_ctr`` is taken from a
    point prior, or else drawn once per trial from the auctioneer's prior.
    """

    valuation: float
    strategy: str
    auctioneer_prior: Prior
    prior: Prior | None = None
    true_ctr: float | None = None
    epsilon: float | None = None
    utility: UtilitySpec | None = None

    def __post_init__(self):
        if not (self.valuation >= 0 and math.isfinite(self.valuation)):
            raise ValueError("valuation must be finite and nonnegative")
        if self.strategy not in STRATEGY_NAMES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {', '.join(STRATEGY_NAMES)}")
        if self.true_ctr is not None and not (0.0 <= self.true_ctr <= 1.0):
            raise ValueError("true_ctr must lie in [0, 1]")
        if self.strategy == "risk" and self.utility is None:
            raise ValueError("the risk strategy needs a utility")
        if self.strategy == "explore":
            if self.epsilon is None or not (0.0 < self.epsilon < 1.0):
                raise ValueError("the explore strategy needs epsilon in (0, 1)")
            if isinstance(self.prior, Beta):
                raise ValueError("the explore strategy needs a certain advertiser (point or certain prior)")
        if isinstance(self.prior, Point) and self.true_ctr is not None and self.prior.p != self.true_ctr:
            if self.strategy in ("explore", "bidding_index"):
                raise ValueError("a certain advertiser's point prior must equal its true CTR")


@dataclass(frozen=True)
class Scenario:
    advertisers: tuple[AdvertiserSpec, ...]
    auctioneer: AuctioneerSpec = AuctioneerSpec()
    global_gamma: float = 0.9
    gamma_b: float = 0.0
    layout: SlotLayout = SlotLayout()
    rounds: int = 100
    trials: int = 100
    seed: int = 0
    name: str = "scenario"
    index_options: IndexOptions = DEFAULT_OPTIONS

    def __post_init__(self):
        object.__setattr__(self, "advertisers", tuple(self.advertisers))
        if not self.advertisers:
            raise ValueError("scenario needs at least one advertiser")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        check_discount(self.global_gamma, "global_gamma")
        check_discount(self.gamma_b, "gamma_b")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class TrialState:
    scenario: Scenario
    advertisers: list[AdvertiserState]
    ctx: MarketContext
    t: int = 0


@dataclass(frozen=True)
class RoundLog:
    t: int
    bids: tuple[Bid, ...]
    qs: tuple[float, ...]
    outcome: AuctionOutcome
    clicks: tuple[bool | None, ...]  # None: not shown this round
    payments: tuple[float, ...]
    values: tuple[float, ...]
    exploring: tuple[bool, ...]  # explore phase at bid time
    expected_revenue: float
    baseline_expected_revenue: float
    advertiser_priors: tuple[Prior, ...]  # after this round's update
    auctioneer_priors: tuple[Prior, ...]

    @property
    def revenue(self) -> float:
        return sum(self.payments)

    @property
    def effective_bids(self) -> tuple[float, ...]:
        return self.outcome.effective_bids


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def start_trial(scenario: Scenario, rng: np.random.Generator, index_fn=None) -> TrialState:
    advertisers = []
    for spec in scenario.advertisers:
        if spec.true_ctr is not None:
            true_ctr = spec.true_ctr
        elif isinstance(spec.prior, Point):
            true_ctr = spec.prior.p
        else:
            true_ctr = sample(spec.auctioneer_prior, rng)
        prior = Point(true_ctr) if spec.prior is None else spec.prior
        advertisers.append(
            AdvertiserState(
                v=spec.valuation,
                advertiser_prior=prior,
                auctioneer_prior=spec.auctioneer_prior,
                true_ctr=true_ctr,
                epsilon=spec.epsilon,
                strategy=make_strategy(spec.strategy, spec.utility),
            )
        )
    if index_fn is None:
        index_fn = scenario.auctioneer.index_fn(scenario.index_options)
    ctx = MarketContext(index_fn=index_fn, gamma_b=scenario.gamma_b, opts=scenario.index_options)
    return TrialState(scenario, advertisers, ctx)


def run_round(state: TrialState, rng: np.random.Generator) -> RoundLog:
    """One auction: index, bid, allocate, sample clicks, charge, learn."""
    advs = state.advertisers
    layout = state.scenario.layout
    qs = tuple(float(state.ctx.index_fn(a.auctioneer_prior)) for a in advs)
    exploring = tuple(isinstance(a.strategy, Explore) and a.strategy.exploring for a in advs)
    bids = tuple(a.bid(state.ctx) for a in advs)
    # the explore flag may flip while bidding
    exploring = tuple(
        e and isinstance(a.strategy, Explore) and a.strategy.exploring for e, a in zip(exploring, advs)
    )

    if layout.slots == 1:
        outcome = run_single_slot(bids, qs)
        baseline = run_per_click_baseline(bids, qs)
    else:
        outcome = run_multi_slot(bids, qs, layout)
        baseline = run_multi_slot([Bid(0.0, b.c) for b in bids], qs, layout)

    n = len(advs)
    clicks: list[bool | None] = [None] * n
    payments = [0.0] * n
    values = [0.0] * n
    expected = 0.0
    for award in outcome.awards:
        j = award.advertiser
        ctr = advs[j].true_ctr
        clicked = bool(rng.random() < award.theta * ctr)
        clicks[j] = clicked
        payments[j] = award.payment(clicked)
        values[j] = advs[j].v if clicked else 0.0
        expected += award.expected_payment(ctr)
        # Beta conjugacy only holds for observations at the top-slot CTR
        if award.theta == 1.0:
            advs[j].advertiser_prior = update(advs[j].advertiser_prior, int(clicked), 1)
            advs[j].auctioneer_prior = update(advs[j].auctioneer_prior, int(clicked), 1)
    baseline_expected = sum(a.expected_payment(advs[a.advertiser].true_ctr) for a in baseline.awards)

    log_entry = RoundLog(
        t=state.t,
        bids=bids,
        qs=qs,
        outcome=outcome,
        clicks=tuple(clicks),
        payments=tuple(payments),
        values=tuple(values),
        exploring=exploring,
        expected_revenue=expected,
        baseline_expected_revenue=baseline_expected,
        advertiser_priors=tuple(a.advertiser_prior for a in advs),
        auctioneer_priors=tuple(a.auctioneer_prior for a in advs),
    )
    state.t += 1
    return log_entry


# ------------------------------------------------------------- aggregation

@dataclass(frozen=True)
class Stat:
    mean: float
    stderr: float
    n: int

    @classmethod
    def of(cls, samples) -> "Stat":
        x = np.asarray(samples, dtype=float)
        n = x.size
        if n == 0:
            return cls(math.nan, math.nan, 0)
        se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        return cls(float(x.mean()), se, n)

    @classmethod
    def ratio(cls, num, den) -> "Stat":
        """Ratio of means with a delta-method standard error (paired samples)."""
        num = np.asarray(num, dtype=float)
        den = np.asarray(den, dtype=float)
        n = num.size
        d = den.mean()
        r = float(num.mean() / d) if d != 0 else math.nan
        if n < 2 or d == 0:
            return cls(r, math.nan, n)
        resid = num - r * den
        return cls(r, float(resid.std(ddof=1) / (math.sqrt(n) * abs(d))), n)


@dataclass
class TrialSummary:
    revenue: float = 0.0  # discounted, realized
    expected_revenue: float = 0.0  # discounted
    baseline_revenue: float = 0.0  # discounted, counterfactual per-click
    profits: list[float] = field(default_factory=list)
    explore_loss: list[float] = field(default_factory=list)  # payments - value during explore
    explore_worst_case: list[float] = field(default_factory=list)  # T * target - N
    explore_length: list[int] = field(default_factory=list)
    explore_finished: list[bool] = field(default_factory=list)


def run_trial(scenario: Scenario, trial: int, index_fn=None, round_logs: list | None = None) -> TrialSummary:
    rng = trial_rng(scenario.seed, trial)
    state = start_trial(scenario, rng, index_fn)
    n = len(state.advertisers)
    out = TrialSummary(profits=[0.0] * n, explore_loss=[0.0] * n, explore_worst_case=[0.0] * n,
                       explore_length=[0] * n, explore_finished=[False] * n)
    clicks_in_explore = [0] * n
    gamma = scenario.global_gamma
    for t in range(scenario.rounds):
        rl = run_round(state, rng)
        if round_logs is not None:
            round_logs.append(rl)
        w = gamma**t
        out.revenue += w * rl.revenue
        out.expected_revenue += w * rl.expected_revenue
        out.baseline_revenue += w * rl.baseline_expected_revenue
        for j in range(n):
            out.profits[j] += w * (rl.values[j] - rl.payments[j])
            if rl.exploring[j] and rl.clicks[j] is not None:
                out.explore_loss[j] += rl.payments[j] - rl.values[j]
                out.explore_length[j] += 1
                clicks_in_explore[j] += int(rl.clicks[j])
    for j, adv in enumerate(state.advertisers):
        if isinstance(adv.strategy, Explore):
            target = adv.true_ctr * (1.0 - adv.epsilon)
            out.explore_worst_case[j] = out.explore_length[j] * target - clicks_in_explore[j]
            out.explore_finished[j] = not adv.strategy.exploring or mean(adv.auctioneer_prior) >= target
    return out


@dataclass(frozen=True)
class Metrics:
    revenue: Stat
    expected_revenue: Stat
    baseline_revenue: Stat
    revenue_ratio: Stat  # hybrid / per-click, expected revenues
    profits: tuple[Stat, ...]
    explore_loss: dict[int, Stat]
    explore_worst_case: dict[int, Stat]
    explore_length: dict[int, Stat]
    explore_finished: dict[int, Stat]

    def rows(self) -> list[tuple[str, float, float]]:
        rows = [
            ("discounted_revenue", self.revenue.mean, self.revenue.stderr),
            ("discounted_expected_revenue", self.expected_revenue.mean, self.expected_revenue.stderr),
            ("discounted_per_click_revenue", self.baseline_revenue.mean, self.baseline_revenue.stderr),
            ("revenue_ratio_hybrid_per_click", self.revenue_ratio.mean, self.revenue_ratio.stderr),
        ]
        for j, s in enumerate(self.profits):
            rows.append((f"advertiser_{j}_discounted_profit", s.mean, s.stderr))
        for j in sorted(self.explore_loss):
            rows.append((f"advertiser_{j}_explore_loss", self.explore_loss[j].mean, self.explore_loss[j].stderr))
            rows.append((f"advertiser_{j}_explore_worst_case", self.explore_worst_case[j].mean,
                         self.explore_worst_case[j].stderr))
            rows.append((f"advertiser_{j}_explore_length", self.explore_length[j].mean,
                         self.explore_length[j].stderr))
            rows.append((f"advertiser_{j}_explore_finished", self.explore_finished[j].mean,
                         self.explore_finished[j].stderr))
        return rows


def _trial_worker(args):
    scenario, trial = args
    return run_trial(scenario, trial)


def aggregate(scenario: Scenario, summaries: list[TrialSummary]) -> Metrics:
    n = len(scenario.advertisers)
    explorers = [j for j, a in enumerate(scenario.advertisers) if a.strategy == "explore"]
    col = lambda attr, j: [getattr(s, attr)[j] for s in summaries]
    return Metrics(
        revenue=Stat.of([s.revenue for s in summaries]),
        expected_revenue=Stat.of([s.expected_revenue for s in summaries]),
        baseline_revenue=Stat.of([s.baseline_revenue for s in summaries]),
        revenue_ratio=Stat.ratio([s.expected_revenue for s in summaries], [s.baseline_revenue for s in summaries]),
        profits=tuple(Stat.of(col("profits", j)) for j in range(n)),
        explore_loss={j: Stat.of(col("explore_loss", j)) for j in explorers},
        explore_worst_case={j: Stat.of(col("explore_worst_case", j)) for j in explorers},
        explore_length={j: Stat.of(col("explore_length", j)) for j in explorers},
        explore_finished={j: Stat.of(col("explore_finished", j)) for j in explorers},
    )


def run_simulation(scenario: Scenario, workers: int = 1) -> Metrics:
    """Run all trials and aggregate.

    Trial i draws from its own stream seeded by (seed, i), so results do not
    depend on ``workers`` or on completion order.
    """
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_trial_worker, [(scenario, i) for i in range(scenario.trials)]))
    else:
        index_fn = scenario.auctioneer.index_fn(scenario.index_options)
        summaries = []
        for i in range(scenario.trials):
            summaries.append(run_trial(scenario, i, index_fn))
            if (i + 1) % max(1, scenario.trials // 10) == 0:
                log.info("trial %d/%d", i + 1, scenario.trials)
    return aggregate(scenario, summaries)
