"""Packaged experiments: revenue bounds, the obscure-keyword gain, exploration cost."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..auction import Bid, PricingMode, run_per_click_baseline, run_single_slot
from ..indices import DEFAULT_OPTIONS, IndexOptions, gittins_index
from ..priors import Beta, density, mean
from ..strategies import truthful_bid
from .engine import Stat


def lemma3_ratio(alpha: float, beta: float) -> float:
    """``E[min(mu, w)] / mu`` for w ~ Beta(alpha, beta) with mean mu.

    Written as ``1 - E[(mu - w)+] / mu`` so that the adaptive quadrature only
    runs over [0, mu], where the integrand is smooth even for very sharp
    priors.
    """
    prior = Beta(alpha, beta)
    mu = mean(prior)
    sd = math.sqrt(alpha * beta / ((alpha + beta) ** 2 * (alpha + beta + 1)))
    hints = sorted({x for x in (mu - 3 * sd, mu - sd, mu - 0.1 * sd) if 0 < x < mu})
    shortfall, _ = integrate.quad(
        lambda w: (mu - w) * density(prior, w), 0.0, mu,
        points=hints or None, limit=500, epsabs=1e-14, epsrel=1e-12,
    )
    return 1.0 - shortfall / mu


def _expected_payment(outcome, ctrs) -> float:
    award = outcome.awards[0]
    return award.expected_payment(ctrs[award.advertiser])


# ------------------------------------------------------- revenue ratio

@dataclass(frozen=True)
class RevenueComparison:
    hybrid: Stat
    per_click: Stat
    ratio: Stat  # ratio of mean expected revenues, hybrid / per-click
    lower_bound: float  # E[min(mu, w)] / mu of the common prior

    def rows(self):
        return [
            ("hybrid_revenue", self.hybrid.mean, self.hybrid.stderr),
            ("per_click_revenue", self.per_click.mean, self.per_click.stderr),
            ("revenue_ratio", self.ratio.mean, self.ratio.stderr),
            ("lemma3_lower_bound", self.lower_bound, 0.0),
        ]


def experiment_theorem2(
    alpha: float,
    beta: float,
    gamma_a: float = 0.0,
    n_advertisers: int = 2,
    trials: int = 100_000,
    seed: int = 0,
    v: float = 1.0,
    opts: IndexOptions = DEFAULT_OPTIONS,
) -> RevenueComparison:
    """Certain, truthful advertisers whose CTRs are drawn from the auctioneer's prior.

    Per trial both mechanisms run on the same draw; revenue is the expected
    payment given the drawn CTRs.
    """
    if n_advertisers < 2:
        raise ValueError("need at least two advertisers")
    prior = Beta(alpha, beta)
    q = gittins_index(prior, gamma_a, opts)
    qs = [q] * n_advertisers
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    draws = rng.beta(alpha, beta, size=(trials, n_advertisers))
    hybrid = np.empty(trials)
    click = np.empty(trials)
    for i, ps in enumerate(draws.tolist()):
        bids = [truthful_bid(v, p) for p in ps]
        hybrid[i] = _expected_payment(run_single_slot(bids, qs), ps)
        click[i] = _expected_payment(run_per_click_baseline(bids, qs), ps)
    return RevenueComparison(Stat.of(hybrid), Stat.of(click), Stat.ratio(hybrid, click), lemma3_ratio(alpha, beta))


# --------------------------------------------------------- obscure keywords

@dataclass(frozen=True)
class TypicalCaseResult:
    k: int
    n_advertisers: int
    hybrid: Stat
    per_click: Stat
    gain: Stat  # ratio of means, hybrid / per-click
    second_ctr: Stat  # p_(2)
    second_above_half: Stat  # Pr[p_(2) >= 1/2]

    def rows(self):
        return [
            ("n_advertisers", float(self.n_advertisers), 0.0),
            ("hybrid_revenue", self.hybrid.mean, self.hybrid.stderr),
            ("per_click_revenue", self.per_click.mean, self.per_click.stderr),
            ("gain_factor", self.gain.mean, self.gain.stderr),
            ("second_highest_ctr", self.second_ctr.mean, self.second_ctr.stderr),
            ("pr_second_ctr_at_least_half", self.second_above_half.mean, self.second_above_half.stderr),
        ]


def experiment_typical_case(k: int, trials: int = 10_000, seed: int = 0, v: float = 1.0, point_prior: bool = False) -> TypicalCaseResult:
    """4**k certain advertisers with CTRs from Beta(1, k) and a myopic auctioneer.

    With ``point_prior`` every CTR equals the prior mean instead, which
    removes the information the per-impression bids carry.
    """
    if k < 1:
        raise ValueError("K must be a positive integer")
    n = 4**k
    prior = Beta(1.0, float(k))
    q = mean(prior)
    qs = [q] * n
    rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
    hybrid = np.empty(trials)
    click = np.empty(trials)
    second = np.empty(trials)
    for i in range(trials):
        ps = [q] * n if point_prior else rng.beta(1.0, float(k), size=n).tolist()
        bids = [Bid(v * p, v) for p in ps]
        hybrid[i] = _expected_payment(run_single_slot(bids, qs), ps)
        click[i] = _expected_payment(run_per_click_baseline(bids, qs), ps)
        top2 = sorted(ps)[-2:]
        second[i] = top2[0]
    return TypicalCaseResult(
        k, n, Stat.of(hybrid), Stat.of(click), Stat.ratio(hybrid, click), Stat.of(second), Stat.of(second >= 0.5)
    )


# ---------------------------------------------------------------- explore

@dataclass(frozen=True)
class ExploreResult:
    trials: int
    terminated: int
    length: Stat  # impressions in the explore phase
    clicks: Stat
    worst_case_max: float  # max over terminated trials of T*p' - N (needs < 0 when T > 0)
    worst_case_negative: bool  # T*p' - N < 0 on every terminated trial with T > 0
    hybrid_loss: Stat  # realized payments - value, per trial
    hybrid_loss_max: float
    per_click_loss: Stat  # expected loss of a forced per-click overbidder

    def rows(self):
        return [
            ("terminated_fraction", self.terminated / self.trials, 0.0),
            ("explore_length", self.length.mean, self.length.stderr),
            ("explore_clicks", self.clicks.mean, self.clicks.stderr),
            ("worst_case_expression_max", self.worst_case_max, 0.0),
            ("worst_case_all_negative", float(self.worst_case_negative), 0.0),
            ("hybrid_loss", self.hybrid_loss.mean, self.hybrid_loss.stderr),
            ("hybrid_loss_max", self.hybrid_loss_max, 0.0),
            ("per_click_loss", self.per_click_loss.mean, self.per_click_loss.stderr),
        ]


def _explore_path(rng, p, alpha, beta, target, max_rounds):
    """Click indicators of one explore phase and whether it ended.

    Impression t (0-based) happens while the auctioneer's mean after t
    impressions is below ``target``. Uniforms are drawn one per impression,
    in order, so the path matches a round-by-round simulation on the same
    stream.
    """
    if alpha / (alpha + beta) >= target:
        return np.zeros(0, dtype=bool), True
    chunks = []
    n_prev, t_prev, chunk = 0, 0, 256
    while t_prev < max_rounds:
        size = min(chunk, max_rounds - t_prev)
        c = rng.random(size) < p
        n_after = n_prev + np.cumsum(c)
        t_after = t_prev + np.arange(1, size + 1)
        hit = np.flatnonzero((alpha + n_after) / (alpha + beta + t_after) >= target)
        if hit.size:
            chunks.append(c[: hit[0] + 1])
            return np.concatenate(chunks), True
        chunks.append(c)
        n_prev, t_prev, chunk = int(n_after[-1]), t_prev + size, chunk * 2
    return np.concatenate(chunks), False


def experiment_explore(
    p: float,
    epsilon: float,
    alpha: float,
    beta: float,
    r_star: float | None = None,
    trials: int = 10_000,
    seed: int = 0,
    v: float = 1.0,
    max_rounds: int = 1_000_000,
) -> ExploreResult:
    """A certain advertiser lifts a myopic auctioneer's Beta prior to p(1 - eps).

    The single competitor holds a fixed effective bid ``r_star`` (default
    ``v*p*(1-eps)``). The explore bidder is advertiser 0, so it wins ties.
    Alongside, on the same click path, a pure per-click bidder that must
    overbid ``v*p*(1-eps)/q_t`` to keep the slot accrues expected loss
    ``p*v*(p*(1-eps)/q_t - 1)`` per round.
    """
    target = p * (1.0 - epsilon)
    if r_star is None:
        r_star = v * target
    if r_star > v * target:
        raise ValueError("the competitor's effective bid must not exceed v*p*(1-eps)")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 5]))
    competitor = Bid(r_star, 0.0)

    lengths, clicks, losses, click_losses = [], [], [], []
    worst = -math.inf
    all_negative = True
    terminated = 0
    for _ in range(trials):
        path, done = _explore_path(rng, p, alpha, beta, target, max_rounds)
        t_len = path.size
        n_clicks = int(path.sum())
        loss = 0.0
        click_loss = 0.0
        if t_len:
            q0 = alpha / (alpha + beta)
            # the effective bids are constant during the phase, so one auction prices every round
            award = run_single_slot([Bid(v * target, v), competitor], [q0, 1.0]).awards[0]
            if award.advertiser != 0 or award.mode is not PricingMode.PER_IMPRESSION:
                raise AssertionError("explore bidder must win per impression while below the target")
            loss = t_len * award.price - v * n_clicks
            n_before = np.concatenate(([0], np.cumsum(path)[:-1]))
            q_t = (alpha + n_before) / (alpha + beta + np.arange(t_len))
            click_loss = float(np.sum(p * v * (target / q_t - 1.0)))
        if done:
            terminated += 1
            expr = t_len * target - n_clicks
            if t_len:
                worst = max(worst, expr)
                all_negative = all_negative and expr < 0
        lengths.append(t_len)
        clicks.append(n_clicks)
        losses.append(loss)
        click_losses.append(click_loss)
    losses = np.asarray(losses)
    return ExploreResult(
        trials=trials,
        terminated=terminated,
        length=Stat.of(lengths),
        clicks=Stat.of(clicks),
        worst_case_max=worst if worst > -math.inf else 0.0,
        worst_case_negative=all_negative,
        hybrid_loss=Stat.of(losses),
        hybrid_loss_max=float(losses.max()) if losses.size else 0.0,
        per_click_loss=Stat.of(click_losses),
    )
