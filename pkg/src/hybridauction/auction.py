"""Hybrid keyword auctions: single slot, per-click baseline, laddered multi-slot.

Each advertiser submits a bid (m, c): at most m per impression, at most c per
click. With auctioneer index q the effective bid is R = max(m, c*q); the
mechanism ranks on R and prices as a second-price auction on R. A winner
whose per-impression bid is strictly above c*q pays per impression, anyone
else pays the equivalent amount per click.

Ties in R go to the lowest advertiser id. Missing competitors count as a zero
effective bid (reserve price 0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence


class PricingMode(enum.Enum):
    PER_IMPRESSION = "per_impression"
    PER_CLICK = "per_click"


@dataclass(frozen=True, slots=True)
class Bid:
    m: float  # per impression
    c: float  # per click

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.c)) or self.m < 0 or self.c < 0:
            raise ValueError(f"bid components must be finite and nonnegative, got ({self.m!r}, {self.c!r})")


@dataclass(frozen=True)
class SlotLayout:
    """CTR multipliers per slot, top slot first; an implicit 0 follows the last."""

    thetas: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        thetas = tuple(float(t) for t in self.thetas)
        object.__setattr__(self, "thetas", thetas)
        if not thetas:
            raise ValueError("slot layout needs at least one slot")
        if thetas[0] != 1.0:
            raise ValueError("the top slot multiplier must be 1")
        if any(b > a for a, b in zip(thetas, thetas[1:])) or thetas[-1] < 0:
            raise ValueError("slot multipliers must satisfy 1 = theta_1 >= theta_2 >= ... >= theta_K >= 0")

    @property
    def slots(self) -> int:
        return len(self.thetas)


@dataclass(frozen=True)
class SlotAward:
    """One assigned slot.

    Bids, effective bids and charges are all quoted for the top slot. A
    per-click price applies to clicks wherever the ad sits; a per-impression
    price is for a top-slot impression, so an impression in a slot with
    multiplier theta costs ``theta * price``.
    """

    slot: int  # 0 = top
    advertiser: int
    mode: PricingMode
    price: float
    effective_bid: float
    effective_charge: float
    theta: float = 1.0

    def payment(self, clicked: bool) -> float:
        if self.mode is PricingMode.PER_IMPRESSION:
            return self.theta * self.price
        return self.price if clicked else 0.0

    def expected_payment(self, ctr: float) -> float:
        """Expected payment when the ad's top-slot CTR is ``ctr``."""
        if self.mode is PricingMode.PER_IMPRESSION:
            return self.theta * self.price
        return self.price * self.theta * ctr


@dataclass(frozen=True)
class AuctionOutcome:
    awards: tuple[SlotAward, ...]
    effective_bids: tuple[float, ...]

    @property
    def winner(self) -> int | None:
        return self.awards[0].advertiser if self.awards else None

    @property
    def mode(self) -> PricingMode | None:
        return self.awards[0].mode if self.awards else None

    @property
    def price(self) -> float | None:
        return self.awards[0].price if self.awards else None

    def award_for(self, advertiser: int) -> SlotAward | None:
        for award in self.awards:
            if award.advertiser == advertiser:
                return award
        return None


def effective_bid(bid: Bid, q: float) -> float:
    return max(bid.m, bid.c * q)


def _ranking(values: Sequence[float]) -> list[int]:
    return sorted(range(len(values)), key=lambda j: (-values[j], j))


def _price(bid: Bid, q: float, charge: float, advertiser: int) -> tuple[PricingMode, float]:
    if bid.m > bid.c * q:
        return PricingMode.PER_IMPRESSION, min(charge, bid.m)
    if q <= 0:
        raise ValueError(f"advertiser {advertiser} wins on its per-click bid with index q = 0; the per-click price is undefined")
    # clamp absorbs the last-ulp rounding of (c*q)/q
    return PricingMode.PER_CLICK, min(charge / q, bid.c)


def _check(bids: Sequence[Bid], qs: Sequence[float]) -> None:
    if len(bids) != len(qs):
        raise ValueError("need one auctioneer index per bid")
    if not bids:
        raise ValueError("auction needs at least one participant")
    if any(q < 0 for q in qs):
        raise ValueError("auctioneer indices must be nonnegative")


def run_single_slot(bids: Sequence[Bid], qs: Sequence[float]) -> AuctionOutcome:
    _check(bids, qs)
    rs = [max(b.m, b.c * q) for b, q in zip(bids, qs)]
    order = _ranking(rs)
    winner = order[0]
    runner_up = rs[order[1]] if len(order) > 1 else 0.0
    mode, price = _price(bids[winner], qs[winner], runner_up, winner)
    award = SlotAward(0, winner, mode, price, rs[winner], runner_up)
    return AuctionOutcome((award,), tuple(rs))


def run_per_click_baseline(bids: Sequence[Bid], qs: Sequence[float]) -> AuctionOutcome:
    """Next-price per-click auction; per-impression bids are ignored."""
    _check(bids, qs)
    rs = [b.c * q for b, q in zip(bids, qs)]
    order = _ranking(rs)
    winner = order[0]
    runner_up = rs[order[1]] if len(order) > 1 else 0.0
    q = qs[winner]
    if q <= 0:
        raise ValueError(f"per-click winner {winner} has index q = 0; the per-click price is undefined")
    price = min(runner_up / q, bids[winner].c)
    award = SlotAward(0, winner, PricingMode.PER_CLICK, price, rs[winner], runner_up)
    return AuctionOutcome((award,), tuple(rs))


def ladder_charges(ranked_rs: Sequence[float], thetas: Sequence[float], count: int | None = None) -> list[float]:
    """Effective charges e_1..e_count for effective bids sorted descending.

    ``e_j = sum_{i=j..K} (theta_i - theta_{i+1}) / theta_j * R_{i+1}`` with
    theta_{K+1} = 0; ``ranked_rs`` must hold at least K+1 entries.
    """
    k = len(thetas)
    if len(ranked_rs) < k + 1:
        raise ValueError("need at least K+1 effective bids (pad with zeros)")
    th = list(thetas) + [0.0]
    charges = []
    for j in range(k if count is None else count):
        if th[j] <= 0:
            raise ValueError(f"slot {j} has multiplier 0 and cannot be priced")
        charges.append(sum((th[i] - th[i + 1]) / th[j] * ranked_rs[i + 1] for i in range(j, k)))
    return charges


def run_multi_slot(bids: Sequence[Bid], qs: Sequence[float], layout: SlotLayout) -> AuctionOutcome:
    """Laddered hybrid auction: rank j takes slot j and pays its effective charge."""
    _check(bids, qs)
    rs = [max(b.m, b.c * q) for b, q in zip(bids, qs)]
    order = _ranking(rs)
    k = layout.slots
    ranked = [rs[j] for j in order] + [0.0] * max(0, k + 1 - len(order))
    filled = min(k, len(order))
    charges = ladder_charges(ranked, layout.thetas, filled)
    awards = []
    for slot in range(filled):
        adv = order[slot]
        mode, price = _price(bids[adv], qs[adv], charges[slot], adv)
        awards.append(SlotAward(slot, adv, mode, price, rs[adv], charges[slot], layout.thetas[slot]))
    return AuctionOutcome(tuple(awards), tuple(rs))
