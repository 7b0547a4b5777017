"""Hybrid per-impression / per-click keyword auctions.

The pieces, bottom up: CTR beliefs (``priors``), Gittins and bidding indices
(``indices``), the mechanisms (``auction``), advertiser strategies
(``strategies``) and the repeated-auction simulator (``sim``).
"""

from .auction import Bid, PricingMode, SlotLayout, effective_bid, run_multi_slot, run_per_click_baseline, run_single_slot
from .indices import BiddingGameState, IndexOptions, bidding_index, gittins_index
from .priors import Beta, Point, mean, update

__version__ = "0.1.0"

__all__ = [
    "Beta",
    "Bid",
    "BiddingGameState",
    "IndexOptions",
    "Point",
    "PricingMode",
    "SlotLayout",
    "bidding_index",
    "effective_bid",
    "gittins_index",
    "mean",
    "run_multi_slot",
    "run_per_click_baseline",
    "run_single_slot",
    "update",
]
