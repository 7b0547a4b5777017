import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridauction.auction import (
    Bid,
    PricingMode,
    SlotLayout,
    effective_bid,
    ladder_charges,
    run_multi_slot,
    run_per_click_baseline,
    run_single_slot,
)

money = st.floats(min_value=0, max_value=10, allow_nan=False)
ctr = st.floats(min_value=1e-3, max_value=1, allow_nan=False)


def test_bid_validation():
    for m, c in [(-1, 0), (0, -0.1), (math.inf, 0), (0, math.nan)]:
        with pytest.raises(ValueError):
            Bid(m, c)


def test_effective_bid_examples():
    assert effective_bid(Bid(0, 1), 0.3) == 0.3
    assert effective_bid(Bid(0.2, 1), 0.5) == 0.5
    assert effective_bid(Bid(0.6, 1), 0.5) == 0.6


def test_pure_per_impression_second_price():
    out = run_single_slot([Bid(0.5, 0), Bid(0.3, 0)], [0.1, 0.9])
    assert (out.winner, out.mode, out.price) == (0, PricingMode.PER_IMPRESSION, 0.3)


def test_pure_per_click_is_next_price():
    out = run_single_slot([Bid(0, 1.0), Bid(0, 0.8)], [0.5, 0.5])
    assert (out.winner, out.mode, out.price) == (0, PricingMode.PER_CLICK, 0.8)


def test_mixed_rule():
    out = run_single_slot([Bid(0.4, 0.5), Bid(0, 0.6)], [0.5, 0.5])
    assert out.effective_bids == (0.4, 0.3)
    assert (out.winner, out.mode, out.price) == (0, PricingMode.PER_IMPRESSION, 0.3)


def test_equality_charges_per_click():
    out = run_single_slot([Bid(0.5, 1.0), Bid(0.2, 0)], [0.5, 0.5])
    assert out.mode is PricingMode.PER_CLICK
    assert out.price == pytest.approx(0.4)


def test_ties_go_to_lowest_id():
    out = run_single_slot([Bid(0.3, 0), Bid(0.3, 0)], [1, 1])
    assert out.winner == 0 and out.price == 0.3


def test_single_participant_reserve_zero():
    out = run_single_slot([Bid(0.4, 0)], [0.2])
    assert out.price == 0.0


def test_per_click_with_zero_index_rejected():
    with pytest.raises(ValueError, match="q = 0"):
        run_single_slot([Bid(0, 1), Bid(0, 0)], [0.0, 0.5])
    with pytest.raises(ValueError):
        run_per_click_baseline([Bid(0, 1), Bid(0, 0)], [0.0, 0.0])


def test_baseline_example():
    out = run_per_click_baseline([Bid(5, 1.0), Bid(0, 0.8)], [0.5, 0.5])
    assert (out.winner, out.mode, out.price) == (0, PricingMode.PER_CLICK, 0.8)


def test_payments():
    imp = run_single_slot([Bid(0.5, 0), Bid(0.3, 0)], [1, 1]).awards[0]
    assert imp.payment(False) == imp.payment(True) == 0.3
    clk = run_single_slot([Bid(0, 1.0), Bid(0, 0.8)], [0.5, 0.5]).awards[0]
    assert clk.payment(True) == 0.8 and clk.payment(False) == 0.0
    assert clk.expected_payment(0.25) == pytest.approx(0.2)


def test_layout_validation():
    assert SlotLayout((1.0, 0.5)).slots == 2
    for bad in [(), (0.9,), (1.0, 0.5, 0.7), (1.0, -0.1)]:
        with pytest.raises(ValueError):
            SlotLayout(bad)


def test_ladder_charges_example():
    e = ladder_charges([3, 2, 1], [1, 0.5])
    assert e == pytest.approx([1.5, 1.0], abs=1e-15)


def test_multi_slot_example():
    bids = [Bid(3, 0), Bid(2, 0), Bid(1, 0)]
    out = run_multi_slot(bids, [1, 1, 1], SlotLayout((1.0, 0.5)))
    assert [a.advertiser for a in out.awards] == [0, 1]
    assert [a.price for a in out.awards] == pytest.approx([1.5, 1.0])
    # a second-slot impression is worth half a top-slot one
    assert out.awards[1].payment(False) == pytest.approx(0.5)


def test_multi_slot_padding():
    out = run_multi_slot([Bid(2, 0)], [1], SlotLayout((1.0, 0.5, 0.2)))
    assert len(out.awards) == 1 and out.awards[0].price == 0.0


def _random_instance(rng, k_max=6):
    n = int(rng.integers(1, 9))
    k = int(rng.integers(1, k_max + 1))
    thetas = np.sort(rng.uniform(0.01, 1, size=k))[::-1]
    thetas[0] = 1.0
    bids = [Bid(float(m), float(c)) for m, c in zip(rng.uniform(0, 1, n) * (rng.random(n) < 0.7), rng.uniform(0, 2, n))]
    qs = rng.uniform(0.01, 1, n).tolist()
    return bids, qs, SlotLayout(tuple(thetas))


def _recurrence_residual(out, layout):
    """max_j |e_j th_j - (R_{j+1}(th_j - th_{j+1}) + e_{j+1} th_{j+1})| over all K slots."""
    k = layout.slots
    ranked = sorted(out.effective_bids, reverse=True) + [0.0] * (k + 1)
    th = list(layout.thetas) + [0.0]
    e = ladder_charges(ranked, layout.thetas) + [0.0]
    assert e[: len(out.awards)] == [a.effective_charge for a in out.awards]
    return max(abs(e[j] * th[j] - (ranked[j + 1] * (th[j] - th[j + 1]) + e[j + 1] * th[j + 1])) for j in range(k))


def test_charge_recurrence_uses_next_bid():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        bids, qs, layout = _random_instance(rng)
        out = run_multi_slot(bids, qs, layout)
        assert _recurrence_residual(out, layout) <= 1e-12


def test_charges_nonincreasing_and_bounded():
    rng = np.random.default_rng(12)
    for _ in range(2000):
        bids, qs, layout = _random_instance(rng)
        out = run_multi_slot(bids, qs, layout)
        e = [a.effective_charge for a in out.awards]
        assert all(x >= y - 1e-12 for x, y in zip(e, e[1:]))
        for a in out.awards:
            assert a.effective_charge <= a.effective_bid + 1e-12


def test_k1_matches_single_slot():
    rng = np.random.default_rng(13)
    for _ in range(1000):
        bids, qs, _ = _random_instance(rng)
        assert run_multi_slot(bids, qs, SlotLayout()) == run_single_slot(bids, qs)


@given(
    st.lists(st.tuples(money, money), min_size=1, max_size=6),
    st.lists(ctr, min_size=6, max_size=6),
)
def test_feasibility(raw, qs):
    bids = [Bid(m, c) for m, c in raw]
    qs = qs[: len(bids)]
    for out in (run_single_slot(bids, qs), run_multi_slot(bids, qs, SlotLayout((1.0, 0.6, 0.3)))):
        for a in out.awards:
            bid = bids[a.advertiser]
            if a.mode is PricingMode.PER_IMPRESSION:
                assert a.price <= bid.m
            else:
                assert a.price <= bid.c
            assert a.price >= 0
