"""Scenario files: JSON documents describing one repeated-auction experiment.

Example::

    {
      "name": "two-bidders",
      "advertisers": [
        {"valuation": 1.0, "strategy": "truthful", "prior": "beta:1,9"},
        {"valuation": 1.0, "strategy": "explore", "epsilon": 0.1,
         "prior": "point:0.5", "auctioneer_prior": "beta:1,20"}
      ],
      "auctioneer": {"index": "mean", "gamma_a": 0.0},
      "discounts": {"global_gamma": 0.9, "gamma_b": 0.0},
      "slots": {"theta": [1.0]},
      "run": {"rounds": 200, "trials": 100, "seed": 7}
    }

Advertiser ``prior`` is ``"point:p"``, ``"beta:a,b"`` or ``"certain"`` (a
point mass at the true CTR, which is drawn from the auctioneer prior when not
given). ``auctioneer_prior`` defaults to ``prior`` when that is a Beta.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .auction import SlotLayout
from .indices import IndexOptions
from .priors import Beta, parse_prior
from .sim.engine import AdvertiserSpec, AuctioneerSpec, Scenario
from .strategies import STRATEGY_NAMES, make_utility


class ScenarioError(ValueError):
    """Invalid scenario document; the message names the offending field."""


_TOP_KEYS = {"name", "advertisers", "auctioneer", "discounts", "slots", "run", "index_options"}
_ADVERTISER_KEYS = {"valuation", "strategy", "prior", "auctioneer_prior", "true_ctr", "epsilon", "utility", "lambda"}
_SECTION_KEYS = {
    "auctioneer": {"index", "gamma_a"},
    "discounts": {"global_gamma", "gamma_b"},
    "slots": {"theta"},
    "run": {"rounds", "trials", "seed"},
    "index_options": {"tolerance", "horizon", "max_horizon"},
}


def _object(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{where}: expected an object")
    return value


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")


def _number(obj: dict, key: str, where: str, default=None, required=False) -> float | None:
    if key not in obj:
        if required:
            raise ScenarioError(f"{where}.{key}: required field missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"{where}.{key}: expected a finite number, got {value!r}")
    return float(value)


def _integer(obj: dict, key: str, where: str, default: int) -> int:
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}.{key}: expected an integer, got {value!r}")
    return value


def _prior(text: Any, where: str):
    if not isinstance(text, str):
        raise ScenarioError(f"{where}: expected a prior spec string like 'beta:1,9'")
    try:
        return parse_prior(text)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _advertiser(raw: Any, where: str) -> AdvertiserSpec:
    obj = _object(raw, where)
    _reject_unknown(obj, _ADVERTISER_KEYS, where)
    valuation = _number(obj, "valuation", where, required=True)
    strategy = obj.get("strategy")
    if strategy not in STRATEGY_NAMES:
        raise ScenarioError(f"{where}.strategy: expected one of {', '.join(STRATEGY_NAMES)}, got {strategy!r}")

    if "prior" not in obj:
        raise ScenarioError(f"{where}.prior: required field missing")
    prior = None if obj["prior"] == "certain" else _prior(obj["prior"], f"{where}.prior")
    if "auctioneer_prior" in obj:
        auctioneer_prior = _prior(obj["auctioneer_prior"], f"{where}.auctioneer_prior")
    elif isinstance(prior, Beta):
        auctioneer_prior = prior
    else:
        raise ScenarioError(f"{where}.auctioneer_prior: required when the advertiser's prior is not a Beta")

    utility = None
    if strategy == "risk":
        kind = obj.get("utility")
        if not isinstance(kind, str):
            raise ScenarioError(f"{where}.utility: the risk strategy needs 'neutral', 'averse' or 'seeking'")
        lam = _number(obj, "lambda", where)
        try:
            utility = make_utility(kind, lam)
        except ValueError as exc:
            raise ScenarioError(f"{where}.utility: {exc}") from None
    elif "utility" in obj or "lambda" in obj:
        raise ScenarioError(f"{where}: utility/lambda only apply to the risk strategy")
    if strategy == "explore" and "epsilon" not in obj:
        raise ScenarioError(f"{where}.epsilon: required for the explore strategy")
    if strategy != "explore" and "epsilon" in obj:
        raise ScenarioError(f"{where}.epsilon: only applies to the explore strategy")

    try:
        return AdvertiserSpec(
            valuation=valuation,
            strategy=strategy,
            auctioneer_prior=auctioneer_prior,
            prior=prior,
            true_ctr=_number(obj, "true_ctr", where),
            epsilon=_number(obj, "epsilon", where),
            utility=utility,
        )
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def scenario_from_dict(doc: Any) -> Scenario:
    doc = _object(doc, "scenario")
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    sections = {}
    for key, allowed in _SECTION_KEYS.items():
        sec = _object(doc.get(key, {}), key)
        _reject_unknown(sec, allowed, key)
        sections[key] = sec

    raw_ads = doc.get("advertisers")
    if not isinstance(raw_ads, list) or not raw_ads:
        raise ScenarioError("advertisers: expected a non-empty list")
    advertisers = [_advertiser(a, f"advertisers[{i}]") for i, a in enumerate(raw_ads)]

    auc = sections["auctioneer"]
    thetas = sections["slots"].get("theta", [1.0])
    if not isinstance(thetas, list) or not all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in thetas
    ):
        raise ScenarioError("slots.theta: expected a list of numbers")
    opts = sections["index_options"]
    horizon = opts.get("horizon")
    if horizon is not None and (isinstance(horizon, bool) or not isinstance(horizon, int)):
        raise ScenarioError("index_options.horizon: expected an integer")
    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        raise ScenarioError("name: expected a string")

    parts = {}
    try:
        parts["auctioneer"] = AuctioneerSpec(str(auc.get("index", "mean")), _number(auc, "gamma_a", "auctioneer", 0.0))
    except ValueError as exc:
        raise ScenarioError(f"auctioneer: {exc}") from None
    try:
        parts["layout"] = SlotLayout(tuple(thetas))
    except ValueError as exc:
        raise ScenarioError(f"slots.theta: {exc}") from None
    try:
        parts["index_options"] = IndexOptions(
            tolerance=_number(opts, "tolerance", "index_options", 1e-9),
            horizon=horizon,
            max_horizon=_integer(opts, "max_horizon", "index_options", 400),
        )
    except ValueError as exc:
        raise ScenarioError(f"index_options: {exc}") from None
    disc, run = sections["discounts"], sections["run"]
    try:
        return Scenario(
            advertisers=tuple(advertisers),
            global_gamma=_number(disc, "global_gamma", "discounts", 0.9),
            gamma_b=_number(disc, "gamma_b", "discounts", 0.0),
            rounds=_integer(run, "rounds", "run", 100),
            trials=_integer(run, "trials", "run", 100),
            seed=_integer(run, "seed", "run", 0),
            name=name,
            **parts,
        )
    except ValueError as exc:
        raise ScenarioError(f"scenario: {exc}") from None


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)
