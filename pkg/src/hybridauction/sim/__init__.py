"""Monte Carlo engine for repeated hybrid auctions and the packaged experiments."""

from .engine import (
    AdvertiserSpec,
    AuctioneerSpec,
    Metrics,
    RoundLog,
    Scenario,
    Stat,
    TrialState,
    run_round,
    run_simulation,
    run_trial,
    start_trial,
    trial_rng,
)
from .experiments import (
    experiment_explore,
    experiment_theorem2,
    experiment_typical_case,
    lemma3_ratio,
)

__all__ = [
    "AdvertiserSpec",
    "AuctioneerSpec",
    "Metrics",
    "RoundLog",
    "Scenario",
    "Stat",
    "TrialState",
    "experiment_explore",
    "experiment_theorem2",
    "experiment_typical_case",
    "lemma3_ratio",
    "run_round",
    "run_simulation",
    "run_trial",
    "start_trial",
    "trial_rng",
]
