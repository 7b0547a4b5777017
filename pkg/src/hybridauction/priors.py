"""CTR beliefs: point masses and Beta distributions.

Both belief kinds are immutable. ``update`` returns a new object; a point
mass is never moved by data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Point:
    """Certain belief: the CTR is exactly ``p``."""

    p: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"point prior needs p in [0, 1], got {self.p!r}")


@dataclass(frozen=True)
class Beta:
    """Beta(alpha, beta) belief. Fractional parameters are allowed."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0) or not (
            math.isfinite(self.alpha) and math.isfinite(self.beta)
        ):
            raise ValueError(
                f"Beta prior needs alpha > 0 and beta > 0, got alpha={self.alpha!r}, beta={self.beta!r}"
            )


# Beta parameters double as the prior itself.
BetaParams = Beta
Prior = Union[Point, Beta]


def mean(prior: Prior) -> float:
    if isinstance(prior, Point):
        return prior.p
    return prior.alpha / (prior.alpha + prior.beta)


def variance(prior: Prior) -> float:
    if isinstance(prior, Point):
        return 0.0
    a, b = prior.alpha, prior.beta
    return a * b / ((a + b) ** 2 * (a + b + 1))


def update(prior: Prior, clicks: int, impressions: int) -> Prior:
    """Posterior after ``clicks`` clicks in ``impressions`` impressions."""
    if clicks < 0 or impressions < 0 or clicks > impressions:
        raise ValueError(
            f"invalid observation: {clicks} clicks in {impressions} impressions"
        )
    if isinstance(prior, Point) or impressions == 0:
        return prior
    return Beta(prior.alpha + clicks, prior.beta + impressions - clicks)


def log_density(prior: Beta, x):
    a, b = prior.alpha, prior.beta
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return log_norm + (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x)


def density(prior: Beta, x):
    """Beta density at ``x`` in (0, 1); accepts scalars or arrays.

    Normalisation goes through log-gamma so that very sharp priors
    (beta in the thousands) do not overflow.
    """
    if not isinstance(prior, Beta):
        raise TypeError("density is defined for Beta priors only")
    out = np.exp(log_density(prior, x))
    return float(out) if out.ndim == 0 else out


def sample(prior: Prior, rng: np.random.Generator) -> float:
    if isinstance(prior, Point):
        return prior.p
    return float(rng.beta(prior.alpha, prior.beta))


def parse_prior(text: str) -> Prior:
    """Parse ``"point:p"`` or ``"beta:a,b"``."""
    kind, sep, body = text.strip().partition(":")
    if not sep:
        raise ValueError(f"prior spec {text!r} must look like 'point:p' or 'beta:a,b'")
    kind = kind.strip().lower()
    try:
        if kind == "point":
            return Point(float(body))
        if kind == "beta":
            a, b = (float(s) for s in body.split(","))
            return Beta(a, b)
    except ValueError as exc:
        if "prior" in str(exc):
            raise
        raise ValueError(f"cannot parse prior spec {text!r}: {exc}") from None
    raise ValueError(f"unknown prior kind {kind!r} in {text!r}")


def format_prior(prior: Prior) -> str:
    if isinstance(prior, Point):
        return f"point:{prior.p!r}"
    return f"beta:{prior.alpha!r},{prior.beta!r}"
