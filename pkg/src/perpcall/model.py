"""Validated economic parameters and the derived constants everything else consumes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Regime(Enum):
    """Valuation branch: the cancellation region is {K} when r <= d, an interval when r > d."""

    RleD = "RleD"
    RgtD = "RgtD"


@dataclass(frozen=True)
class MarketParams:
    """Market inputs for the underlying.

    Parameters
    ----------
    r : float
        Risk-free interest rate per unit time, continuously compounded. Must be > 0.
    d : float
        Continuous dividend yield per unit time. Must be >= 0.
    sigma : float
        Volatility of log-returns per square-root unit time. Must be > 0.
    """

    r: float
    d: float
    sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise ValueError(f"interest rate must be positive and finite, got r={self.r}")
        if not (math.isfinite(self.d) and self.d >= 0.0):
            raise ValueError(f"dividend yield must be >= 0 and finite, got d={self.d}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"volatility must be positive and finite, got sigma={self.sigma}")


@dataclass(frozen=True)
class ContractParams:
    """Contract inputs: strike K and cancellation penalty."""

    strike: float
    penalty: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "strike", float(self.strike))
        object.__setattr__(self, "penalty", float(self.penalty))
        if not (math.isfinite(self.strike) and self.strike > 0.0):
            raise ValueError(f"strike must be positive and finite, got {self.strike}")
        if not (math.isfinite(self.penalty) and self.penalty > 0.0):
            raise ValueError(f"penalty must be positive and finite, got {self.penalty}")


@dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from the market parameters.

    Attributes
    ----------
    lam : float
        sqrt(2r + ((r - d - sigma^2/2)/sigma)^2), always positive.
    kappa : float
        (r - d - sigma^2/2)/sigma^2, the normalized log-drift.
    eta : float
        Positive root of sigma^2*y*(y-1)/2 + (r-d)*y - r = 0; equals lam/sigma - kappa.
    nu : float
        Negative root of the same quadratic; equals -(lam/sigma + kappa).
    """

    lam: float
    kappa: float
    eta: float
    nu: float


def derive_constants(market: MarketParams) -> DerivedConstants:
    """Compute the exponents and auxiliary constants for a validated market.

    Pure function: equal inputs give bit-identical outputs.
    """
    r, d, sigma = market.r, market.d, market.sigma
    mu = r - d - 0.5 * sigma * sigma
    kappa = mu / (sigma * sigma)
    lam = math.sqrt(2.0 * r + (mu / sigma) ** 2)
    eta = lam / sigma - kappa
    nu = -(lam / sigma + kappa)
    return DerivedConstants(lam=lam, kappa=kappa, eta=eta, nu=nu)


def classify_regime(market: MarketParams) -> Regime:
    """Classify the market into its valuation branch.

    r = d maps to ``Regime.RleD``: the interval-cancellation construction needs
    r*(K - penalty)/d > K, which fails at equality.
    """
    return Regime.RleD if market.r <= market.d else Regime.RgtD
