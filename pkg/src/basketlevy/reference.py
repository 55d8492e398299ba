"""Closed-form oracles: Margrabe exchange option and the Black-Scholes call."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtr

from .errors import DomainError


def normal_cdf(x: float) -> float:
    # ndtr is erfc-based: full relative accuracy in the lower tail
    return float(ndtr(x))


@dataclass(frozen=True)
class MargrabeInputs:
    s1: float
    s2: float
    sigma1: float
    sigma2: float
    rho: float
    t: float
    q1: float = 0.0
    q2: float = 0.0

    def __post_init__(self):
        if self.s1 <= 0 or self.s2 <= 0:
            raise DomainError("Margrabe spots must be positive")
        if self.t <= 0:
            raise DomainError("Margrabe maturity must be positive")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"correlation must lie in [-1, 1], got {self.rho}")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise DomainError("volatilities must be >= 0")

    @property
    def sigma(self) -> float:
        """Volatility of the ratio ``S1/S2``."""
        var = self.sigma1**2 + self.sigma2**2 - 2 * self.rho * self.sigma1 * self.sigma2
        return math.sqrt(max(var, 0.0))


def margrabe_price(inp: MargrabeInputs) -> float:
    """Value of the option to exchange asset 2 for asset 1 at ``t``.

    ``q1``, ``q2`` are continuous dividend yields; the price does not depend on
    the riskless rate.
    """
    f1 = math.exp(-inp.q1 * inp.t) * inp.s1
    f2 = math.exp(-inp.q2 * inp.t) * inp.s2
    sig = inp.sigma
    if sig == 0.0:
        return max(f1 - f2, 0.0)
    vol = sig * math.sqrt(inp.t)
    d1 = (math.log(inp.s1 / inp.s2) + (inp.q2 - inp.q1 + 0.5 * sig * sig) * inp.t) / vol
    d2 = d1 - vol
    return f1 * normal_cdf(d1) - f2 * normal_cdf(d2)


def black_scholes_call(s: float, k: float, r: float, sigma: float, t: float) -> float:
    if s <= 0 or k <= 0 or t <= 0 or sigma < 0:
        raise DomainError("black_scholes_call needs s, k, t > 0 and sigma >= 0")
    disc_k = k * math.exp(-r * t)
    if sigma == 0.0:
        return max(s - disc_k, 0.0)
    vol = sigma * math.sqrt(t)
    d1 = (math.log(s / k) + (r + 0.5 * sigma * sigma) * t) / vol
    return s * normal_cdf(d1) - disc_k * normal_cdf(d1 - vol)
