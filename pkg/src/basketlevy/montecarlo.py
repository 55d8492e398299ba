"""Terminal-law Monte Carlo.

Each one-dimensional block is sampled by inverse transform from the CDF of its
Fourier-recovered density; the assets are then assembled as ``U = X + A Z``.
Uniforms come from counter-based Philox streams keyed by
``(seed, block, chunk)``, so the draws do not depend on how the chunks are
scheduled across workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .errors import DomainError
from .levy_core import CharExponent
from .model import BasketModel, block_list
from .pricing import (FourierGrid, MarketSpec, PayoffSpec, check_calibrated, default_grid_1d,
                      density_1d, payoff_eval)

log = logging.getLogger(__name__)

CHUNK = 1 << 16
SAMPLER_POINTS = 8192


@dataclass(frozen=True)
class SamplerTable:
    """Piecewise-linear CDF on strictly increasing knots."""

    grid: np.ndarray
    cdf: np.ndarray
    t: float

    def ppf(self, u) -> np.ndarray:
        return np.interp(u, self.cdf, self.grid)

    def cdf_at(self, x) -> np.ndarray:
        return np.interp(x, self.grid, self.cdf, left=0.0, right=1.0)


def build_sampler(e: CharExponent, t: float, g: Optional[FourierGrid] = None) -> SamplerTable:
    if g is None:
        g = default_grid_1d(e, t, SAMPLER_POINTS)
    dens = density_1d(e, t, g)
    p = dens.values
    neg = p < 0
    if neg.any():
        log.debug("%s: clipping %d negative density cells (min %.3g)", e.name, neg.sum(), p.min())
    mass = np.clip(p, 0.0, None) * g.dx[0]
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    cdf /= cdf[-1]
    edges = g.edges(0)
    # drop knots inside flat spans so the inverse is single-valued
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return SamplerTable(edges[keep], cdf[keep], t)


@dataclass(frozen=True)
class McResult:
    estimate: float
    std_error: float
    n_paths: int
    seed: int
    antithetic: bool = True
    model_fingerprint: str = ""


def _stream(seed: int, block: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block, chunk])))


def _uniforms(seed: int, block: int, n_base: int, workers: int) -> np.ndarray:
    starts = range(0, n_base, CHUNK)

    def draw(start):
        return _stream(seed, block, start // CHUNK).random(min(CHUNK, n_base - start))

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(draw, starts))
    else:
        parts = [draw(s) for s in starts]
    return np.concatenate(parts) if parts else np.empty(0)


def simulate_terminal(m: BasketModel, t: float, n_paths: int, seed: int,
                      antithetic: bool = True, workers: int = 1,
                      grids: Optional[Dict[int, FourierGrid]] = None) -> np.ndarray:
    """Draw ``n_paths`` samples of ``U_t``; returns an ``(n_paths, n)`` array.

    With ``antithetic``, row ``i + n_paths // 2`` uses the uniforms ``1 - u`` of row ``i``.
    """
    if n_paths <= 0:
        raise DomainError(f"n_paths must be positive, got {n_paths}")
    if antithetic and n_paths % 2:
        raise DomainError("antithetic sampling needs an even number of paths")
    if t <= 0:
        raise DomainError(f"horizon must be positive, got {t}")
    n_base = n_paths // 2 if antithetic else n_paths
    draws = []
    for b, (kind, i, e) in enumerate(block_list(m)):
        loc = e.point_mass(t)
        if loc is not None:
            draws.append(np.full(n_paths, loc))
            continue
        table = build_sampler(e, t, (grids or {}).get(b))
        u = _uniforms(seed, b, n_base, workers)
        if antithetic:
            u = np.concatenate([u, 1.0 - u])
        draws.append(table.ppf(u))
    x = np.stack(draws[: m.n], axis=1)
    z = np.stack(draws[m.n:], axis=1)
    return x + z @ m.a.T


def _mean_and_se(values: np.ndarray, antithetic: bool):
    if antithetic:
        half = values.shape[0] // 2
        values = 0.5 * (values[:half] + values[half:])
    k = values.shape[0]
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / np.sqrt(k)) if k > 1 else 0.0
    return mean, se


def mc_price(m: BasketModel, mkt: MarketSpec, p: PayoffSpec, n_paths: int, seed: int,
             antithetic: bool = True, workers: int = 1, check_emm: bool = True,
             samples: Optional[np.ndarray] = None) -> McResult:
    """Discounted sample mean of the payoff, with its standard error.

    Under antithetic pairing the error is computed from pair averages.
    """
    if mkt.n != m.n or len(p.weights) != m.n:
        raise DomainError("dimension mismatch between model, market and payoff")
    if check_emm:
        check_calibrated(m, mkt)
    if samples is None:
        samples = simulate_terminal(m, mkt.t_maturity, n_paths, seed, antithetic, workers)
    pay = payoff_eval(p, np.asarray(mkt.spots) * np.exp(samples)) * mkt.discount
    est, se = _mean_and_se(np.atleast_1d(pay), antithetic)
    return McResult(est, se, n_paths, seed, antithetic, m.fingerprint())


def discounted_forwards(m: BasketModel, mkt: MarketSpec, samples: np.ndarray,
                        antithetic: bool = True):
    """Per-asset ``(estimate, std_error)`` of ``e^{-rT} E[S_T]``; martingale check."""
    out = []
    for s in range(m.n):
        rate = mkt.r if isinstance(mkt.r, float) else mkt.r[s]
        vals = mkt.spots[s] * np.exp(samples[:, s] - rate * mkt.t_maturity)
        out.append(_mean_and_se(vals, antithetic))
    return out


def empirical_cf(samples: np.ndarray, v) -> complex:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] == 0:
        raise DomainError("empirical_cf needs at least one sample")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    return complex(np.mean(np.exp(1j * (samples @ v))))
