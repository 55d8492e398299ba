"""Density recovery by discrete Fourier inversion and basket pricing by quadrature.

The density of a law with exponent ``psi`` is

    p_t(x) = (2 pi)^-n  int exp(-i <x, xi> - t psi(xi)) d xi,

discretised on a tensor grid with ``N`` points per axis. Spatial nodes sit at
cell centres of ``[c - L, c + L]``; frequencies are ``(k - N/2) * pi / L``.
With ``dx * dxi = 2 pi / N`` the sum is one FFT per axis.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .calibration import emm_residual
from .errors import CapabilityError, DomainError, GridTooSmallError
from .levy_core import CharExponent, exponent_cumulants
from .model import (BasketModel, first_cumulants, joint_exponent, marginal_exponent,
                    second_cumulants)

MAX_TENSOR_DIM = 3
NORMALIZATION_TOL = 1e-3
BOUNDARY_RATIO_TOL = 1e-4
EMM_GATE = 1e-8


@dataclass(frozen=True)
class FourierGrid:
    points_per_dim: int
    x_center: Tuple[float, ...]
    x_halfwidth: Tuple[float, ...]

    def __post_init__(self):
        n = self.points_per_dim
        if n < 64 or n & (n - 1):
            raise DomainError(f"points_per_dim must be a power of two >= 64, got {n}")
        c = tuple(float(v) for v in np.atleast_1d(self.x_center))
        hw = tuple(float(v) for v in np.atleast_1d(self.x_halfwidth))
        if len(hw) == 1 and len(c) > 1:
            hw = hw * len(c)
        if len(c) != len(hw):
            raise DomainError("x_center and x_halfwidth differ in length")
        if any(not (h > 0 and math.isfinite(h)) for h in hw):
            raise DomainError("x_halfwidth must be positive and finite")
        object.__setattr__(self, "x_center", c)
        object.__setattr__(self, "x_halfwidth", hw)

    @property
    def ndim(self) -> int:
        return len(self.x_center)

    @property
    def dx(self) -> np.ndarray:
        return 2.0 * np.array(self.x_halfwidth) / self.points_per_dim

    @property
    def dxi(self) -> np.ndarray:
        return math.pi / np.array(self.x_halfwidth)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    def nodes(self, d: int = 0) -> np.ndarray:
        c, h, n = self.x_center[d], self.x_halfwidth[d], self.points_per_dim
        return c - h + (np.arange(n) + 0.5) * (2.0 * h / n)

    def edges(self, d: int = 0) -> np.ndarray:
        c, h = self.x_center[d], self.x_halfwidth[d]
        return np.linspace(c - h, c + h, self.points_per_dim + 1)

    def frequencies(self, d: int = 0) -> np.ndarray:
        n = self.points_per_dim
        return (np.arange(n) - n // 2) * (math.pi / self.x_halfwidth[d])

    def as_dict(self) -> dict:
        return {"points_per_dim": self.points_per_dim, "x_center": list(self.x_center),
                "x_halfwidth": list(self.x_halfwidth)}


@dataclass
class DensityTensor:
    values: np.ndarray
    grid: FourierGrid
    t: float
    normalization_defect: float = field(init=False)
    min_value: float = field(init=False)
    boundary_mass: float = field(init=False)
    boundary_ratio: float = field(init=False)

    def __post_init__(self):
        self.normalization_defect = float(abs(self.values.sum() * self.grid.cell_volume - 1.0))
        self.min_value = float(self.values.min())
        # The inversion is periodic, so mass leaking past the box wraps around and
        # the total stays near one; the rim cells are what reveal a short box.
        rim = np.abs(self.values[_rim_mask(self.values.shape)])
        self.boundary_mass = float(rim.sum() * self.grid.cell_volume)
        peak = float(np.abs(self.values).max())
        self.boundary_ratio = float(rim.max() / peak) if peak > 0 else math.inf

    def marginal(self, axis: int) -> np.ndarray:
        """Density of one coordinate, summing out the others."""
        other = tuple(d for d in range(self.values.ndim) if d != axis)
        vol = float(np.prod([self.grid.dx[d] for d in other])) if other else 1.0
        return self.values.sum(axis=other) * vol


def _rim_mask(shape, width: int = 3) -> np.ndarray:
    rim = np.zeros(shape, dtype=bool)
    for d, n in enumerate(shape):
        idx = [slice(None)] * len(shape)
        idx[d] = np.r_[0:width, n - width:n]
        rim[tuple(idx)] = True
    return rim


def _halfwidth(var: float, freq_scale: float) -> float:
    # 8 sd, at least 1, and wide enough that exp(-tempering * L) is negligible
    tail = 20.0 / freq_scale if math.isfinite(freq_scale) and freq_scale > 0 else 0.0
    return max(8.0 * math.sqrt(max(var, 0.0)), 1.0, tail)


def default_grid_1d(e: CharExponent, t: float, points: int = 4096) -> FourierGrid:
    k1, k2 = exponent_cumulants(e, e.freq_scale)
    return FourierGrid(points, (k1 * t,), (_halfwidth(k2 * t, e.freq_scale),))


def default_grid(m: BasketModel, t: float, points: Optional[int] = None) -> FourierGrid:
    if points is None:
        points = {1: 4096, 2: 512, 3: 128}.get(m.n, 64)
    mean = first_cumulants(m, t)
    var = np.diag(second_cumulants(m, t))
    hw = [_halfwidth(var[s], marginal_exponent(m, s).freq_scale) for s in range(m.n)]
    return FourierGrid(points, tuple(mean), tuple(hw))


def _invert(cf_values: np.ndarray, g: FourierGrid) -> np.ndarray:
    """Sample the density from characteristic-function values on the frequency grid.

    Taking the real part pairs the unmatched Nyquist frequency with its mirror,
    which is the trapezoid rule on the symmetric frequency interval.
    """
    n = g.points_per_dim
    vals = np.asarray(cf_values, dtype=complex)
    for d in range(g.ndim):
        x0 = g.x_center[d] - g.x_halfwidth[d] + 0.5 * g.dx[d]
        shape = [1] * g.ndim
        shape[d] = n
        vals = vals * np.exp(-1j * x0 * g.frequencies(d)).reshape(shape)
    out = np.fft.fftn(vals)
    sign = (-1.0) ** np.arange(n)
    for d in range(g.ndim):
        shape = [1] * g.ndim
        shape[d] = n
        out = out * sign.reshape(shape)
    scale = float(np.prod(g.dxi)) / (2.0 * math.pi) ** g.ndim
    return (out.real * scale)


def _checked(dens: DensityTensor) -> DensityTensor:
    if dens.normalization_defect > NORMALIZATION_TOL:
        raise GridTooSmallError(
            f"density integrates to 1 {'+' if dens.values.sum() * dens.grid.cell_volume > 1 else '-'} "
            f"{dens.normalization_defect:.3g}; enlarge x_halfwidth (now {dens.grid.x_halfwidth}) "
            f"or points_per_dim (now {dens.grid.points_per_dim})"
        )
    if dens.boundary_mass > NORMALIZATION_TOL or dens.boundary_ratio > BOUNDARY_RATIO_TOL:
        raise GridTooSmallError(
            f"density at the grid boundary is {dens.boundary_ratio:.3g} of its peak "
            f"(mass {dens.boundary_mass:.3g} in the outer cells); "
            f"enlarge x_halfwidth (now {dens.grid.x_halfwidth})"
        )
    return dens


def density_1d(e: CharExponent, t: float, g: Optional[FourierGrid] = None) -> DensityTensor:
    if t <= 0:
        raise DomainError(f"horizon must be positive, got {t}")
    if e.point_mass(t) is not None:
        raise DomainError(f"{e.name} is degenerate at t={t}: a point mass has no density")
    if g is None:
        g = default_grid_1d(e, t)
    if g.ndim != 1:
        raise DomainError("density_1d needs a one-dimensional grid")
    cf = np.exp(-t * e(g.frequencies(0).astype(complex)))
    return _checked(DensityTensor(_invert(cf, g), g, t))


def density_nd(m: BasketModel, t: float, g: Optional[FourierGrid] = None) -> DensityTensor:
    if m.n > MAX_TENSOR_DIM:
        raise CapabilityError(
            f"tensor-grid density is capped at n={MAX_TENSOR_DIM} (model has n={m.n}); "
            "use Monte Carlo (mc_price / the 'mc' command) instead"
        )
    if t <= 0:
        raise DomainError(f"horizon must be positive, got {t}")
    if g is None:
        g = default_grid(m, t)
    if g.ndim != m.n:
        raise DomainError(f"grid has {g.ndim} dimensions, model has n={m.n}")
    return _density_nd_cached(m, float(t), g)


@lru_cache(maxsize=4)
def _density_nd_cached(m: BasketModel, t: float, g: FourierGrid) -> DensityTensor:
    # models and grids are immutable, so repeated pricing on one grid reuses the tensor
    axes = np.meshgrid(*[g.frequencies(d) for d in range(m.n)], indexing="ij")
    v = np.stack(axes, axis=-1).astype(complex)
    cf = np.exp(-t * joint_exponent(m, v))
    values = _invert(cf, g)
    values.flags.writeable = False
    return _checked(DensityTensor(values, g, t))


# --------------------------------------------------------------------------- #
# Pricing
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class MarketSpec:
    """Spot prices, riskless rate(s) and maturity.

    ``r`` may be a per-asset vector (used by the drift conditions); discounting
    then needs ``discount_rate``.
    """

    spots: Tuple[float, ...]
    r: object
    t_maturity: float
    discount_rate: Optional[float] = None

    def __post_init__(self):
        spots = tuple(float(s) for s in np.atleast_1d(self.spots))
        if any(not s > 0 for s in spots):
            raise DomainError("spots must be positive")
        if not self.t_maturity > 0:
            raise DomainError("maturity must be positive")
        r = np.asarray(self.r, dtype=float)
        if r.ndim > 1 or (r.ndim == 1 and r.shape[0] != len(spots)):
            raise DomainError("rate vector must have one entry per asset")
        object.__setattr__(self, "spots", spots)
        object.__setattr__(self, "r", float(r) if r.ndim == 0 else tuple(r.tolist()))

    @property
    def n(self) -> int:
        return len(self.spots)

    @property
    def discount(self) -> float:
        if self.discount_rate is not None:
            rate = self.discount_rate
        elif isinstance(self.r, float):
            rate = self.r
        else:
            raise DomainError("per-asset rates given: set discount_rate for discounting")
        return math.exp(-rate * self.t_maturity)


@dataclass(frozen=True)
class PayoffSpec:
    """Weighted basket call ``(sum_j w_j S_j - K)_+``; the spread is ``w = (1, -1, ..., -1)``."""

    weights: Tuple[float, ...]
    strike: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in np.atleast_1d(self.weights)))
        if self.strike < 0:
            raise DomainError(f"strike must be >= 0, got {self.strike}")

    @classmethod
    def spread(cls, n: int, strike: float = 0.0) -> "PayoffSpec":
        return cls((1.0,) + (-1.0,) * (n - 1), strike)

    def __call__(self, s) -> np.ndarray:
        return payoff_eval(self, s)


def payoff_eval(p: PayoffSpec, s) -> np.ndarray:
    """``max(sum_j w_j s_j - K, 0)`` over the last axis of ``s``."""
    s = np.asarray(s, dtype=float)
    val = np.maximum(s @ np.asarray(p.weights) - p.strike, 0.0)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class PriceResult:
    price: float
    normalization_defect: float
    truncation_loss: float
    min_density: float
    grid: FourierGrid


def check_calibrated(m: BasketModel, mkt: MarketSpec) -> np.ndarray:
    res = emm_residual(m, mkt.r)
    worst = float(np.max(np.abs(res)))
    if worst > EMM_GATE:
        raise DomainError(
            f"model is not drift-adjusted: max |Psi(-i e_s) + r_s| = {worst:.3g} > {EMM_GATE:g}; "
            "run adjust_drifts first or disable the check explicitly"
        )
    return res


def price_basket(m: BasketModel, mkt: MarketSpec, p: PayoffSpec,
                 g: Optional[FourierGrid] = None, check_emm: bool = True) -> PriceResult:
    """``V = e^{-rT} E[payoff(S_0 e^{U_T})]`` by quadrature against the Fourier density."""
    if mkt.n != m.n or len(p.weights) != m.n:
        raise DomainError(
            f"dimension mismatch: model n={m.n}, spots {mkt.n}, weights {len(p.weights)}"
        )
    if m.n > MAX_TENSOR_DIM:
        raise CapabilityError(
            f"tensor-grid pricing is capped at n={MAX_TENSOR_DIM} (model has n={m.n}); "
            "use Monte Carlo (mc_price / the 'mc' command) instead"
        )
    if check_emm:
        check_calibrated(m, mkt)
    t = mkt.t_maturity
    dens = density_nd(m, t, g)
    g = dens.grid
    axes = np.meshgrid(*[g.nodes(d) for d in range(m.n)], indexing="ij")
    prices = np.stack([mkt.spots[d] * np.exp(axes[d]) for d in range(m.n)], axis=-1)
    weighted = payoff_eval(p, prices) * dens.values * g.cell_volume
    value = mkt.discount * float(weighted.sum())

    rim = _rim_mask(weighted.shape)
    loss = mkt.discount * float(np.abs(weighted[rim]).sum())
    if loss > 1e-3 * abs(value):
        raise GridTooSmallError(
            f"payoff-weighted mass near the grid boundary is {loss:.3g} against price "
            f"{value:.6g}; enlarge x_halfwidth (now {g.x_halfwidth})"
        )
    return PriceResult(value, dens.normalization_defect, loss, dens.min_value, g)
