"""Risk-neutral drift conditions ``Psi(-i e_s) = -r_s``.

The idiosyncratic drift of ``X_s`` absorbs condition ``s``; common-factor
drifts are never touched. Because a drift ``mu`` enters ``Psi(-i e_s)`` as
``-mu``, the solve is a single closed-form pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, DomainError, NumericError
from .levy_core import Null
from .model import BasketModel, marginal_exponent

IMAG_TOL = 1e-12
EMM_TOL = 1e-10


def _rates(r, n: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.ndim == 0:
        return np.full(n, float(r))
    if r.shape != (n,):
        raise CalibrationError(f"rate vector has shape {r.shape}, expected ({n},)")
    return r


def _value_at_minus_i(m: BasketModel, s: int) -> float:
    e = marginal_exponent(m, s)
    try:
        val = e(-1j)
    except DomainError:
        weak = []
        for label, blk, w in [(f"x_blocks[{s}]", m.x_blocks[s], 1.0)] + [
            (f"z_blocks[{k}]", m.z_blocks[k], m.a[s, k]) for k in range(m.n)
        ]:
            lo, hi = blk.strip
            if w != 0 and not lo < -w < hi:
                weak.append(f"{label} (weight {w:g}, strip ({lo:g}, {hi:g}))")
        raise CalibrationError(
            f"asset {s}: -i is outside the exponent's strip; tempering too weak in "
            + ", ".join(weak)
        ) from None
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val.real)):
        raise NumericError(f"asset {s}: Psi(-i e_s) has imaginary part {val.imag:.3g}")
    return val.real


def emm_residual(m: BasketModel, r) -> np.ndarray:
    """Vector of ``Psi(-i e_s) + r_s``; zero exactly when discounted prices are martingales."""
    rates = _rates(r, m.n)
    return np.array([_value_at_minus_i(m, s) for s in range(m.n)]) + rates


def adjust_drifts(m: BasketModel, r) -> BasketModel:
    """Return the model whose idiosyncratic drifts satisfy the martingale conditions."""
    rates = _rates(r, m.n)
    out = m
    for s, blk in enumerate(m.x_blocks):
        if isinstance(blk, Null) or not hasattr(blk, "with_drift"):
            raise CalibrationError(f"x_blocks[{s}] is {blk.name}: no drift to adjust")
        # residual is affine in the drift with slope -1, so solving from the
        # zero-drift model gives a result independent of the incoming drift
        base = out.replace_x_block(s, blk.with_drift(0.0))
        out = out.replace_x_block(s, blk.with_drift(_value_at_minus_i(base, s) + rates[s]))
    return out


@dataclass(frozen=True)
class EmmReport:
    residuals: np.ndarray
    adjusted: bool
    r: object

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0


def emm_report(m: BasketModel, r, adjusted: bool) -> EmmReport:
    return EmmReport(emm_residual(m, r), adjusted, r)
