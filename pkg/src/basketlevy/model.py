"""The n-asset model ``U_t = X_t + A Z_t`` and its joint exponent."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .levy_core import CharExponent, Strip, exponent_cumulants


def _pullback(strip: Strip, weight: float) -> Strip:
    """Admissible Im(x) so that Im(weight * x) lies in ``strip``."""
    lo, hi = strip
    if weight == 0:
        return (-math.inf, math.inf)
    if weight > 0:
        return (lo / weight, hi / weight)
    return (hi / weight, lo / weight)


class ScaledSum(CharExponent):
    """``x -> sum_k psi_k(w_k x)``: the exponent of a linear combination of independent blocks."""

    name = "marginal"

    def __init__(self, terms: Sequence[Tuple[CharExponent, float]], name: str = "marginal"):
        self.terms = tuple((e, float(w)) for e, w in terms)
        self.name = name
        lo, hi = -math.inf, math.inf
        for e, w in self.terms:
            plo, phi = _pullback(e.strip, w)
            lo, hi = max(lo, plo), min(hi, phi)
        self.strip = (lo, hi)

    def _eval(self, xi):
        out = np.zeros_like(xi)
        for e, w in self.terms:
            if w != 0:
                out = out + e._eval(w * xi)
        return out

    def point_mass(self, t):
        total = 0.0
        for e, w in self.terms:
            if w == 0:
                continue
            loc = e.point_mass(t)
            if loc is None:
                return None
            total += w * loc
        return total


@dataclass(frozen=True)
class BasketModel:
    """Idiosyncratic blocks ``x_blocks``, common factors ``z_blocks`` and mixing matrix ``a``.

    Asset ``s`` has log-return ``U_s = X_s + sum_m a[s, m] Z_m``.
    """

    x_blocks: Tuple[CharExponent, ...]
    z_blocks: Tuple[CharExponent, ...]
    a: np.ndarray

    def __init__(self, x_blocks, z_blocks, a):
        a = np.array(a, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"dependency matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("dependency matrix has non-finite entries")
        n = a.shape[0]
        if len(x_blocks) != n or len(z_blocks) != n:
            raise DomainError(
                f"need {n} x_blocks and {n} z_blocks for a {n}x{n} matrix, "
                f"got {len(x_blocks)} and {len(z_blocks)}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "x_blocks", tuple(x_blocks))
        object.__setattr__(self, "z_blocks", tuple(z_blocks))
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BasketModel):
            return NotImplemented
        return (self.x_blocks == other.x_blocks and self.z_blocks == other.z_blocks
                and np.array_equal(self.a, other.a))

    def __hash__(self):
        return hash(self.fingerprint())

    def fingerprint(self) -> str:
        text = repr((self.x_blocks, self.z_blocks, self.a.tolist()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def replace_x_block(self, s: int, block: CharExponent) -> "BasketModel":
        xs = list(self.x_blocks)
        xs[s] = block
        return BasketModel(xs, self.z_blocks, self.a)


def joint_exponent(m: BasketModel, v):
    """``Psi(v) = sum_s psi_s(v_s) + sum_m phi_m((A^T v)_m)``.

    ``v`` has shape ``(..., n)``; the result has shape ``v.shape[:-1]``.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape[-1] != m.n:
        raise DomainError(f"argument has length {v.shape[-1]}, model has n={m.n}")
    out = np.zeros(v.shape[:-1], dtype=complex)
    av = v @ m.a  # (A^T v)_m = sum_k a[k, m] v_k
    for label, blocks, args in (("x_blocks", m.x_blocks, v), ("z_blocks", m.z_blocks, av)):
        for j, e in enumerate(blocks):
            try:
                out = out + e(args[..., j])
            except DomainError as exc:
                raise DomainError(f"{label}[{j}] ({e.name}): {exc}") from None
    return complex(out) if out.ndim == 0 else out


def characteristic_function(m: BasketModel, v, t: float):
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    return np.exp(-t * joint_exponent(m, v))


def marginal_exponent(m: BasketModel, s: int) -> ScaledSum:
    """Exponent of ``U_s``: ``x -> psi_s(x) + sum_m phi_m(a[s, m] x)`` (0-based ``s``)."""
    if not 0 <= s < m.n:
        raise DomainError(f"asset index {s} out of range for n={m.n}")
    terms = [(m.x_blocks[s], 1.0)] + [(m.z_blocks[k], m.a[s, k]) for k in range(m.n)]
    return ScaledSum(terms, name=f"marginal[{s}]")


def _block_rates(e: CharExponent) -> Tuple[float, float]:
    if e.point_mass(1.0) is not None:
        return e.point_mass(1.0), 0.0
    return exponent_cumulants(e, e.freq_scale)


def first_cumulants(m: BasketModel, t: float) -> np.ndarray:
    mx = np.array([_block_rates(e)[0] for e in m.x_blocks])
    mz = np.array([_block_rates(e)[0] for e in m.z_blocks])
    return t * (mx + m.a @ mz)


def second_cumulants(m: BasketModel, t: float) -> np.ndarray:
    """Covariance of ``U_t``: ``t (diag(var X) + A diag(var Z) A^T)``."""
    vx = np.array([_block_rates(e)[1] for e in m.x_blocks])
    vz = np.array([_block_rates(e)[1] for e in m.z_blocks])
    cov = t * (np.diag(vx) + (m.a * vz) @ m.a.T)
    return 0.5 * (cov + cov.T)


def correlation(m: BasketModel, s: int, l: int, t: float = 1.0) -> float:
    if s == l:
        raise DomainError("correlation needs two distinct assets")
    cov = second_cumulants(m, t)
    if cov[s, s] <= 0 or cov[l, l] <= 0:
        raise DomainError(f"degenerate model: asset {s if cov[s, s] <= 0 else l} has zero variance")
    rho = cov[s, l] / math.sqrt(cov[s, s] * cov[l, l])
    return float(min(1.0, max(-1.0, rho)))


def block_list(model: BasketModel) -> List[Tuple[str, int, CharExponent]]:
    return ([("x", i, e) for i, e in enumerate(model.x_blocks)]
            + [("z", i, e) for i, e in enumerate(model.z_blocks)])
