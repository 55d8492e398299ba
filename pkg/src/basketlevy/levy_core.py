"""One-dimensional characteristic exponents and a Levy-Khintchine quadrature oracle.

Convention throughout: ``E[exp(i xi X_t)] = exp(-t psi(xi))``.

The KoBoL jump measure is

    c_plus  * x^(-nu-1) * exp(lambda_minus * x)   for x > 0,
    c_minus * |x|^(-nu-1) * exp(lambda_plus * x)  for x < 0,

with ``lambda_minus < 0 < lambda_plus``, so positive jumps are tempered by
``-lambda_minus`` and negative jumps by ``lambda_plus``. Its closed-form
exponent is analytic for ``lambda_minus < Im(xi) < lambda_plus``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericError

Strip = Tuple[float, float]

_FULL_STRIP: Strip = (-math.inf, math.inf)


def _as_complex(xi):
    return np.asarray(xi, dtype=complex)


def _unwrap(out):
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def check_strip(xi, strip: Strip, name: str = "exponent") -> None:
    """Raise DomainError unless every ``Im(xi)`` lies strictly inside ``strip``."""
    lo, hi = strip
    w = np.imag(_as_complex(xi))
    if w.size == 0:
        return
    wmin, wmax = float(np.min(w)), float(np.max(w))
    if not wmin > lo:
        raise DomainError(f"{name}: Im(xi)={wmin:g} is not above the lower strip bound {lo:g}")
    if not wmax < hi:
        raise DomainError(f"{name}: Im(xi)={wmax:g} is not below the upper strip bound {hi:g}")


def gamma_neg(nu: float) -> float:
    """Gamma(-nu) for nu in (0, 1) or (1, 2), built from Gamma on positive arguments."""
    if 0.0 < nu < 1.0:
        return special.gamma(1.0 - nu) / (-nu)
    if 1.0 < nu < 2.0:
        return special.gamma(2.0 - nu) / (nu * (nu - 1.0))
    raise DomainError(f"Gamma(-nu) needs nu in (0,1) or (1,2), got nu={nu}")


# --------------------------------------------------------------------------- #
# Exponent families
# --------------------------------------------------------------------------- #


class CharExponent:
    """Base for evaluable characteristic exponents.

    Subclasses provide ``strip`` (open interval of admissible ``Im(xi)``) and
    ``_eval``. Instances are immutable; calling them is pure.
    """

    name = "exponent"
    strip: Strip = _FULL_STRIP

    def __call__(self, xi):
        check_strip(xi, self.strip, self.name)
        return _unwrap(self._eval(_as_complex(xi)))

    def _eval(self, xi: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def point_mass(self, t: float) -> Optional[float]:
        """Location of the law at time ``t`` if it is a point mass, else None."""
        return None

    @property
    def freq_scale(self) -> float:
        """Distance from the real axis to the nearest strip boundary."""
        lo, hi = self.strip
        return min(-lo, hi)


@dataclass(frozen=True)
class KoBoL(CharExponent):
    """Tempered-stable (KoBoL) exponent.

    Parameters
    ----------
    nu : order in (0, 1) or (1, 2)
    c_plus, c_minus : positive intensities
    lambda_plus : > 0, tempering of negative jumps
    lambda_minus : < 0, tempering of positive jumps (as ``-lambda_minus``)
    mu : drift
    """

    nu: float
    c_plus: float
    c_minus: float
    lambda_plus: float
    lambda_minus: float
    mu: float = 0.0

    name = "KoBoL"

    def __post_init__(self):
        for f in ("nu", "c_plus", "c_minus", "lambda_plus", "lambda_minus", "mu"):
            if not math.isfinite(getattr(self, f)):
                raise DomainError(f"KoBoL.{f} must be finite")
        if not (0.0 < self.nu < 1.0 or 1.0 < self.nu < 2.0):
            raise DomainError(f"KoBoL.nu must lie in (0,1) or (1,2), got {self.nu}")
        if self.c_plus <= 0 or self.c_minus <= 0:
            raise DomainError("KoBoL intensities c_plus, c_minus must be > 0")
        if not self.lambda_minus < 0 < self.lambda_plus:
            raise DomainError(
                f"KoBoL needs lambda_minus < 0 < lambda_plus, got "
                f"({self.lambda_minus}, {self.lambda_plus})"
            )

    @property
    def strip(self) -> Strip:
        return (self.lambda_minus, self.lambda_plus)

    @property
    def drift(self) -> float:
        return self.mu

    def with_drift(self, mu: float) -> "KoBoL":
        return replace(self, mu=float(mu))

    def _eval(self, xi):
        return kobol_exponent(self, xi, _checked=True)


@dataclass(frozen=True)
class Gaussian(CharExponent):
    """Brownian exponent ``a xi^2 / 2 - i gamma xi``."""

    a: float
    gamma: float = 0.0

    name = "Gaussian"

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.gamma)):
            raise DomainError("Gaussian parameters must be finite")
        if self.a < 0:
            raise DomainError(f"Gaussian variance rate must be >= 0, got {self.a}")

    @property
    def drift(self) -> float:
        return self.gamma

    def with_drift(self, gamma: float) -> "Gaussian":
        return replace(self, gamma=float(gamma))

    def point_mass(self, t):
        return self.gamma * t if self.a == 0 else None

    def _eval(self, xi):
        return gaussian_exponent(self, xi)


@dataclass(frozen=True)
class Null(CharExponent):
    """The zero exponent (a process identically 0)."""

    name = "Null"

    def point_mass(self, t):
        return 0.0

    def _eval(self, xi):
        return np.zeros_like(xi)


# Parameter records named after their role in the model description.
KoBoLParams = KoBoL
GaussianParams = Gaussian


def kobol_exponent(p: KoBoL, xi, _checked: bool = False):
    """Closed-form KoBoL exponent with principal-branch powers.

    Both bases ``-lambda_minus - i xi`` and ``lambda_plus + i xi`` have positive
    real part on the strip, so the principal branch is continuous there.
    """
    z = _as_complex(xi)
    if not _checked:
        check_strip(z, p.strip, p.name)
    g = gamma_neg(p.nu)
    # complex bases on both sides so the differences vanish exactly at xi = 0
    lm = complex(-p.lambda_minus)
    lp = complex(p.lambda_plus)
    out = (
        -1j * p.mu * z
        + p.c_plus * g * (np.power(lm, p.nu) - np.power(lm - 1j * z, p.nu))
        + p.c_minus * g * (np.power(lp, p.nu) - np.power(lp + 1j * z, p.nu))
    )
    return _unwrap(out)


def gaussian_exponent(p: Gaussian, xi):
    z = _as_complex(xi)
    return _unwrap(0.5 * p.a * z * z - 1j * p.gamma * z)


def strip_of(e: CharExponent) -> Strip:
    return e.strip


def is_finite_variation(p: KoBoL) -> bool:
    return p.nu < 1.0


# --------------------------------------------------------------------------- #
# Quadrature helpers and the Levy-Khintchine oracle
# --------------------------------------------------------------------------- #


def _quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=400, **kw) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                             full_output=1, **kw)
    val, err = res[0], res[1]
    if len(res) > 3 and err > max(1e3 * epsabs, 1e3 * epsrel * abs(val)):
        raise NumericError(
            f"quadrature on [{a}, {b}] did not converge: value={val:.6g}, "
            f"achieved abs error={err:.3g} ({res[3].strip()})"
        )
    return val


def incomplete_b(nu: float, lam: float) -> float:
    """``B(nu, lam) = int_0^1 x^(-nu) exp(-lam x) dx`` for ``nu < 1``, ``lam > 0``."""
    if nu >= 1.0:
        raise DomainError(f"incomplete_b needs nu < 1 (integrable at 0), got {nu}")
    if lam <= 0.0:
        raise DomainError(f"incomplete_b needs lambda > 0, got {lam}")
    # algebraic weight x^(-nu) is integrated exactly by QAWS
    return _quad(lambda x: math.exp(-lam * x), 0.0, 1.0, weight="alg", wvar=(-nu, 0.0),
                 epsabs=0.0, epsrel=1e-13)


def compensator_drift(nu: float, lam: float) -> float:
    """Linear coefficient linking the LK exponent of one KoBoL half-line to the closed form.

    For the measure ``x^(-nu-1) exp(-lam x) dx`` on ``x > 0`` compensated on
    ``[-1, 1]``, the Levy-Khintchine exponent equals
    ``Gamma(-nu) (lam^nu - (lam - i xi)^nu) + i xi D``. For ``nu < 1`` this
    ``D`` is ``incomplete_b(nu, lam)``; for ``nu > 1`` it is the continuation
    ``Gamma(1-nu) lam^(nu-1) - int_1^inf x^(-nu) exp(-lam x) dx``.
    """
    if nu < 1.0:
        return incomplete_b(nu, lam)
    if not 1.0 < nu < 2.0:
        raise DomainError(f"compensator_drift needs nu in (0,1) or (1,2), got {nu}")
    tail = _quad(lambda x: x ** (-nu) * math.exp(-lam * x), 1.0, math.inf, epsabs=0.0)
    return special.gamma(1.0 - nu) * lam ** (nu - 1.0) - tail


@dataclass(frozen=True)
class LevyDensitySpec:
    """Levy density with a truncation radius.

    ``order`` is optional: when the density behaves like ``|x|^(-1-order)``
    near 0, passing it lets the oracle integrate that singularity with an
    algebraic weight instead of relying on extrapolation.
    """

    density: Callable[[float], float]
    cutoff: float
    order: Optional[float] = None


def kobol_levy_density(p: KoBoL, cutoff: Optional[float] = None) -> LevyDensitySpec:
    tp, tm = -p.lambda_minus, p.lambda_plus

    def density(x: float) -> float:
        if x > 0:
            return p.c_plus * x ** (-p.nu - 1.0) * math.exp(-tp * x)
        return p.c_minus * (-x) ** (-p.nu - 1.0) * math.exp(-tm * -x)

    if cutoff is None:
        cutoff = 40.0 / min(tp, tm)
    return LevyDensitySpec(density, cutoff, order=p.nu)


def _phi2(y: complex) -> complex:
    """``(exp(iy) - 1 - iy) / y^2`` without cancellation near 0."""
    if abs(y) < 1e-2:
        iy = 1j * y
        return -(0.5 + iy / 6.0 + iy * iy / 24.0 + iy**3 / 120.0 + iy**4 / 720.0)
    return (np.exp(1j * y) - 1.0 - 1j * y) / (y * y)


def _half_line(dens: Callable[[float], float], xi: complex, cutoff: float,
               order: Optional[float]) -> complex:
    """``int_0^cutoff (e^{i x xi} - 1 - i x xi 1{x<=1}) dens(x) dx``."""
    inner_end = min(1.0, cutoff)
    if order is not None:
        # dens(x) ~ x^(-1-order): integrate xi^2 phi2(x xi) * [dens(x) x^(1+order)]
        # against the weight x^(1-order).
        def smooth(x):
            x = max(x, 1e-12 * inner_end)
            return dens(x) * x ** (1.0 + order)

        def g(x, part):
            v = xi * xi * _phi2(x * xi) * smooth(x)
            return v.real if part == 0 else v.imag

        kw = dict(weight="alg", wvar=(1.0 - order, 0.0))
    else:
        def g(x, part):
            v = xi * xi * x * x * _phi2(x * xi) * dens(x)
            return v.real if part == 0 else v.imag

        kw = {}
    re = _quad(g, 0.0, inner_end, args=(0,), **kw)
    im = _quad(g, 0.0, inner_end, args=(1,), **kw)
    total = complex(re, im)
    if cutoff <= 1.0:
        return total
    if xi.imag == 0.0 and xi.real != 0.0:
        w = xi.real
        c = _quad(dens, 1.0, cutoff, weight="cos", wvar=w)
        s = _quad(dens, 1.0, cutoff, weight="sin", wvar=w)
        m = _quad(dens, 1.0, cutoff)
        total += complex(c - m, s)
    elif xi != 0:
        def h(x, part):
            v = (np.exp(1j * x * xi) - 1.0) * dens(x)
            return v.real if part == 0 else v.imag

        total += complex(_quad(h, 1.0, cutoff, args=(0,)), _quad(h, 1.0, cutoff, args=(1,)))
    return total


def lk_exponent_numeric(spec: Optional[LevyDensitySpec], a: float, b: float, xi) -> complex:
    """Brute-force Levy-Khintchine exponent in one dimension.

    ``a xi^2 / 2 - i b xi - int (e^{i x xi} - 1 - i x xi 1{|x|<=1}) Pi(dx)``,
    integrated adaptively over ``[-cutoff, cutoff]``. ``spec=None`` means no jumps.
    """
    xi = complex(xi)
    out = 0.5 * a * xi * xi - 1j * b * xi
    if spec is None or xi == 0:
        return out
    pos = _half_line(spec.density, xi, spec.cutoff, spec.order)
    neg = _half_line(lambda y: spec.density(-y), -xi, spec.cutoff, spec.order)
    return out - (pos + neg)


def kobol_lk_drift(p: KoBoL) -> float:
    """Drift offset ``c_plus D(nu, -lambda_minus) - c_minus D(nu, lambda_plus)``.

    With it, ``lk_exponent_numeric(kobol density, 0, 0, xi)`` equals
    ``kobol_exponent(p with mu=0, xi) + i xi * kobol_lk_drift(p)``.
    """
    return (p.c_plus * compensator_drift(p.nu, -p.lambda_minus)
            - p.c_minus * compensator_drift(p.nu, p.lambda_plus))


# --------------------------------------------------------------------------- #
# Cumulants by differentiation at the origin
# --------------------------------------------------------------------------- #


def exponent_cumulants(psi: Callable, freq_scale: float = math.inf) -> Tuple[float, float]:
    """Mean and variance rates ``(k1, k2)`` of the law with exponent ``psi``.

    ``psi(xi) = -i k1 xi + k2 xi^2 / 2 + O(xi^3)``. Central differences with one
    Richardson step; the step is tied to ``freq_scale`` (distance to the strip
    edge) so that the Taylor remainder and round-off both stay near 1e-10
    relative.
    """
    h = 1e-2 if not math.isfinite(freq_scale) else 1e-3 * freq_scale
    hs = np.array([h, -h, h / 2, -h / 2])
    v = np.asarray(psi(hs.astype(complex)), dtype=complex)
    p0 = complex(psi(np.zeros(1, dtype=complex))[0])
    d1_h = (v[0] - v[1]) / (2 * h)
    d1_h2 = (v[2] - v[3]) / h
    d2_h = (v[0] + v[1] - 2 * p0) / h**2
    d2_h2 = (v[2] + v[3] - 2 * p0) / (h / 2) ** 2
    d1 = (4 * d1_h2 - d1_h) / 3
    d2 = (4 * d2_h2 - d2_h) / 3
    return float((1j * d1).real), float(d2.real)
