"""Basket and spread option pricing under multi-asset KoBoL-driven Levy models."""

__version__ = "0.1.0"

from .calibration import EmmReport, adjust_drifts, emm_report, emm_residual
from .errors import (BasketLevyError, CalibrationError, CapabilityError, ConfigError,
                     DomainError, GridTooSmallError, NumericError)
from .levy_core import (CharExponent, Gaussian, GaussianParams, KoBoL, KoBoLParams,
                        LevyDensitySpec, Null, gaussian_exponent, incomplete_b,
                        is_finite_variation, kobol_exponent, kobol_levy_density,
                        lk_exponent_numeric, strip_of)
from .model import (BasketModel, characteristic_function, correlation, joint_exponent,
                    marginal_exponent, second_cumulants)
from .montecarlo import (McResult, SamplerTable, build_sampler, empirical_cf, mc_price,
                         simulate_terminal)
from .pricing import (DensityTensor, FourierGrid, MarketSpec, PayoffSpec, PriceResult,
                      density_1d, density_nd, payoff_eval, price_basket)
from .reference import MargrabeInputs, black_scholes_call, margrabe_price, normal_cdf
