"""fastvol: batched European option pricing, Greeks, and implied volatility.

Scalar core plus a deterministic batch engine and a ``vol`` CLI.  Two IV
solvers are provided: a safeguarded Halley iteration with bisection fallback
(default) and a rational-guess Householder(3) inversion in normalized Black
coordinates.
"""

from .batch import (BatchError, ChainTable, batch_greeks, batch_iv,
                    batch_price, broadcast, format_output, parse_flags,
                    validate)
from .distributions import inv_norm_cdf, norm_cdf, norm_pdf
from .errors import (AboveUpperBoundError, BelowIntrinsicError, DomainError,
                     StepFunctionEdge)
from .greeks import (GreeksRecord, all_greeks, delta, gamma, rho, theta,
                     vega)
from .lbr import (NormalizedQuote, RegionId, atm_inverse, householder3_step,
                  implied_vol_lbr, initial_guess, normalize_quote,
                  normalized_black, normalized_black_complement,
                  objective_branch, select_region)
from .models import Model, PricingInputs, parse_flag
from .pricing import (price, price_black76, price_black_scholes, price_bsm)
from .solver import SolverResult, SolverStatus, implied_vol_halley

__version__ = "0.1.0"

__all__ = [
    "BatchError", "ChainTable", "batch_greeks", "batch_iv", "batch_price",
    "broadcast", "format_output", "parse_flags", "validate",
    "inv_norm_cdf", "norm_cdf", "norm_pdf",
    "AboveUpperBoundError", "BelowIntrinsicError", "DomainError",
    "StepFunctionEdge",
    "GreeksRecord", "all_greeks", "delta", "gamma", "rho", "theta", "vega",
    "NormalizedQuote", "RegionId", "atm_inverse", "householder3_step",
    "implied_vol_lbr", "initial_guess", "normalize_quote",
    "normalized_black", "normalized_black_complement", "objective_branch",
    "select_region",
    "Model", "PricingInputs", "parse_flag",
    "price", "price_black76", "price_black_scholes", "price_bsm",
    "SolverResult", "SolverStatus", "implied_vol_halley",
]
