"""Multi-curve Gaussian mixture short-rate model."""

from __future__ import annotations

from .model import (
    MmgModel,
    MmgScenario,
    mixture_expectation,
    pseudo_discount,
    theta_factor,
    theta_factor_mmg,
    zcb_price,
)
from .pricing import (
    MmgPrice,
    PricingMethod,
    cms_spread_mmg,
    fra_rate_gaussian,
    futures_convexity_adjustment,
    futures_rate,
    mmg_implied_vol,
    swaption_price_mmg,
)
from .simulation import McConfig, PathEnsemble, mc_mean, mc_zcb, simulate_paths

__all__ = [
    "McConfig",
    "MmgModel",
    "MmgPrice",
    "MmgScenario",
    "PathEnsemble",
    "PricingMethod",
    "cms_spread_mmg",
    "fra_rate_gaussian",
    "futures_convexity_adjustment",
    "futures_rate",
    "mc_mean",
    "mc_zcb",
    "mixture_expectation",
    "mmg_implied_vol",
    "pseudo_discount",
    "simulate_paths",
    "swaption_price_mmg",
    "theta_factor",
    "theta_factor_mmg",
    "zcb_price",
]
