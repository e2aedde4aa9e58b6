"""Multi-curve interest-rate curves, pricers and calibration."""

from __future__ import annotations

from .bootstrap import BootstrapReport, BootstrapSpec, bootstrap_all, bootstrap_single_curve
from .cms import CmsMode, CmsSwapSpec, SpreadOptionSpec, SpreadVariant, cms_fair_spread, spread_option_price
from .curves import CurveMode, CurveSet, DiscountCurve, ForwardingCurve, modified_forward, simple_forward
from .errors import (
    BootstrapError,
    CalibrationError,
    CalibrationWarning,
    ConfigurationError,
    InputError,
    MulticurveError,
    NumericalError,
)
from .instruments import InstrumentKind, LinearInstrument, fra_par_rate, irs_fair_rate
from .interpolation import Extrapolation, InterpCurve, fit_monotone_hermite
from .marketdata import QuoteSet, ReferenceScenario, generate_reference_scenario, load_quotes
from .timegrid import Schedule, Tenor, make_schedule
from .volmodels import SabrSlice, SabrSurface, SwaptionQuote, sabr_implied_vol, swaption_price

__version__ = "0.1.0"

__all__ = [
    "BootstrapError",
    "BootstrapReport",
    "BootstrapSpec",
    "CalibrationError",
    "CalibrationWarning",
    "CmsMode",
    "CmsSwapSpec",
    "ConfigurationError",
    "CurveMode",
    "CurveSet",
    "DiscountCurve",
    "ForwardingCurve",
    "InputError",
    "InstrumentKind",
    "LinearInstrument",
    "Extrapolation",
    "InterpCurve",
    "MulticurveError",
    "NumericalError",
    "QuoteSet",
    "ReferenceScenario",
    "Schedule",
    "SabrSlice",
    "SabrSurface",
    "SpreadOptionSpec",
    "SpreadVariant",
    "SwaptionQuote",
    "Tenor",
    "bootstrap_all",
    "bootstrap_single_curve",
    "cms_fair_spread",
    "fit_monotone_hermite",
    "fra_par_rate",
    "generate_reference_scenario",
    "irs_fair_rate",
    "load_quotes",
    "make_schedule",
    "modified_forward",
    "sabr_implied_vol",
    "simple_forward",
    "spread_option_price",
    "swaption_price",
]
