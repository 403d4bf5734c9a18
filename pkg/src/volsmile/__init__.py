"""Risk-neutral distributions priced in closed form and read as implied-vol smiles."""

from .dists import (Gamma, LogUniform, Lognormal, MarketParams, Mixture, Normal, StudentT,
                    Uniform, calibrate_forward)
from .pricer import call_price, put_price, quote
from .smile import StrikeGrid, build_smile, implied_vol

__version__ = "0.1.0"

__all__ = [
    "Gamma", "LogUniform", "Lognormal", "MarketParams", "Mixture", "Normal", "StudentT",
    "Uniform", "calibrate_forward", "call_price", "put_price", "quote", "StrikeGrid",
    "build_smile", "implied_vol",
]
