"""Lévy Libor market model: asymptotic-expansion pricing of caplets and swaptions with a Monte Carlo benchmark."""

from .black import black_price, implied_black_vol
from .config import ConfigError, ScenarioConfig, bundled_case
from .expansion import PriceBreakdown, caplet_implied_vol, price_caplet
from .jets import Jet, OrderBudgetError
from .levy import CGMY, DivergentMomentError, LevyMeasure, TabulatedJumps, paper_case
from .market import MarketModel, SingularStateError, TenorStructure, paper_market
from .montecarlo import LiborSimulator, MCResult, SimConfig, mc_caplet_price, mc_swaption_price
from .swaption import price_swaption_corrections, price_swaption_order0, vswap

__all__ = [
    "CGMY", "ConfigError", "DivergentMomentError", "Jet", "LevyMeasure", "LiborSimulator",
    "MCResult", "MarketModel", "OrderBudgetError", "PriceBreakdown", "ScenarioConfig",
    "SimConfig", "SingularStateError", "TabulatedJumps", "TenorStructure", "black_price",
    "bundled_case", "caplet_implied_vol", "implied_black_vol", "mc_caplet_price",
    "mc_swaption_price", "paper_case", "paper_market", "price_caplet",
    "price_swaption_corrections", "price_swaption_order0", "vswap",
]
