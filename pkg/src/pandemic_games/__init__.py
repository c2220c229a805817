"""Game-theoretic models of mask wearing, social distancing and vaccine choice."""

from .game_core import (ActionProfile, EquilibriumReport, FiniteGame, analyze, best_response,
                        dominance, price_of_anarchy, pure_nash_equilibria, social_optima)

__all__ = [
    "ActionProfile", "EquilibriumReport", "FiniteGame", "analyze", "best_response",
    "dominance", "price_of_anarchy", "pure_nash_equilibria", "social_optima",
]
__version__ = "0.1.0"
