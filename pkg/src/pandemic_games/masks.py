"""Mask-wearing games: basic, Bayesian, efficiency-Bayesian and multiplayer."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

from .game_core import COST, FiniteGame

log = logging.getLogger(__name__)

NO, OUT, IN, USE = "no", "out", "in", "use"
BASIC_ACTIONS = (NO, OUT, IN)
BINARY_ACTIONS = (NO, USE)


class HealthStatus(str, enum.Enum):
    SUSCEPTIBLE = "susceptible"
    INFECTED = "infected"


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class MaskParams:
    c_out: float = 1.0
    c_in: float = 10.0
    c_use: float = 1.0
    c_i: float = 1000.0
    rho: float = 0.0025
    a: float = 1.0
    b: float = 1.0
    n_players: int = 400
    k_infected: int = 1
    g_contacts: int = 1

    def __post_init__(self):
        for name in ("rho", "a", "b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v}")
        for name in ("c_out", "c_in", "c_use", "c_i"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if self.n_players < 0 or not 0 <= self.k_infected <= max(self.n_players, 0):
            raise ParameterError(
                f"k_infected must lie in [0, n_players], got k={self.k_infected}, N={self.n_players}")
        if self.g_contacts < 1:
            raise ParameterError(f"g_contacts must be >= 1, got {self.g_contacts}")

    def warn_cost_ordering(self) -> bool:
        """Log a warning unless 0 < c_out < c_in < c_i; returns whether it holds."""
        ok = 0 < self.c_out < self.c_in < self.c_i
        if not ok:
            log.warning(
                "mask costs violate 0 < c_out < c_in < c_i (c_out=%s, c_in=%s, c_i=%s)",
                self.c_out, self.c_in, self.c_i)
        return ok


def build_basic_mask_game(params: MaskParams, s1: HealthStatus, s2: HealthStatus) -> FiniteGame:
    """Full-information 3x3 cost game over ``no``/``out``/``in``.

    With mixed statuses the susceptible player is always placed as the row
    player, whichever order the statuses were given in.
    """
    s1, s2 = HealthStatus(s1), HealthStatus(s2)
    params.warn_cost_ordering()
    c_out, c_in, c_i = params.c_out, params.c_in, params.c_i
    own = {NO: 0.0, OUT: c_out, IN: c_in}

    if s1 == s2:
        shift = c_i if s1 == HealthStatus.INFECTED else 0.0
        values = [[(own[r] + shift, own[c] + shift) for c in BASIC_ACTIONS] for r in BASIC_ACTIONS]
        return FiniteGame(BASIC_ACTIONS, BASIC_ACTIONS, values, COST)

    # The susceptible row player is infected unless the infected player wears
    # out (blocks spread) or the row player wears in (blocks intake).
    def susceptible_cost(r, c):
        protected = r == IN or c == OUT
        return own[r] + (0.0 if protected else c_i)

    values = [
        [(susceptible_cost(r, c), own[c] + c_i) for c in BASIC_ACTIONS]
        for r in BASIC_ACTIONS
    ]
    return FiniteGame(BASIC_ACTIONS, BASIC_ACTIONS, values, COST)


def bayesian_infection_cost(params: MaskParams) -> float:
    """Expected cost of meeting unprotected: rho * (1 - rho) * C_i."""
    return params.rho * (1.0 - params.rho) * params.c_i


def build_bayesian_mask_game(params: MaskParams, include_baseline: bool = False) -> FiniteGame:
    """2x2 cost game over ``no``/``use`` under status uncertainty.

    The action-independent term ``rho * C_i`` is left out unless
    ``include_baseline`` is set; it shifts every cell equally.
    """
    hat = bayesian_infection_cost(params)
    u = params.c_use
    base = params.rho * params.c_i if include_baseline else 0.0
    values = [
        [(hat + base, hat + base), (base, u + base)],
        [(u + base, base), (u + base, u + base)],
    ]
    return FiniteGame(BINARY_ACTIONS, BINARY_ACTIONS, values, COST)


def build_efficiency_mask_game(params: MaskParams, include_baseline: bool = False) -> FiniteGame:
    """Bayesian mask game with imperfect protection (``a``) and spread prevention (``b``).

    The lower-right cell is symmetric: both players pay
    ``C_use + (1-a)(1-b) * rho(1-rho) C_i``.
    """
    hat = bayesian_infection_cost(params)
    a, b, u = params.a, params.b, params.c_use
    base = params.rho * params.c_i if include_baseline else 0.0
    both = u + (1 - a) * (1 - b) * hat
    values = [
        [(hat, hat), ((1 - b) * hat, (1 - a) * hat + u)],
        [((1 - a) * hat + u, (1 - b) * hat), (both, both)],
    ]
    values = [[(r + base, c + base) for r, c in row] for row in values]
    return FiniteGame(BINARY_ACTIONS, BINARY_ACTIONS, values, COST)


class Regime(str, enum.Enum):
    BOTH_USE = "both_use"
    EXACTLY_ONE_USES = "exactly_one_uses"
    NOBODY_USES = "nobody_uses"


@dataclass(frozen=True)
class EfficiencyRegime:
    """Where ``C_use / C_i`` falls relative to the mask-usage interval.

    ``regime`` is ``None`` when the ratio sits exactly on an interval end;
    ``boundary`` then names the end ("lo" or "hi").
    """
    regime: Regime | None
    ratio: float
    lo: float
    hi: float
    boundary: str | None = None

    @property
    def interval(self) -> tuple[float, float]:
        return self.lo, self.hi

    def expected_nash(self) -> set[tuple[str, str]] | None:
        if self.regime is Regime.BOTH_USE:
            return {(USE, USE)}
        if self.regime is Regime.EXACTLY_ONE_USES:
            return {(NO, USE), (USE, NO)}
        if self.regime is Regime.NOBODY_USES:
            return {(NO, NO)}
        return None


def efficiency_interval(a: float, b: float, rho: float) -> tuple[float, float]:
    q = rho * (1.0 - rho)
    return a * (1.0 - b) * q, a * q


def classify_efficiency_regime(params: MaskParams) -> EfficiencyRegime:
    if params.c_i == 0:
        raise ParameterError("c_i must be nonzero to form C_use / C_i")
    r = params.c_use / params.c_i
    lo, hi = efficiency_interval(params.a, params.b, params.rho)
    boundary = None
    if r == lo:
        boundary = "lo"
    elif r == hi:
        boundary = "hi"
    if boundary is not None:
        return EfficiencyRegime(None, r, lo, hi, boundary)
    if r < lo:
        regime = Regime.BOTH_USE
    elif r < hi:
        regime = Regime.EXACTLY_ONE_USES
    else:
        regime = Regime.NOBODY_USES
    return EfficiencyRegime(regime, r, lo, hi)


def contact_infection_probability(k: int, n: int, g: int) -> float:
    """Probability that at least one of ``g`` random contacts is infected."""
    if n <= 0:
        raise ParameterError("n_players must be positive")
    return 1.0 - (1.0 - k / n) ** g


def multiplayer_mask_cost(params: MaskParams, action: str, status: HealthStatus) -> float:
    status = HealthStatus(status)
    if action not in BINARY_ACTIONS:
        raise ParameterError(f"action must be one of {BINARY_ACTIONS}, got {action!r}")
    q = contact_infection_probability(params.k_infected, params.n_players, params.g_contacts)
    if status == HealthStatus.INFECTED:
        return params.c_i + (params.c_use if action == USE else 0.0)
    return params.c_use if action == USE else q * params.c_i


@dataclass(frozen=True)
class MultiplayerThreshold:
    q: float
    cost_ratio: float                # C_use / C_i
    susceptible_action: str | None   # None on the boundary q == C_use / C_i
    infected_action: str
    required_cost_multiple: float | None  # 1/q; None when q == 0

    @property
    def boundary(self) -> bool:
        return self.susceptible_action is None


def multiplayer_mask_threshold(params: MaskParams) -> MultiplayerThreshold:
    """Best responses in the N-player game.

    Infected players always prefer ``no``. A susceptible player prefers
    ``use`` once the contact infection probability exceeds ``C_use / C_i``,
    i.e. once ``C_i`` exceeds ``C_use`` by more than ``1/q``.
    """
    q = contact_infection_probability(params.k_infected, params.n_players, params.g_contacts)
    ratio = params.c_use / params.c_i if params.c_i else math.inf
    if q < ratio:
        action = NO
    elif q > ratio:
        action = USE
    else:
        action = None
    return MultiplayerThreshold(
        q=q,
        cost_ratio=ratio,
        susceptible_action=action,
        infected_action=NO,
        required_cost_multiple=None if q == 0 else 1.0 / q,
    )
