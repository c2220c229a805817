"""Distancing games: go/stay matrix game, time-extended utilities, crossover root."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .game_core import PAYOFF, FiniteGame

GO, STAY = "go", "stay"
ACTIONS = (GO, STAY)
SCAN_POINTS = 64


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class DistancingScenario:
    """Symmetric scenario by default; set ``benefit_b2``/``cost_c2`` for an asymmetric one.

    ``benefit_b``/``cost_c`` belong to the row player.
    """
    benefit_b: float = 0.0
    cost_c: float = 0.0
    mortality_m: float = 0.0225
    life_value_l: float = 11.7e6
    rho: float = 0.0025
    cap_t: float | None = None
    benefit_b2: float | None = None
    cost_c2: float | None = None

    def __post_init__(self):
        for name in ("mortality_m", "rho"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ScenarioError(f"{name} must lie in [0, 1], got {v}")
        for name in ("benefit_b", "cost_c", "life_value_l", "benefit_b2", "cost_c2"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ScenarioError(f"{name} must be nonnegative, got {v}")
        if self.cap_t is not None and self.cap_t <= 0:
            raise ScenarioError(f"cap_t must be positive, got {self.cap_t}")

    @property
    def expected_loss(self) -> float:
        """rho * m * L, the expected cost of going out once."""
        return self.rho * self.mortality_m * self.life_value_l

    def player_terms(self) -> tuple[tuple[float, float], tuple[float, float]]:
        b2 = self.benefit_b if self.benefit_b2 is None else self.benefit_b2
        c2 = self.cost_c if self.cost_c2 is None else self.cost_c2
        return (self.benefit_b, self.cost_c), (b2, c2)


def _go_stay_values(b1, c1, b2, c2, loss):
    return [
        [(b1 - loss, b2 - loss), (-loss - c1, -c2)],
        [(-c1, -loss - c2), (-c1, -c2)],
    ]


def build_distancing_game(s: DistancingScenario) -> FiniteGame:
    (b1, c1), (b2, c2) = s.player_terms()
    return FiniteGame(ACTIONS, ACTIONS, _go_stay_values(b1, c1, b2, c2, s.expected_loss), PAYOFF)


@dataclass(frozen=True)
class DistancingRegime:
    stay_stay_always_ne: bool
    go_go_is_ne: bool
    social_optimum: tuple[str, str] | None
    threshold: float          # rho * m * L
    benefit_plus_cost: float  # B + C
    boundary: bool

    def to_dict(self) -> dict:
        return {
            "stay_stay_always_ne": self.stay_stay_always_ne,
            "go_go_is_ne": self.go_go_is_ne,
            "social_optimum": list(self.social_optimum) if self.social_optimum else None,
            "threshold": self.threshold,
            "benefit_plus_cost": self.benefit_plus_cost,
            "boundary": self.boundary,
        }


def classify_distancing(s: DistancingScenario) -> DistancingRegime:
    """(stay, stay) is always an equilibrium; (go, go) joins it iff rho*m*L < B + C.

    Symmetric scenarios only. On equality the boundary flag is set and the
    social optimum is left undecided.
    """
    loss = s.expected_loss
    bc = s.benefit_b + s.cost_c
    boundary = loss == bc
    go_go = loss < bc
    if boundary:
        so = None
    else:
        so = (GO, GO) if go_go else (STAY, STAY)
    return DistancingRegime(True, go_go, so, loss, bc, boundary)


@dataclass(frozen=True)
class TimeProfile:
    """Polynomial benefit and cost curves, coefficients in increasing degree.

    ``benefit_coeffs=[0, 0, 1]`` is ``B(t) = t**2``.
    """
    benefit_coeffs: tuple[float, ...] = (0.0, 0.0, 1.0)
    cost_coeffs: tuple[float, ...] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        for name in ("benefit_coeffs", "cost_coeffs"):
            coeffs = tuple(float(c) for c in getattr(self, name))
            if not coeffs or not all(math.isfinite(c) for c in coeffs):
                raise ScenarioError(f"{name} must be a nonempty list of finite numbers")
            object.__setattr__(self, name, coeffs)

    @classmethod
    def monomials(cls, benefit_degree: int, cost_degree: int = 2) -> "TimeProfile":
        return cls(_monomial(benefit_degree), _monomial(cost_degree))

    def benefit(self, t: float) -> float:
        return _polyval(self.benefit_coeffs, t)

    def cost(self, t: float) -> float:
        return _polyval(self.cost_coeffs, t)

    def check_nonnegative(self, t_lo: float, t_hi: float, points: int = SCAN_POINTS) -> None:
        for t in np.linspace(t_lo, t_hi, points):
            if self.benefit(t) < 0 or self.cost(t) < 0:
                raise ScenarioError(f"B(t) or C(t) is negative at t={t}")


def _monomial(degree: int) -> tuple[float, ...]:
    return tuple([0.0] * degree + [1.0])


def _polyval(coeffs: Sequence[float], t: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def infection_factor(rho: float, t: float) -> float:
    """1 - (1 - rho)**t, the chance of infection over duration ``t``."""
    if t < 0:
        raise ScenarioError(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    if rho == 1.0:
        return 1.0
    return -math.expm1(t * math.log1p(-rho))


def extended_utility(s: DistancingScenario, tp: TimeProfile, t: float, own: str, other: str) -> float:
    if own not in ACTIONS or other not in ACTIONS:
        raise ScenarioError(f"actions must be in {ACTIONS}")
    if own == STAY:
        if t < 0:
            raise ScenarioError(f"t must be nonnegative, got {t}")
        return -tp.cost(t)
    loss = infection_factor(s.rho, t) * s.mortality_m * s.life_value_l
    if other == GO:
        return tp.benefit(t) - loss
    return -loss - tp.cost(t)


def crossover_difference(s: DistancingScenario, tp: TimeProfile, t: float) -> float:
    """Expected infection loss minus (B(t) + C(t)); positive means stay."""
    loss = infection_factor(s.rho, t) * s.mortality_m * s.life_value_l
    return loss - tp.benefit(t) - tp.cost(t)


@dataclass(frozen=True)
class CrossoverResult:
    root: float | None
    residual: float | None
    tolerance: float
    iterations: int
    non_monotone: bool
    sign_changes: int
    scan: tuple[tuple[float, float], ...] = field(repr=False, default=())

    @property
    def found(self) -> bool:
        return self.root is not None


def crossover_time(s: DistancingScenario, tp: TimeProfile, bracket: tuple[float, float],
                   max_iter: int = 200) -> CrossoverResult:
    """Bisection for the duration where going out stops (or starts) paying off.

    A 64-point scan of the bracket is done first to count sign changes and
    detect non-monotone differences. Bisection stops once the residual is
    within ``1e-9 * max(1, m*L)`` or the bracket cannot be split further.
    """
    t_lo, t_hi = map(float, bracket)
    if not (math.isfinite(t_lo) and math.isfinite(t_hi)) or t_lo < 0 or not t_lo < t_hi:
        raise ScenarioError(f"invalid bracket {bracket}")
    tol = 1e-9 * max(1.0, s.mortality_m * s.life_value_l)

    grid = np.linspace(t_lo, t_hi, SCAN_POINTS)
    diffs = [crossover_difference(s, tp, float(t)) for t in grid]
    signs = [np.sign(d) for d in diffs]
    nonzero = [sg for sg in signs if sg != 0]
    sign_changes = sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)
    steps = np.sign(np.diff(diffs))
    steps = steps[steps != 0]
    non_monotone = bool(np.any(steps != steps[0])) if steps.size else False
    scan = tuple((float(t), float(d)) for t, d in zip(grid, diffs))

    f_lo, f_hi = diffs[0], diffs[-1]
    if f_lo == 0:
        return CrossoverResult(t_lo, 0.0, tol, 0, non_monotone, sign_changes, scan)
    if f_hi == 0:
        return CrossoverResult(t_hi, 0.0, tol, 0, non_monotone, sign_changes, scan)
    if np.sign(f_lo) == np.sign(f_hi):
        return CrossoverResult(None, None, tol, 0, non_monotone, sign_changes, scan)

    lo, hi = t_lo, t_hi
    mid, f_mid = lo, f_lo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = crossover_difference(s, tp, mid)
        if abs(f_mid) <= tol or mid in (lo, hi):
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return CrossoverResult(mid, f_mid, tol, it, non_monotone, sign_changes, scan)


def apply_gathering_cap(t_star: float, cap_t: float) -> float:
    """Effective meeting scale under an upper limit: min(T, t*)."""
    if t_star <= 0 or cap_t <= 0:
        raise ScenarioError("t_star and cap_t must be positive")
    return min(cap_t, t_star)


def figure3_rows(s: DistancingScenario, times: Sequence[float], degrees=(2, 3, 4),
                 cost_degree: int = 2) -> list[dict]:
    """Utility curves of (stay, stay) and (go, go) for monomial benefits."""
    profiles = {d: TimeProfile.monomials(d, cost_degree) for d in degrees}
    rows = []
    for t in times:
        row = {"t": float(t), "u_stay": extended_utility(s, profiles[degrees[0]], t, STAY, STAY)}
        for d, tp in profiles.items():
            row[f"u_go_b{d}"] = extended_utility(s, tp, t, GO, GO)
        rows.append(row)
    return rows
