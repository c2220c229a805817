"""Two-player finite games: pure Nash equilibria, social optima, dominance, PoA.

Values are stored per cell as ``(row_value, col_value)``. Under ``cost``
orientation lower is better, under ``payoff`` orientation higher is better.
Every comparison goes through a single ``tol`` argument; the default of 0
means exact floating comparison.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

COST = "cost"
PAYOFF = "payoff"
ORIENTATIONS = (COST, PAYOFF)

ROW = "row"
COL = "col"
PLAYERS = (ROW, COL)


class GameError(ValueError):
    """Raised for malformed games or unknown action labels."""


class ActionProfile(NamedTuple):
    row: str
    col: str


@dataclass(frozen=True)
class FiniteGame:
    row_actions: tuple[str, ...]
    col_actions: tuple[str, ...]
    values: tuple[tuple[tuple[float, float], ...], ...]
    orientation: str = COST

    def __post_init__(self):
        object.__setattr__(self, "row_actions", tuple(self.row_actions))
        object.__setattr__(self, "col_actions", tuple(self.col_actions))
        object.__setattr__(
            self,
            "values",
            tuple(tuple((float(r), float(c)) for r, c in row) for row in self.values),
        )
        if self.orientation not in ORIENTATIONS:
            raise GameError(f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")
        for name, actions in (("row_actions", self.row_actions), ("col_actions", self.col_actions)):
            if not actions:
                raise GameError(f"{name} is empty")
            if len(set(actions)) != len(actions):
                raise GameError(f"{name} contains duplicate labels: {actions}")
        if len(self.values) != len(self.row_actions):
            raise GameError("values must have one row per row action")
        for row in self.values:
            if len(row) != len(self.col_actions):
                raise GameError("values must have one cell per column action")
            for cell in row:
                if not all(math.isfinite(v) for v in cell):
                    raise GameError(f"non-finite value {cell}")

    @classmethod
    def from_cells(cls, row_actions, col_actions, cells: dict, orientation=COST) -> "FiniteGame":
        """Build from a ``{(row, col): (row_value, col_value)}`` mapping."""
        values = [[cells[(r, c)] for c in col_actions] for r in row_actions]
        return cls(tuple(row_actions), tuple(col_actions), values, orientation)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_actions), len(self.col_actions)

    def actions(self, player: str) -> tuple[str, ...]:
        if player == ROW:
            return self.row_actions
        if player == COL:
            return self.col_actions
        raise GameError(f"unknown player {player!r}")

    def cell(self, row: str, col: str) -> tuple[float, float]:
        try:
            i = self.row_actions.index(row)
            j = self.col_actions.index(col)
        except ValueError:
            raise GameError(f"unknown profile ({row!r}, {col!r})") from None
        return self.values[i][j]

    def value(self, player: str, own: str, other: str) -> float:
        """Value to ``player`` when it plays ``own`` against ``other``."""
        if player == ROW:
            return self.cell(own, other)[0]
        if player == COL:
            return self.cell(other, own)[1]
        raise GameError(f"unknown player {player!r}")

    def total(self, profile: ActionProfile) -> float:
        r, c = self.cell(*profile)
        return r + c

    def profiles(self) -> list[ActionProfile]:
        """All profiles in row-major order."""
        return [ActionProfile(r, c) for r in self.row_actions for c in self.col_actions]

    def map_values(self, fn, orientation=None) -> "FiniteGame":
        """Apply ``fn(row_value, col_value) -> (row_value, col_value)`` cell-wise."""
        values = [[fn(*cell) for cell in row] for row in self.values]
        return FiniteGame(self.row_actions, self.col_actions, values, orientation or self.orientation)

    def shifted(self, row_shift: float = 0.0, col_shift: float = 0.0) -> "FiniteGame":
        return self.map_values(lambda r, c: (r + row_shift, c + col_shift))

    def negated(self) -> "FiniteGame":
        """Same preferences, opposite orientation."""
        flipped = PAYOFF if self.orientation == COST else COST
        return self.map_values(lambda r, c: (-r, -c), flipped)

    def to_dict(self) -> dict:
        return {
            "orientation": self.orientation,
            "row_actions": list(self.row_actions),
            "col_actions": list(self.col_actions),
            "values": [list(cell) for row in self.values for cell in row],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteGame":
        try:
            rows = list(data["row_actions"])
            cols = list(data["col_actions"])
            flat = list(data["values"])
            orientation = data.get("orientation", COST)
        except (KeyError, TypeError) as exc:
            raise GameError(f"malformed game document: {exc}") from None
        if len(flat) != len(rows) * len(cols):
            raise GameError(
                f"expected {len(rows) * len(cols)} value pairs, got {len(flat)}")
        for pair in flat:
            if len(pair) != 2:
                raise GameError(f"value entry {pair!r} is not a pair")
        values = [flat[i * len(cols):(i + 1) * len(cols)] for i in range(len(rows))]
        return cls(tuple(rows), tuple(cols), values, orientation)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "FiniteGame":
        return cls.from_dict(json.loads(text))


def _better(game: FiniteGame, a: float, b: float, tol: float) -> bool:
    """True when ``a`` is strictly better than ``b`` by more than ``tol``."""
    if game.orientation == COST:
        return a < b - tol
    return a > b + tol


def _tied(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


def best_response(game: FiniteGame, player: str, opponent_action: str, tol: float = 0.0) -> set[str]:
    """Actions of ``player`` that are optimal against a fixed opponent action."""
    if opponent_action not in game.actions(_other(player)):
        raise GameError(f"unknown {_other(player)} action {opponent_action!r}")
    own = game.actions(player)
    vals = {a: game.value(player, a, opponent_action) for a in own}
    best = min(vals.values()) if game.orientation == COST else max(vals.values())
    return {a for a, v in vals.items() if _tied(v, best, tol)}


def _other(player: str) -> str:
    if player == ROW:
        return COL
    if player == COL:
        return ROW
    raise GameError(f"unknown player {player!r}")


def _has_improving_deviation(game, profile, player, tol, strict_only=True):
    own, other = (profile.row, profile.col) if player == ROW else (profile.col, profile.row)
    current = game.value(player, own, other)
    for alt in game.actions(player):
        if alt == own:
            continue
        v = game.value(player, alt, other)
        if _better(game, v, current, tol):
            return True
        if not strict_only and _tied(v, current, tol):
            return True
    return False


def is_nash(game: FiniteGame, profile: ActionProfile, tol: float = 0.0) -> bool:
    return not any(_has_improving_deviation(game, profile, p, tol) for p in PLAYERS)


def is_strict_nash(game: FiniteGame, profile: ActionProfile, tol: float = 0.0) -> bool:
    """Every unilateral deviation makes the deviator strictly worse off."""
    return not any(
        _has_improving_deviation(game, profile, p, tol, strict_only=False) for p in PLAYERS)


def pure_nash_equilibria(game: FiniteGame, tol: float = 0.0) -> list[ActionProfile]:
    """Weak pure Nash equilibria in row-major order."""
    return [p for p in game.profiles() if is_nash(game, p, tol)]


def social_optima(game: FiniteGame, tol: float = 0.0) -> list[ActionProfile]:
    profiles = game.profiles()
    totals = [game.total(p) for p in profiles]
    best = min(totals) if game.orientation == COST else max(totals)
    return [p for p, t in zip(profiles, totals) if _tied(t, best, tol)]


@dataclass(frozen=True)
class Dominance:
    dominant: dict[str, frozenset[str]]
    dominated: dict[str, frozenset[str]]


def _weakly_dominates(game, player, a, b, tol):
    others = game.actions(_other(player))
    va = [game.value(player, a, o) for o in others]
    vb = [game.value(player, b, o) for o in others]
    no_worse = all(_better(game, x, y, tol) or _tied(x, y, tol) for x, y in zip(va, vb))
    somewhere = any(_better(game, x, y, tol) for x, y in zip(va, vb))
    return no_worse and somewhere


def _strictly_dominates(game, player, a, b, tol):
    others = game.actions(_other(player))
    return all(
        _better(game, game.value(player, a, o), game.value(player, b, o), tol) for o in others)


def dominance(game: FiniteGame, tol: float = 0.0) -> Dominance:
    """Weakly dominant and strictly dominated actions for each player.

    An action is weakly dominant when it weakly dominates every other action
    of the same player (no worse everywhere, strictly better somewhere).
    """
    dominant, dominated = {}, {}
    for player in PLAYERS:
        acts = game.actions(player)
        dominant[player] = frozenset(
            a for a in acts
            if len(acts) > 1 and all(_weakly_dominates(game, player, a, b, tol) for b in acts if b != a)
        )
        dominated[player] = frozenset(
            b for b in acts
            if any(_strictly_dominates(game, player, a, b, tol) for a in acts if a != b)
        )
    return Dominance(dominant, dominated)


def price_of_anarchy(game: FiniteGame, tol: float = 0.0) -> float | None:
    """Worst pure-NE welfare relative to the social optimum.

    Returns ``None`` (undefined) when no pure NE exists, when the denominator
    is zero, or when the two welfare totals do not share a strictly positive
    sign, since the ratio is then not a meaningful efficiency loss.
    """
    ne = pure_nash_equilibria(game, tol)
    if not ne:
        return None
    so_total = game.total(social_optima(game, tol)[0])
    ne_totals = [game.total(p) for p in ne]
    if game.orientation == COST:
        num, den = max(ne_totals), so_total
    else:
        num, den = so_total, min(ne_totals)
    if den <= 0 or num <= 0:
        return None
    return num / den


@dataclass(frozen=True)
class EquilibriumReport:
    pure_nash: tuple[ActionProfile, ...]
    strict_nash: tuple[ActionProfile, ...]
    social_optima: tuple[ActionProfile, ...]
    dominant_actions: dict[str, frozenset[str]]
    dominated_actions: dict[str, frozenset[str]]
    price_of_anarchy: float | None
    tol: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pure_nash": [
                {"row": p.row, "col": p.col, "strict": p in self.strict_nash}
                for p in self.pure_nash
            ],
            "social_optima": [{"row": p.row, "col": p.col} for p in self.social_optima],
            "dominant_actions": {k: sorted(v) for k, v in self.dominant_actions.items()},
            "dominated_actions": {k: sorted(v) for k, v in self.dominated_actions.items()},
            "price_of_anarchy": "undefined" if self.price_of_anarchy is None else self.price_of_anarchy,
            "tolerance": self.tol,
        }


def analyze(game: FiniteGame, tol: float = 0.0) -> EquilibriumReport:
    ne = pure_nash_equilibria(game, tol)
    dom = dominance(game, tol)
    return EquilibriumReport(
        pure_nash=tuple(ne),
        strict_nash=tuple(p for p in ne if is_strict_nash(game, p, tol)),
        social_optima=tuple(social_optima(game, tol)),
        dominant_actions=dom.dominant,
        dominated_actions=dom.dominated,
        price_of_anarchy=price_of_anarchy(game, tol),
        tol=tol,
    )


def profiles_of(pairs: Iterable[Sequence[str]]) -> set[ActionProfile]:
    """Convenience: ``{("no", "use"), ...}`` -> set of ActionProfile."""
    return {ActionProfile(*p) for p in pairs}
