"""Vaccine choice: individual decision problems and the N-player Availability Game.

Two logarithm conventions are supported for the discounted closed forms.
``natural`` is the mathematically consistent antiderivative of ``delta**t``;
``base10`` reproduces published worked numbers. Switching convention rescales
every discounted utility by the same positive constant, so choices do not
change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .quadrature import integrate

ALPHA, BETA, TIE = "alpha", "beta", "tie"
NATURAL, BASE10 = "natural", "base10"
TIE_LAST, TIE_FIRST = "last", "first"

# Utility forms of the symmetric Availability Game.
PRINTED = "printed"                # cost term with the sign as published
COST_SUBTRACTED = "cost_subtracted"  # same magnitude, subtracted from the benefit
DEFINITION = "definition"          # integral definition evaluated by quadrature
SYMMETRIC_FORMS = (PRINTED, COST_SUBTRACTED, DEFINITION)


class VaccinationError(ValueError):
    pass


@dataclass(frozen=True)
class DiscountSpec:
    delta: float = 0.999
    log_convention: str = NATURAL

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise VaccinationError(f"delta must lie in (0, 1), got {self.delta}")
        if self.log_convention not in (NATURAL, BASE10):
            raise VaccinationError(f"unknown log convention {self.log_convention!r}")

    @property
    def log(self) -> float:
        """log(delta) under the selected convention (always negative)."""
        if self.log_convention == BASE10:
            return math.log10(self.delta)
        return math.log(self.delta)

    @property
    def ln(self) -> float:
        return math.log(self.delta)

    @property
    def convention_scale(self) -> float:
        """Factor turning a natural-log integral into this convention's value."""
        return self.ln / self.log

    def power(self, t):
        return self.delta ** t


@dataclass(frozen=True)
class VaccineProfile:
    efficiency_e: float
    duration_d: float = 0.0
    avail_t0: float = 0.0
    side_effect_eps: float = 0.0
    benefit_b: float = 0.0
    side_effect_cost_cs: float = 0.0
    infection_cost_ci: float = 0.0

    def __post_init__(self):
        for name in ("efficiency_e", "side_effect_eps"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise VaccinationError(f"{name} must lie in [0, 1], got {v}")
        for name in ("duration_d", "avail_t0"):
            if getattr(self, name) < 0:
                raise VaccinationError(f"{name} must be nonnegative")


# --- individual decision problems ------------------------------------------

def duration_efficiency_utilities(va: VaccineProfile, vb: VaccineProfile) -> tuple[float, float]:
    return va.efficiency_e * va.duration_d, vb.efficiency_e * vb.duration_d


def _discounted_forever(v: VaccineProfile, disc: DiscountSpec) -> float:
    return -v.efficiency_e / disc.log * disc.power(v.avail_t0)


def availability_efficiency_utilities(va: VaccineProfile, vb: VaccineProfile,
                                      disc: DiscountSpec) -> tuple[float, float]:
    """Discounted protection from availability onwards, without expiry."""
    return _discounted_forever(va, disc), _discounted_forever(vb, disc)


def _discounted_window(v: VaccineProfile, disc: DiscountSpec) -> float:
    # expm1 keeps short windows accurate where d**d_n - 1 would cancel
    grown = math.expm1(v.duration_d * disc.ln)
    return grown * disc.power(v.avail_t0) * v.efficiency_e / disc.log


def duration_efficiency_availability_utilities(va: VaccineProfile, vb: VaccineProfile,
                                               disc: DiscountSpec) -> tuple[float, float]:
    """Discounted protection over ``[t0, t0 + d]`` for each vaccine."""
    return _discounted_window(va, disc), _discounted_window(vb, disc)


def side_effect_utilities(va: VaccineProfile, vb: VaccineProfile) -> tuple[float, float]:
    def u(v):
        return (v.benefit_b - (1.0 - v.efficiency_e) * v.infection_cost_ci
                - v.side_effect_eps * v.side_effect_cost_cs)
    return u(va), u(vb)


def choose_vaccine(utilities: Sequence[float], tol: float = 0.0) -> str:
    ua, ub = utilities
    if not (math.isfinite(ua) and math.isfinite(ub)):
        raise VaccinationError(f"utilities must be finite, got {utilities}")
    if abs(ua - ub) <= tol:
        return TIE
    return ALPHA if ua > ub else BETA


# Integral forms of the three discounted problems; natural log by construction.

def quadrature_utilities(kind: str, va: VaccineProfile, vb: VaccineProfile,
                         disc: DiscountSpec | None = None) -> tuple[float, float]:
    """Evaluate the defining integrals numerically.

    ``kind`` is one of ``duration``, ``availability``, ``combined``. Infinite
    horizons are truncated 60 decay lengths past the start, where the
    remaining mass is below 1e-26 of the total.
    """
    def one(v):
        e = v.efficiency_e
        if kind == "duration":
            return integrate(lambda t: np.full_like(t, e), 0.0, v.duration_d)
        if disc is None:
            raise VaccinationError("discounted integrals need a DiscountSpec")
        d = disc.delta
        if kind == "availability":
            hi = v.avail_t0 + 60.0 / -math.log(d)
            return integrate(lambda t: e * d ** t, v.avail_t0, hi)
        if kind == "combined":
            return integrate(lambda t: e * d ** t, v.avail_t0, v.avail_t0 + v.duration_d)
        raise VaccinationError(f"unknown integral kind {kind!r}")
    return one(va), one(vb)


# --- Availability Game ------------------------------------------------------

@dataclass(frozen=True)
class AvailabilityParams:
    n_players: int = 38
    benefit_alpha: float = 9.0
    benefit_beta: float = 10.0
    infection_cost: float = 1000.0
    t0: float = 28.0
    discount: DiscountSpec = field(default_factory=DiscountSpec)

    def __post_init__(self):
        if int(self.n_players) != self.n_players or self.n_players < 1:
            raise VaccinationError(f"n_players must be a positive integer, got {self.n_players}")
        if self.t0 < 0:
            raise VaccinationError(f"t0 must be nonnegative, got {self.t0}")

    def with_n(self, n: int) -> "AvailabilityParams":
        return AvailabilityParams(n, self.benefit_alpha, self.benefit_beta,
                                  self.infection_cost, self.t0, self.discount)


@dataclass(frozen=True)
class PreferenceProfile:
    """Vaccine preferences ``p`` (0 = alpha now, 1 = beta at ``t0``) per player.

    Players are indexed from 0. Ranks are 1-based positions in the sorted
    vaccination order; ``tie_policy`` decides where a player sits among
    others vaccinated at the same time.
    """
    p: tuple[float, ...]
    tie_policy: str = TIE_LAST

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if not self.p:
            raise VaccinationError("preference profile is empty")
        for x in self.p:
            if not 0.0 <= x <= 1.0:
                raise VaccinationError(f"preferences must lie in [0, 1], got {x}")
        if self.tie_policy not in (TIE_LAST, TIE_FIRST):
            raise VaccinationError(f"unknown tie policy {self.tie_policy!r}")

    @classmethod
    def symmetric(cls, p: float, n: int, tie_policy: str = TIE_LAST) -> "PreferenceProfile":
        return cls((p,) * n, tie_policy)

    def __len__(self):
        return len(self.p)

    def times(self, t0: float) -> list[float]:
        return [x * t0 for x in self.p]

    def sorted_times(self, t0: float) -> list[float]:
        """``[t_hat_0 = 0, t_hat_1, ..., t_hat_N]``."""
        return [0.0] + sorted(self.times(t0))

    def rank(self, n: int, t0: float) -> int:
        times = self.times(t0)
        if not 0 <= n < len(times):
            raise VaccinationError(f"player index {n} out of range for {len(times)} players")
        own = times[n]
        if self.tie_policy == TIE_LAST:
            return sum(1 for t in times if t <= own)
        return sum(1 for t in times if t < own) + 1


def _mixed_benefit(ap: AvailabilityParams, p: float) -> float:
    return p * ap.benefit_beta + (1.0 - p) * ap.benefit_alpha


def _check_profile(ap: AvailabilityParams, prof: PreferenceProfile):
    if len(prof) != ap.n_players:
        raise VaccinationError(
            f"profile has {len(prof)} players but n_players={ap.n_players}")


def availability_utility_direct(ap: AvailabilityParams, prof: PreferenceProfile, n: int) -> float:
    """Utility of player ``n`` from the integral definition, by quadrature.

    The benefit integral runs to ``H = 10 / -ln(delta)`` numerically and adds
    the exact tail beyond ``H``. The infection-cost windows between
    consecutive vaccination times are weighted by the unvaccinated share
    ``1 - i/N``. The natural-log result is rescaled to the profile's log
    convention so it is comparable with the closed forms.
    """
    _check_profile(ap, prof)
    disc = ap.discount
    d, ln = disc.delta, disc.ln
    N = ap.n_players
    p_n = prof.p[n]
    t_hat = prof.sorted_times(ap.t0)
    rank = prof.rank(n, ap.t0)

    value = _mixed_benefit(ap, p_n)
    start = p_n * ap.t0
    horizon = max(10.0 / -ln, start)
    benefit = integrate(lambda t: value * d ** t, start, horizon)
    benefit += value * d ** horizon / -ln

    costs = [
        integrate(lambda t, w=ap.infection_cost * (1.0 - i / N): w * d ** t, t_hat[i], t_hat[i + 1])
        for i in range(rank)
    ]
    return (benefit - math.fsum(costs)) * disc.convention_scale


def telescoped_cost_sum(delta: float, t_hat: Sequence[float], n_players: int, rank: int) -> float:
    """``N - sum_{j=1}^{n'-1} delta^t_j - (N - n' + 1) delta^t_{n'}``.

    Closed form of ``sum_{i=0}^{n'-1} (N - i)(delta^t_i - delta^t_{i+1})``.
    """
    if rank == 0:
        return 0.0
    inner = math.fsum(delta ** t_hat[j] for j in range(1, rank))
    return n_players - inner - (n_players - rank + 1) * delta ** t_hat[rank]


def telescoping_sum_direct(delta: float, t_hat: Sequence[float], n_players: int, rank: int) -> float:
    return math.fsum(
        (n_players - i) * (delta ** t_hat[i] - delta ** t_hat[i + 1]) for i in range(rank))


def printed_cost_sum(delta: float, t_hat: Sequence[float], n_players: int, rank: int) -> float:
    """``N - delta^t_1 - ... - delta^t_{n'}`` as published."""
    return n_players - math.fsum(delta ** t_hat[j] for j in range(1, rank + 1))


def availability_utility_closed(ap: AvailabilityParams, prof: PreferenceProfile, n: int,
                                form: str = PRINTED) -> float:
    """Closed-form utility of player ``n``.

    ``printed`` evaluates the published expression verbatim.
    ``cost_subtracted`` keeps the published cost magnitude but subtracts it.
    ``definition`` is the exact antiderivative of the integral definition,
    using the telescoped window sum.
    """
    _check_profile(ap, prof)
    disc = ap.discount
    d, log = disc.delta, disc.log
    N = ap.n_players
    p_n = prof.p[n]
    t_hat = prof.sorted_times(ap.t0)
    rank = prof.rank(n, ap.t0)

    benefit = d ** (p_n * ap.t0) * _mixed_benefit(ap, p_n) / -log
    if form == PRINTED:
        return benefit - ap.infection_cost * printed_cost_sum(d, t_hat, N, rank) / (N * log)
    if form == COST_SUBTRACTED:
        return benefit + ap.infection_cost * printed_cost_sum(d, t_hat, N, rank) / (N * log)
    if form == DEFINITION:
        return benefit + ap.infection_cost * telescoped_cost_sum(d, t_hat, N, rank) / (N * log)
    raise VaccinationError(f"unknown closed form {form!r}")


def symmetric_utility(ap: AvailabilityParams, p: float, form: str = PRINTED,
                      tie_policy: str = TIE_LAST) -> float:
    """Utility of a player when all N players share preference ``p``.

    ``printed``: ``d^(p t0) (p Bb + (1-p) Ba) / -log d - Ci (N - d^(p t0)) / (N log d)``.
    """
    if not 0.0 <= p <= 1.0:
        raise VaccinationError(f"p must lie in [0, 1], got {p}")
    disc = ap.discount
    d, log = disc.delta, disc.log
    N = ap.n_players
    x = d ** (p * ap.t0)
    benefit = x * _mixed_benefit(ap, p) / -log
    if form == PRINTED:
        return benefit - ap.infection_cost * (N - x) / (N * log)
    if form == COST_SUBTRACTED:
        return benefit + ap.infection_cost * (N - x) / (N * log)
    if form == DEFINITION:
        prof = PreferenceProfile.symmetric(p, N, tie_policy)
        return availability_utility_direct(ap, prof, 0)
    raise VaccinationError(f"unknown symmetric form {form!r}")


@dataclass(frozen=True)
class SymmetricEquilibrium:
    kind: str                      # interior | boundary | degenerate
    p: float | None                # chosen preference (None if undecided)
    p_star: float | None           # published stationary point
    lhs: float | None = None       # Bb d^t0 - Ba
    rhs: float | None = None       # (Ci / N)(1 - d^t0)
    flagged: bool = False          # an equality made the case split ambiguous
    note: str = ""

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("kind", "p", "p_star", "lhs", "rhs", "flagged", "note")}


def symmetric_equilibrium(ap: AvailabilityParams) -> SymmetricEquilibrium:
    """Case split for the symmetric equilibrium preference.

    ``p* = (Ci + Ba N) / ((Ba - Bb) N) - 1 / (t0 log d)`` evaluated as
    published; interior when strictly inside (0, 1), otherwise the endpoint
    chosen by comparing ``Bb d^t0 - Ba`` with ``(Ci/N)(1 - d^t0)``.
    """
    ba, bb, ci, N = ap.benefit_alpha, ap.benefit_beta, ap.infection_cost, ap.n_players
    if ba == bb:
        raise VaccinationError("benefit_alpha == benefit_beta leaves p* undefined")
    if ap.t0 == 0:
        return SymmetricEquilibrium("degenerate", None, None,
                                    note="t0 = 0: both vaccines available at once")
    log = ap.discount.log
    p_star = (ci + ba * N) / ((ba - bb) * N) - 1.0 / (ap.t0 * log)
    if 0.0 < p_star < 1.0:
        return SymmetricEquilibrium("interior", p_star, p_star)
    x = ap.discount.power(ap.t0)
    lhs = bb * x - ba
    rhs = ci / N * (1.0 - x)
    flagged = p_star in (0.0, 1.0) or lhs == rhs
    if lhs < rhs:
        p = 0.0
    elif lhs > rhs:
        p = 1.0
    else:
        p = None
    return SymmetricEquilibrium("boundary", p, p_star, lhs, rhs, flagged)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(fn: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-12, max_iter: int = 200) -> float:
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class ArgmaxResult:
    p: float
    utility: float
    grid_index: int
    interior: bool


def numeric_argmax(fn: Callable[[float], float], grid_points: int = 1001) -> ArgmaxResult:
    """Grid scan of ``fn`` over [0, 1] with golden-section refinement.

    Ties on the grid go to the lowest index. Refinement searches between the
    neighbours of the best grid point and is kept only if it improves.
    """
    if grid_points < 2:
        raise VaccinationError("grid_points must be at least 2")
    grid = np.linspace(0.0, 1.0, grid_points)
    values = [fn(float(p)) for p in grid]
    k = int(np.argmax(values))
    best_p, best_u = float(grid[k]), values[k]
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, grid_points - 1)])
    p_ref = golden_section_max(fn, lo, hi)
    u_ref = fn(p_ref)
    if u_ref > best_u:
        best_p, best_u = p_ref, u_ref
    interior = 0 < k < grid_points - 1
    return ArgmaxResult(best_p, best_u, k, interior)


def symmetric_argmax_numeric(ap: AvailabilityParams, grid_points: int = 1001,
                             form: str = PRINTED) -> ArgmaxResult:
    return numeric_argmax(lambda p: symmetric_utility(ap, p, form), grid_points)


@dataclass
class Lemma7Report:
    tolerance: float
    players: list[dict]
    telescoping_residual: float
    passed: bool

    @property
    def max_residual(self) -> float:
        return max(r["abs_diff_printed"] for r in self.players)

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance if math.isfinite(self.tolerance) else "inf",
            "passed": self.passed,
            "max_residual_printed": self.max_residual,
            "telescoping_residual": self.telescoping_residual,
            "players": self.players,
        }


def verify_lemma7(ap: AvailabilityParams, prof: PreferenceProfile, tolerance: float = 1e-9) -> Lemma7Report:
    """Compare the integral definition with the published closed form, player by player.

    Also reports the definition-consistent closed form and the worst residual
    of the telescoping identity over all players' ranks.
    """
    _check_profile(ap, prof)
    d = ap.discount.delta
    t_hat = prof.sorted_times(ap.t0)
    rows, tele = [], 0.0
    for n in range(ap.n_players):
        rank = prof.rank(n, ap.t0)
        direct = availability_utility_direct(ap, prof, n)
        printed = availability_utility_closed(ap, prof, n, PRINTED)
        exact = availability_utility_closed(ap, prof, n, DEFINITION)
        tele = max(tele, abs(telescoping_sum_direct(d, t_hat, ap.n_players, rank)
                             - telescoped_cost_sum(d, t_hat, ap.n_players, rank)))
        rows.append({
            "player": n,
            "p": prof.p[n],
            "rank": rank,
            "direct": direct,
            "closed_printed": printed,
            "closed_definition": exact,
            "abs_diff_printed": abs(direct - printed),
            "abs_diff_definition": abs(direct - exact),
        })
    passed = all(r["abs_diff_printed"] <= tolerance for r in rows)
    return Lemma7Report(tolerance, rows, tele, passed)


def figure5_rows(ap: AvailabilityParams, points: int = 101) -> list[dict]:
    rows = []
    for p in np.linspace(0.0, 1.0, points):
        p = float(p)
        rows.append({
            "p": p,
            "u_printed": symmetric_utility(ap, p, PRINTED),
            "u_cost_subtracted": symmetric_utility(ap, p, COST_SUBTRACTED),
            "u_definition": symmetric_utility(ap, p, DEFINITION),
        })
    return rows
