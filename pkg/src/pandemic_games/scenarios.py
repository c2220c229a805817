"""Scenario configuration, sweeps and dispatch to the model modules.

A scenario is one JSON document::

    {"model": "distancing",
     "parameters": {"benefit_b": 400, "cost_c": 300},
     "sweep": [{"name": "benefit_b", "values": [100, 400]}]}

Several sweep entries expand to their Cartesian product, in the order given.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import distancing as dist
from . import game_core as gc
from . import masks
from . import vaccination as vac


class ConfigError(ValueError):
    """Invalid scenario document: parse error, unknown model or out-of-domain value."""


class NumericError(RuntimeError):
    """A model raised while evaluating a sweep point."""


# --- parameter domains ------------------------------------------------------

def _real(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


DOMAINS: dict[str, tuple[str, Callable[[Any], bool]]] = {
    "real": ("a finite number", _real),
    "nonneg": ("a finite number >= 0", lambda v: _real(v) and v >= 0),
    "pos": ("a finite number > 0", lambda v: _real(v) and v > 0),
    "prob": ("a number in [0, 1]", lambda v: _real(v) and 0 <= v <= 1),
    "open01": ("a number in (0, 1)", lambda v: _real(v) and 0 < v < 1),
    "posint": ("an integer >= 1", lambda v: _int(v) and v >= 1),
    "nonnegint": ("an integer >= 0", lambda v: _int(v) and v >= 0),
    "status": ("'susceptible' or 'infected'", lambda v: v in ("susceptible", "infected")),
    "convention": ("'natural' or 'base10'", lambda v: v in (vac.NATURAL, vac.BASE10)),
    "tie": ("'last' or 'first'", lambda v: v in (vac.TIE_LAST, vac.TIE_FIRST)),
    "bool": ("true or false", lambda v: isinstance(v, bool)),
    "coeffs": ("a nonempty list of finite numbers",
               lambda v: isinstance(v, list) and bool(v) and all(_real(c) for c in v)),
    "bracket": ("a pair [lo, hi] with 0 <= lo < hi",
                lambda v: isinstance(v, list) and len(v) == 2 and all(_real(c) for c in v)
                and 0 <= v[0] < v[1]),
    "optpos": ("null or a number > 0", lambda v: v is None or (_real(v) and v > 0)),
    "optnonneg": ("null or a number >= 0", lambda v: v is None or (_real(v) and v >= 0)),
    "optdegree": ("null or an integer >= 0", lambda v: v is None or (_int(v) and v >= 0)),
    "probs": ("a nonempty list of numbers in [0, 1]",
              lambda v: isinstance(v, list) and bool(v) and all(_real(c) and 0 <= c <= 1 for c in v)),
    "optprobs": ("null or a list of numbers in [0, 1]",
                 lambda v: v is None or (isinstance(v, list) and bool(v)
                                         and all(_real(c) and 0 <= c <= 1 for c in v))),
    "grid": ("an integer >= 2", lambda v: _int(v) and v >= 2),
}

_DISCOUNT = {"delta": (0.999, "open01"), "log_convention": (vac.NATURAL, "convention")}

SCHEMAS: dict[str, dict[str, tuple[Any, str]]] = {
    "mask_basic": {
        "c_out": (1.0, "nonneg"), "c_in": (10.0, "nonneg"), "c_i": (1000.0, "nonneg"),
        "status_row": ("susceptible", "status"), "status_col": ("infected", "status"),
    },
    "mask_bayesian": {
        "rho": (0.0025, "prob"), "c_use": (1.0, "nonneg"), "c_i": (1000.0, "nonneg"),
        "include_baseline": (False, "bool"),
    },
    "mask_efficiency": {
        "rho": (0.0025, "prob"), "c_use": (1.0, "nonneg"), "c_i": (1000.0, "pos"),
        "a": (1 / 3, "prob"), "b": (2 / 3, "prob"), "include_baseline": (False, "bool"),
    },
    "mask_multiplayer": {
        "n_players": (400, "posint"), "k_infected": (1, "nonnegint"), "g_contacts": (1, "posint"),
        "c_use": (1.0, "nonneg"), "c_i": (1000.0, "nonneg"),
    },
    "distancing": {
        "benefit_b": (400.0, "nonneg"), "cost_c": (300.0, "nonneg"),
        "mortality_m": (0.0225, "prob"), "life_value_l": (11.7e6, "nonneg"), "rho": (0.0025, "prob"),
        "benefit_b2": (None, "optnonneg"), "cost_c2": (None, "optnonneg"),
    },
    "distancing_extended": {
        "mortality_m": (0.0225, "prob"), "life_value_l": (11.7e6, "nonneg"), "rho": (0.0025, "prob"),
        "benefit_coeffs": ([0.0, 0.0, 1.0], "coeffs"), "cost_coeffs": ([0.0, 0.0, 1.0], "coeffs"),
        "benefit_degree": (None, "optdegree"), "bracket": ([1.0, 400.0], "bracket"),
        "cap_t": (None, "optpos"), "curve_points": (64, "grid"),
    },
    "vacc_duration": {
        "e_alpha": (0.76, "prob"), "e_beta": (0.95, "prob"),
        "d_alpha": (49.0, "nonneg"), "d_beta": (35.0, "nonneg"),
    },
    "vacc_availability": {
        "e_alpha": (0.76, "prob"), "e_beta": (0.95, "prob"), "t0": (28.0, "nonneg"), **_DISCOUNT,
    },
    "vacc_combined": {
        "e_alpha": (0.76, "prob"), "e_beta": (0.95, "prob"),
        "d_alpha": (49.0, "nonneg"), "d_beta": (35.0, "nonneg"), "t0": (28.0, "nonneg"), **_DISCOUNT,
    },
    "vacc_side_effect": {
        "e_alpha": (0.76, "prob"), "e_beta": (0.95, "prob"),
        "benefit_alpha": (100.0, "real"), "benefit_beta": (100.0, "real"),
        "infection_cost": (1000.0, "nonneg"), "side_effect_cost": (1000.0, "nonneg"),
        "eps": (0.001, "prob"),
    },
    "availability_game": {
        "n_players": (38, "posint"), "benefit_alpha": (9.0, "real"), "benefit_beta": (10.0, "real"),
        "infection_cost": (1000.0, "nonneg"), "t0": (28.0, "nonneg"), **_DISCOUNT,
        "grid_points": (1001, "grid"), "figure_points": (101, "grid"),
        "profile": (None, "optprobs"), "tie_policy": (vac.TIE_LAST, "tie"),
    },
}

MODELS = tuple(SCHEMAS)
MATRIX_MODELS = ("mask_basic", "mask_bayesian", "mask_efficiency", "distancing")
VACCINE_MODELS = ("vacc_duration", "vacc_availability", "vacc_combined", "vacc_side_effect",
                  "availability_game")


def _check_value(model: str, name: str, value):
    schema = SCHEMAS[model]
    if name not in schema:
        raise ConfigError(f"parameter {name!r} does not exist on model {model!r}; "
                          f"known: {sorted(schema)}")
    desc, ok = DOMAINS[schema[name][1]]
    if not ok(value):
        raise ConfigError(f"parameter {name!r} = {value!r} violates constraint: must be {desc}")


@dataclass(frozen=True)
class ScenarioConfig:
    model: str
    parameters: dict
    sweep: tuple[tuple[str, tuple], ...] = ()

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("scenario document must be a JSON object")
        model = data.get("model")
        if model not in SCHEMAS:
            raise ConfigError(f"unknown model {model!r}; expected one of {list(MODELS)}")
        params = data.get("parameters", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError("'parameters' must be an object")
        for name, value in params.items():
            _check_value(model, name, value)
        sweep = []
        for entry in data.get("sweep", []) or []:
            if isinstance(entry, dict):
                name, values = entry.get("name"), entry.get("values")
            elif isinstance(entry, (list, tuple)) and len(entry) == 2:
                name, values = entry
            else:
                raise ConfigError(f"sweep entry {entry!r} must be {{name, values}} or [name, values]")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"sweep values for {name!r} must be a nonempty list")
            for v in values:
                _check_value(model, name, v)
            sweep.append((name, tuple(values)))
        unknown = set(data) - {"model", "parameters", "sweep", "description"}
        if unknown:
            raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
        return cls(model, dict(params), tuple(sweep))

    def points(self) -> list[dict]:
        """Fully resolved parameter dicts, one per sweep point."""
        base = {k: v for k, (v, _) in SCHEMAS[self.model].items()}
        base.update(self.parameters)
        if not self.sweep:
            return [dict(base)]
        names = [n for n, _ in self.sweep]
        out = []
        for combo in itertools.product(*(vals for _, vals in self.sweep)):
            point = dict(base)
            point.update(zip(names, combo))
            out.append(point)
        return out


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None
    return ScenarioConfig.from_dict(data)


# --- model dispatch ---------------------------------------------------------

@dataclass(frozen=True)
class RunOptions:
    tolerance: float = 0.0
    log_convention: str | None = None   # overrides configured convention when set


def _discount(p: dict, opts: RunOptions) -> vac.DiscountSpec:
    return vac.DiscountSpec(p["delta"], opts.log_convention or p["log_convention"])


def _profiles(pairs):
    return [list(x) for x in pairs]


def _mask_params(p: dict) -> masks.MaskParams:
    keys = {f for f in masks.MaskParams.__dataclass_fields__}
    return masks.MaskParams(**{k: v for k, v in p.items() if k in keys})


def _solve(game: gc.FiniteGame, tol: float) -> dict:
    return {"game": game.to_dict(), "equilibrium": gc.analyze(game, tol).to_dict()}


def _run_mask_basic(p, opts):
    mp = _mask_params(p)
    game = masks.build_basic_mask_game(mp, p["status_row"], p["status_col"])
    out = _solve(game, opts.tolerance)
    if p["status_row"] == p["status_col"]:
        expected_ne = expected_so = [["no", "no"]]
    else:
        expected_ne, expected_so = [["in", "no"]], [["no", "out"]]
    ne = [[q["row"], q["col"]] for q in out["equilibrium"]["pure_nash"]]
    so = [[q["row"], q["col"]] for q in out["equilibrium"]["social_optima"]]
    ok = ne == expected_ne and so == expected_so
    out["verification"] = {"expected_nash": expected_ne, "expected_social_optima": expected_so,
                           "matches_full_information_result": ok}
    notes = [] if ok else [{"kind": "full_information_result", "nash": ne, "social_optima": so}]
    return out, notes


def _run_mask_bayesian(p, opts):
    mp = _mask_params(p)
    game = masks.build_bayesian_mask_game(mp, p["include_baseline"])
    out = _solve(game, opts.tolerance)
    ne = {(q["row"], q["col"]) for q in out["equilibrium"]["pure_nash"]}
    one_user = {("no", "use"), ("use", "no")}
    hat = masks.bayesian_infection_cost(mp)
    out["verification"] = {
        "one_user_equilibria": ne == one_user,
        "published_premise_c_i_gt_4_c_use": mp.c_i > 4 * mp.c_use,
        "exact_condition_rho_1mrho_c_i_gt_c_use": hat > mp.c_use,
    }
    notes = []
    if mp.c_i > 4 * mp.c_use and ne != one_user:
        notes.append({"kind": "bayesian_premise_insufficient", "nash": sorted(ne),
                      "rho_1mrho_c_i": hat, "c_use": mp.c_use})
    return out, notes


def _run_mask_efficiency(p, opts):
    mp = _mask_params(p)
    game = masks.build_efficiency_mask_game(mp, p["include_baseline"])
    out = _solve(game, opts.tolerance)
    reg = masks.classify_efficiency_regime(mp)
    solver = {(q["row"], q["col"]) for q in out["equilibrium"]["pure_nash"]}
    expected = reg.expected_nash()
    out["classification"] = {
        "regime": reg.regime.value if reg.regime else None,
        "boundary": reg.boundary,
        "ratio": reg.ratio,
        "interval": [reg.lo, reg.hi],
    }
    out["verification"] = {"classifier_matches_solver": None if expected is None else expected == solver}
    notes = []
    if expected is not None and expected != solver:
        notes.append({"kind": "classifier_vs_solver", "classifier": sorted(expected),
                      "solver": sorted(solver)})
    return out, notes


def _run_mask_multiplayer(p, opts):
    mp = _mask_params(p)
    th = masks.multiplayer_mask_threshold(mp)
    costs = {
        f"{status.value}_{action}": masks.multiplayer_mask_cost(mp, action, status)
        for status in masks.HealthStatus for action in masks.BINARY_ACTIONS
    }
    return {
        "classification": {
            "q": th.q,
            "cost_ratio": th.cost_ratio,
            "susceptible_action": th.susceptible_action,
            "infected_action": th.infected_action,
            "boundary": th.boundary,
            "required_cost_multiple": th.required_cost_multiple,
        },
        "costs": costs,
    }, []


def _distancing_scenario(p) -> dist.DistancingScenario:
    return dist.DistancingScenario(
        benefit_b=p.get("benefit_b", 0.0), cost_c=p.get("cost_c", 0.0),
        mortality_m=p["mortality_m"], life_value_l=p["life_value_l"], rho=p["rho"],
        cap_t=p.get("cap_t"), benefit_b2=p.get("benefit_b2"), cost_c2=p.get("cost_c2"))


def _run_distancing(p, opts):
    s = _distancing_scenario(p)
    out = _solve(dist.build_distancing_game(s), opts.tolerance)
    notes = []
    if s.benefit_b2 is None and s.cost_c2 is None:
        reg = dist.classify_distancing(s)
        out["classification"] = reg.to_dict()
        solver = {(q["row"], q["col"]) for q in out["equilibrium"]["pure_nash"]}
        agrees = ((dist.STAY, dist.STAY) in solver) and (((dist.GO, dist.GO) in solver) == reg.go_go_is_ne)
        out["verification"] = {"classifier_matches_solver": agrees or reg.boundary}
        if not (agrees or reg.boundary):
            notes.append({"kind": "classifier_vs_solver", "solver": sorted(solver)})
    return out, notes


def _time_profile(p) -> dist.TimeProfile:
    if p.get("benefit_degree") is not None:
        benefit = list(dist._monomial(p["benefit_degree"]))
    else:
        benefit = p["benefit_coeffs"]
    return dist.TimeProfile(tuple(benefit), tuple(p["cost_coeffs"]))


def _run_distancing_extended(p, opts):
    s = _distancing_scenario(p)
    tp = _time_profile(p)
    lo, hi = p["bracket"]
    tp.check_nonnegative(lo, hi)
    res = dist.crossover_time(s, tp, (lo, hi))
    capped = None
    if res.found and s.cap_t is not None and res.root > 0:
        capped = dist.apply_gathering_cap(res.root, s.cap_t)
    times = [lo + (hi - lo) * i / (p["curve_points"] - 1) for i in range(p["curve_points"])]
    curve = [
        {"t": t,
         "u_stay": dist.extended_utility(s, tp, t, dist.STAY, dist.STAY),
         "u_go": dist.extended_utility(s, tp, t, dist.GO, dist.GO)}
        for t in times
    ]
    return {
        "classification": {
            "crossover_time": res.root,
            "residual": res.residual,
            "tolerance": res.tolerance,
            "iterations": res.iterations,
            "non_monotone": res.non_monotone,
            "sign_changes": res.sign_changes,
            "capped_scale": capped,
        },
        "verification": {"residual_within_tolerance":
                         None if res.residual is None else abs(res.residual) <= res.tolerance},
        "curve": curve,
    }, []


def _vaccines(p, *, with_t0=False, with_d=False):
    va = vac.VaccineProfile(p["e_alpha"], duration_d=p.get("d_alpha", 0.0) if with_d else 0.0)
    vb = vac.VaccineProfile(p["e_beta"], duration_d=p.get("d_beta", 0.0) if with_d else 0.0,
                            avail_t0=p["t0"] if with_t0 else 0.0)
    return va, vb


def _pair_out(us, kind=None, va=None, vb=None, disc=None, tol=0.0):
    out = {"classification": {"u_alpha": us[0], "u_beta": us[1], "choice": vac.choose_vaccine(us, tol)}}
    if kind is not None:
        nat = vac.DiscountSpec(disc.delta, vac.NATURAL) if disc is not None else None
        if kind == "duration":
            closed = us
        elif kind == "availability":
            closed = vac.availability_efficiency_utilities(va, vb, nat)
        else:
            closed = vac.duration_efficiency_availability_utilities(va, vb, nat)
        quad = vac.quadrature_utilities(kind, va, vb, nat)
        rel = max(_rel(c, q) for c, q in zip(closed, quad))
        out["verification"] = {"closed_natural": list(closed), "quadrature": list(quad),
                               "max_relative_error": rel, "passed": rel <= 1e-9}
    return out


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def _run_vacc_duration(p, opts):
    va, vb = _vaccines(p, with_d=True)
    return _pair_out(vac.duration_efficiency_utilities(va, vb), "duration", va, vb), []


def _run_vacc_availability(p, opts):
    va, vb = _vaccines(p, with_t0=True)
    disc = _discount(p, opts)
    us = vac.availability_efficiency_utilities(va, vb, disc)
    return _pair_out(us, "availability", va, vb, disc), []


def _run_vacc_combined(p, opts):
    va, vb = _vaccines(p, with_t0=True, with_d=True)
    disc = _discount(p, opts)
    us = vac.duration_efficiency_availability_utilities(va, vb, disc)
    return _pair_out(us, "combined", va, vb, disc), []


def _run_vacc_side_effect(p, opts):
    va = vac.VaccineProfile(p["e_alpha"], benefit_b=p["benefit_alpha"],
                            infection_cost_ci=p["infection_cost"])
    vb = vac.VaccineProfile(p["e_beta"], benefit_b=p["benefit_beta"], side_effect_eps=p["eps"],
                            side_effect_cost_cs=p["side_effect_cost"],
                            infection_cost_ci=p["infection_cost"])
    return _pair_out(vac.side_effect_utilities(va, vb)), []


def _availability_params(p, opts) -> vac.AvailabilityParams:
    return vac.AvailabilityParams(p["n_players"], p["benefit_alpha"], p["benefit_beta"],
                                  p["infection_cost"], p["t0"], _discount(p, opts))


def theorem8_comparison(ap: vac.AvailabilityParams, grid_points: int = 1001) -> tuple[dict, list]:
    """Published equilibrium point against the numeric argmax of each utility form."""
    eq = vac.symmetric_equilibrium(ap)
    argmax = {form: vac.symmetric_argmax_numeric(ap, grid_points, form) for form in vac.SYMMETRIC_FORMS}
    step = 1.0 / (grid_points - 1)
    out = {
        "theorem_point": eq.to_dict(),
        "argmax": {f: {"p": r.p, "utility": r.utility, "interior": r.interior}
                   for f, r in argmax.items()},
    }
    notes = []
    if eq.p is not None:
        for form, r in argmax.items():
            if abs(r.p - eq.p) > step:
                notes.append({"kind": "theorem8_vs_argmax", "form": form,
                              "theorem_p": eq.p, "argmax_p": r.p})
    return out, notes


def _run_availability_game(p, opts):
    ap = _availability_params(p, opts)
    eq = vac.symmetric_equilibrium(ap)
    comparison, notes = theorem8_comparison(ap, p["grid_points"])
    prof_p = p["profile"]
    if prof_p is None:
        prof_p = [i / (ap.n_players - 1) if ap.n_players > 1 else 0.0 for i in range(ap.n_players)]
    if len(prof_p) != ap.n_players:
        raise ConfigError(f"profile has {len(prof_p)} entries but n_players={ap.n_players}")
    prof = vac.PreferenceProfile(tuple(prof_p), p["tie_policy"])
    tol = opts.tolerance if opts.tolerance > 0 else 1e-9
    lemma = vac.verify_lemma7(ap, prof, tol)
    if not lemma.passed:
        notes.append({"kind": "lemma7_residual", "max_residual_printed": lemma.max_residual})
    return {
        "classification": eq.to_dict(),
        "verification": {"theorem8": comparison, "lemma7": lemma.to_dict()},
        "curve": vac.figure5_rows(ap, p["figure_points"]),
    }, notes


DISPATCH = {
    "mask_basic": _run_mask_basic,
    "mask_bayesian": _run_mask_bayesian,
    "mask_efficiency": _run_mask_efficiency,
    "mask_multiplayer": _run_mask_multiplayer,
    "distancing": _run_distancing,
    "distancing_extended": _run_distancing_extended,
    "vacc_duration": _run_vacc_duration,
    "vacc_availability": _run_vacc_availability,
    "vacc_combined": _run_vacc_combined,
    "vacc_side_effect": _run_vacc_side_effect,
    "availability_game": _run_availability_game,
}


# --- runs -------------------------------------------------------------------

@dataclass
class RunResult:
    model: str
    records: list[dict]
    checks: list[dict] = field(default_factory=list)
    curves: dict[str, list[dict]] = field(default_factory=dict)

    @property
    def discrepancies(self) -> list[dict]:
        found = [d for r in self.records for d in r.get("discrepancies", [])]
        found += [c for c in self.checks if c["status"] == "discrepancy"]
        return found

    @property
    def failures(self) -> list[dict]:
        return [c for c in self.checks if c["status"] == "fail"]

    def exit_code(self) -> int:
        if self.failures:
            return 2
        if self.discrepancies:
            return 3
        return 0

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "records": [{k: v for k, v in r.items() if k != "curve"} for r in self.records],
            "checks": self.checks,
            "summary": {
                "points": len(self.records),
                "checks_passed": sum(c["status"] == "pass" for c in self.checks),
                "checks_failed": len(self.failures),
                "discrepancies": len(self.discrepancies),
                "exit_code": self.exit_code(),
            },
        }


def _evaluate(args) -> dict:
    model, index, point, opts = args
    try:
        outputs, notes = DISPATCH[model](point, opts)
    except ConfigError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise NumericError(f"{model} sweep point {index} {point}: {exc}") from exc
    return {"index": index, "model": model, "parameters": point,
            "outputs": outputs, "discrepancies": notes}


def _degree_ordering_check(records: list[dict]) -> dict:
    """Higher benefit degree should cross over at a strictly smaller scale."""
    pairs = sorted((r["parameters"]["benefit_degree"], r["outputs"]["classification"]["crossover_time"])
                   for r in records if r["parameters"]["benefit_degree"] is not None)
    roots = [t for _, t in pairs]
    ok = None not in roots and all(a > b for a, b in zip(roots, roots[1:]))
    return {"name": "crossover_roots_decrease_with_benefit_degree", "expected": True,
            "actual": ok, "tolerance": None, "status": "pass" if ok else "fail",
            "note": f"roots by degree {[[d, t] for d, t in pairs]}"}


def run(config: ScenarioConfig, opts: RunOptions | None = None, jobs: int = 1) -> RunResult:
    """Evaluate every sweep point; results are ordered by sweep index."""
    opts = opts or RunOptions()
    tasks = [(config.model, i, pt, opts) for i, pt in enumerate(config.points())]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_evaluate, tasks))
    else:
        records = [_evaluate(t) for t in tasks]
    result = RunResult(config.model, records)
    if config.model == "distancing_extended" and [n for n, _ in config.sweep] == ["benefit_degree"]:
        result.checks.append(_degree_ordering_check(records))
    for r in records:
        curve = r["outputs"].get("curve")
        if curve:
            result.curves[f"{config.model}_{r['index']:03d}"] = curve
    return result
