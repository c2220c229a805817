import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pandemic_games import vaccination as vac
from pandemic_games.quadrature import integrate
from pandemic_games.vaccination import (BASE10, NATURAL, AvailabilityParams, DiscountSpec,
                                        PreferenceProfile, VaccineProfile)

ALPHA = VaccineProfile(0.76, duration_d=49)
BETA = VaccineProfile(0.95, duration_d=35, avail_t0=28)
NAT, B10 = DiscountSpec(0.999, NATURAL), DiscountSpec(0.999, BASE10)
LN10 = math.log(10)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


class TestIndividual:
    def test_duration_efficiency(self):
        ua, ub = vac.duration_efficiency_utilities(ALPHA, BETA)
        assert abs(ua - 37.24) <= 1e-10 and abs(ub - 33.25) <= 1e-10
        assert vac.choose_vaccine((ua, ub)) == vac.ALPHA

    def test_zero_duration(self):
        assert vac.duration_efficiency_utilities(VaccineProfile(0.9), VaccineProfile(0.5))[0] == 0

    def test_duration_tie(self):
        us = vac.duration_efficiency_utilities(VaccineProfile(0.5, 40), VaccineProfile(0.8, 25))
        assert vac.choose_vaccine(us) == vac.TIE

    def test_availability_base10(self):
        ua, ub = vac.availability_efficiency_utilities(ALPHA, BETA, B10)
        assert abs(ua - 1749) <= 1 and abs(ub - 2126) <= 1

    def test_availability_natural_rescales(self):
        nat = vac.availability_efficiency_utilities(ALPHA, BETA, NAT)
        b10 = vac.availability_efficiency_utilities(ALPHA, BETA, B10)
        assert nat == pytest.approx([u / LN10 for u in b10], rel=1e-12)
        assert vac.choose_vaccine(nat) == vac.choose_vaccine(b10) == vac.BETA

    def test_no_delay_ratio(self):
        ua, ub = vac.availability_efficiency_utilities(ALPHA, VaccineProfile(0.95), NAT)
        assert ub / ua == pytest.approx(0.95 / 0.76, rel=1e-14)

    def test_combined_base10(self):
        ua, ub = vac.duration_efficiency_availability_utilities(ALPHA, BETA, B10)
        assert abs(ua - 84) <= 1 and abs(ub - 73) <= 1

    def test_combined_same_window_compares_efficiency(self):
        us = vac.duration_efficiency_availability_utilities(
            VaccineProfile(0.6, 30), VaccineProfile(0.7, 30), NAT)
        assert vac.choose_vaccine(us) == vac.BETA

    def test_side_effect(self):
        va = VaccineProfile(0.76, benefit_b=100, infection_cost_ci=1000)
        vb = VaccineProfile(0.95, benefit_b=100, infection_cost_ci=1000, side_effect_eps=0.001,
                            side_effect_cost_cs=1000)
        ua, ub = vac.side_effect_utilities(va, vb)
        assert ua == pytest.approx(-140, abs=1e-9) and ub == pytest.approx(49, abs=1e-9)

    def test_side_effect_tie_and_perfect(self):
        v = VaccineProfile(0.8, benefit_b=10, infection_cost_ci=100)
        assert vac.choose_vaccine(vac.side_effect_utilities(v, v)) == vac.TIE
        perfect = VaccineProfile(1.0, benefit_b=7, infection_cost_ci=100)
        assert vac.side_effect_utilities(perfect, perfect) == (7, 7)

    def test_invalid_delta(self):
        with pytest.raises(vac.VaccinationError):
            DiscountSpec(1.0)

    def test_nonfinite_choice(self):
        with pytest.raises(vac.VaccinationError):
            vac.choose_vaccine((math.inf, 1.0))

    @given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(1e-3, 1e3))
    def test_choice_survives_rescaling(self, a, b, k):
        assert vac.choose_vaccine((a, b)) == vac.choose_vaccine((a * k, b * k)) or \
            math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-300)

    @given(st.floats(0.01, 1), st.floats(0.5, 0.99999), st.floats(0, 500), st.floats(1e-3, 5))
    def test_penalty_decreasing_in_delay(self, e, delta, t0, extra):
        disc = DiscountSpec(delta)
        va = VaccineProfile(0.5)
        u1 = vac.availability_efficiency_utilities(va, VaccineProfile(e, avail_t0=t0), disc)[1]
        u2 = vac.availability_efficiency_utilities(va, VaccineProfile(e, avail_t0=t0 + extra), disc)[1]
        assert u2 < u1


class TestQuadrature:
    def test_polynomial_exact(self):
        assert integrate(lambda t: t ** 5, 0.0, 2.0) == pytest.approx(64 / 6, rel=1e-14)

    durations = st.one_of(st.just(0.0), st.floats(1e-3, 200))

    @given(st.floats(0.01, 1), st.floats(0.01, 1), durations, durations,
           st.floats(0, 100), st.floats(0.9, 0.9999))
    def test_closed_forms_match_integrals(self, ea, eb, da, db, t0, delta):
        va, vb = VaccineProfile(ea, da), VaccineProfile(eb, db, avail_t0=t0)
        disc = DiscountSpec(delta)
        for kind, closed in (("duration", vac.duration_efficiency_utilities(va, vb)),
                             ("availability", vac.availability_efficiency_utilities(va, vb, disc)),
                             ("combined", vac.duration_efficiency_availability_utilities(va, vb, disc))):
            quad = vac.quadrature_utilities(kind, va, vb, disc)
            for c, q in zip(closed, quad):
                assert c == q or rel(c, q) <= 1e-9


def params(**kw):
    return AvailabilityParams(**kw)


class TestAvailabilityGame:
    def test_single_player_early(self):
        ap = params(n_players=1)
        u = vac.availability_utility_direct(ap, PreferenceProfile((0.0,)), 0)
        assert u == pytest.approx(9 / -math.log(0.999), rel=1e-12)
        assert u == pytest.approx(8995.5, abs=0.01)
        assert vac.availability_utility_closed(ap, PreferenceProfile((0.0,)), 0) == pytest.approx(u, rel=1e-12)

    def test_no_infection_cost(self):
        ap = params(n_players=3, infection_cost=0.0)
        prof = PreferenceProfile((0.0, 0.5, 1.0))
        benefit = 0.999 ** 28 * 10 / -math.log(0.999)
        assert vac.availability_utility_direct(ap, prof, 2) == pytest.approx(benefit, rel=1e-11)

    def test_three_player_windows(self):
        ap = params(n_players=3)
        prof = PreferenceProfile((0.0, 0.5, 1.0))
        assert prof.sorted_times(28) == [0.0, 0.0, 14.0, 28.0]
        assert prof.rank(2, 28) == 3
        ln = math.log(0.999)
        window = lambda a, b: (0.999 ** b - 0.999 ** a) / ln
        cost = 1000 * (1 * window(0, 0) + 2 / 3 * window(0, 14) + 1 / 3 * window(14, 28))
        benefit = 0.999 ** 28 * 10 / -ln
        assert vac.availability_utility_direct(ap, prof, 2) == pytest.approx(benefit - cost, rel=1e-11)
        assert vac.availability_utility_closed(ap, prof, 2, vac.DEFINITION) == pytest.approx(
            benefit - cost, rel=1e-11)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=8), st.data())
    def test_windows_partition_and_weights(self, ps, data):
        prof = PreferenceProfile(tuple(ps))
        n = data.draw(st.integers(0, len(ps) - 1))
        t_hat = prof.sorted_times(28.0)
        rank = prof.rank(n, 28.0)
        edges = t_hat[:rank + 1]
        assert edges[0] == 0.0 and edges[-1] == pytest.approx(ps[n] * 28.0)
        assert all(a <= b for a, b in zip(edges, edges[1:]))
        weights = [1 - i / len(ps) for i in range(rank)]
        assert all(a >= b for a, b in zip(weights, weights[1:]))

    def test_tie_policies(self):
        last = PreferenceProfile((0.5, 0.5, 0.5))
        first = PreferenceProfile((0.5, 0.5, 0.5), vac.TIE_FIRST)
        assert last.rank(0, 28) == 3 and first.rank(0, 28) == 1

    @given(st.lists(st.floats(0, 200), min_size=1, max_size=12), st.floats(0.5, 0.9999), st.data())
    def test_telescoping_identity(self, times, delta, data):
        t_hat = [0.0] + sorted(times)
        n = len(times)
        rank = data.draw(st.integers(1, n))
        direct = vac.telescoping_sum_direct(delta, t_hat, n, rank)
        closed = vac.telescoped_cost_sum(delta, t_hat, n, rank)
        assert abs(direct - closed) <= 1e-12 * max(1.0, n)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=5), st.floats(0, 5000))
    def test_definition_form_matches_integral(self, ps, ci):
        ap = params(n_players=len(ps), infection_cost=ci)
        prof = PreferenceProfile(tuple(ps))
        for n in range(len(ps)):
            d = vac.availability_utility_direct(ap, prof, n)
            c = vac.availability_utility_closed(ap, prof, n, vac.DEFINITION)
            assert abs(d - c) <= 1e-9 * max(1.0, abs(d))

    def test_lemma7_report(self):
        ap = params(n_players=3)
        rep = vac.verify_lemma7(ap, PreferenceProfile((0.0, 0.5, 1.0)))
        assert not rep.passed and rep.max_residual > 1.0
        assert all(r["abs_diff_definition"] < 1e-8 for r in rep.players)
        assert rep.telescoping_residual < 1e-12
        rep_inf = vac.verify_lemma7(ap, PreferenceProfile((0.0, 0.5, 1.0)), math.inf)
        assert rep_inf.passed and rep_inf.max_residual == rep.max_residual
        assert rep_inf.to_dict()["tolerance"] == "inf"

    def test_lemma7_single_player_early(self):
        rep = vac.verify_lemma7(params(n_players=1), PreferenceProfile((0.0,)))
        assert rep.passed

    def test_profile_size_mismatch(self):
        with pytest.raises(vac.VaccinationError):
            vac.availability_utility_direct(params(n_players=2), PreferenceProfile((0.0,)), 0)


class TestSymmetric:
    def test_endpoints(self):
        ap = params()
        log = math.log(0.999)
        x = 0.999 ** 28
        assert vac.symmetric_utility(ap, 0.0) == pytest.approx(9 / -log - 1000 * 37 / (38 * log), rel=1e-13)
        assert vac.symmetric_utility(ap, 1.0) == pytest.approx(
            x * 10 / -log - 1000 * (38 - x) / (38 * log), rel=1e-13)

    def test_interior_at_38(self):
        eq = vac.symmetric_equilibrium(params())
        assert eq.kind == "interior"
        assert eq.p == pytest.approx(0.380, abs=0.005)

    @pytest.mark.parametrize("n,p", [(36, 0.0), (40, 1.0)])
    def test_boundaries(self, n, p):
        eq = vac.symmetric_equilibrium(params(n_players=n))
        assert eq.kind == "boundary" and eq.p == p
        x = 0.999 ** 28
        assert x == pytest.approx(0.97238, abs=1e-5)
        assert eq.lhs == pytest.approx(10 * x - 9) and eq.rhs == pytest.approx(1000 / n * (1 - x))

    def test_equal_benefits_rejected(self):
        with pytest.raises(vac.VaccinationError):
            vac.symmetric_equilibrium(params(benefit_beta=9.0))

    def test_zero_delay_degenerate(self):
        assert vac.symmetric_equilibrium(params(t0=0.0)).kind == "degenerate"

    def test_argmax_without_infection_cost(self):
        late = vac.symmetric_argmax_numeric(params(infection_cost=0.0))
        assert late.p == 1.0
        early = vac.symmetric_argmax_numeric(params(infection_cost=0.0, benefit_beta=9.1))
        assert early.p == 0.0

    def test_stationary_point_maximizes_subtracted_form(self):
        ap = params()
        r = vac.symmetric_argmax_numeric(ap, form=vac.COST_SUBTRACTED)
        assert r.interior
        assert r.p == pytest.approx(vac.symmetric_equilibrium(ap).p, abs=1e-6)

    @pytest.mark.parametrize("form,ap", [
        (vac.PRINTED, AvailabilityParams(38, 45.0, 46.0, 380.0)),
        (vac.COST_SUBTRACTED, AvailabilityParams()),
    ])
    def test_stationarity(self, form, ap):
        r = vac.symmetric_argmax_numeric(ap, form=form)
        assert r.interior
        h = 1e-5
        u = lambda p: vac.symmetric_utility(ap, p, form)
        slope = (u(r.p + h) - u(r.p - h)) / (2 * h)
        assert abs(slope) <= 1e-3 * abs(r.utility)

    @pytest.mark.parametrize("n", [36, 38, 40])
    def test_log_convention_invariance(self, n):
        nat = params(n_players=n)
        b10 = params(n_players=n, discount=B10)
        for form in (vac.PRINTED, vac.COST_SUBTRACTED):
            a = vac.symmetric_argmax_numeric(nat, form=form)
            b = vac.symmetric_argmax_numeric(b10, form=form)
            assert a.p == pytest.approx(b.p, abs=1e-6)
            assert b.utility == pytest.approx(a.utility * LN10, rel=1e-9)

    def test_p_star_depends_on_convention(self):
        # only the printed 1/(t0 log d) term sees the convention
        assert vac.symmetric_equilibrium(params(discount=B10)).p_star > 1

    def test_golden_section(self):
        assert vac.golden_section_max(lambda x: -(x - 0.3) ** 2, 0, 1) == pytest.approx(0.3, abs=1e-9)

    def test_argmax_lowest_index_tie(self):
        assert vac.numeric_argmax(lambda p: 1.0, 11).grid_index == 0

    def test_figure5_columns(self):
        rows = vac.figure5_rows(params(), 5)
        assert list(rows[0]) == ["p", "u_printed", "u_cost_subtracted", "u_definition"]
        assert [r["p"] for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_quadrature_nodes_deterministic():
    a = integrate(np.exp, 0.0, 1.0)
    assert a == integrate(np.exp, 0.0, 1.0)
    assert a == pytest.approx(math.e - 1, rel=1e-15)
