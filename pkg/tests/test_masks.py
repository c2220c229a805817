import logging
import math

import pytest
from hypothesis import assume, given, strategies as st

from pandemic_games import game_core as gc
from pandemic_games import masks
from pandemic_games.masks import HealthStatus as HS
from pandemic_games.masks import MaskParams, Regime

S, I = HS.SUSCEPTIBLE, HS.INFECTED


def ne(game):
    return {tuple(p) for p in gc.pure_nash_equilibria(game)}


def so(game):
    return {tuple(p) for p in gc.social_optima(game)}


class TestBasicGame:
    def test_both_susceptible_cells(self):
        g = masks.build_basic_mask_game(MaskParams(c_out=2, c_in=7), S, S)
        assert g.cell("no", "no") == (0, 0)
        assert g.cell("in", "in") == (7, 7)

    def test_mixed_cells(self):
        g = masks.build_basic_mask_game(MaskParams(c_out=1, c_in=10, c_i=1000), S, I)
        assert g.cell("no", "out") == (0, 1001)
        assert g.cell("in", "no") == (10, 1000)

    def test_both_infected_cells(self):
        g = masks.build_basic_mask_game(MaskParams(c_out=1, c_i=1000), I, I)
        assert g.cell("out", "out") == (1001, 1001)

    def test_susceptible_is_row_whatever_the_order(self):
        mp = MaskParams()
        assert masks.build_basic_mask_game(mp, I, S) == masks.build_basic_mask_game(mp, S, I)

    def test_ordering_warning(self, caplog):
        with caplog.at_level(logging.WARNING):
            masks.build_basic_mask_game(MaskParams(c_out=5, c_in=1), S, S)
        assert "violate" in caplog.text

    @given(st.floats(0.01, 10), st.floats(1.01, 50), st.floats(1.01, 500))
    def test_theorem_one_over_parameters(self, c_out, in_mult, i_mult):
        c_in = c_out * in_mult
        mp = MaskParams(c_out=c_out, c_in=c_in, c_i=c_in * i_mult)
        for s1, s2 in ((S, S), (I, I)):
            g = masks.build_basic_mask_game(mp, s1, s2)
            assert ne(g) == so(g) == {("no", "no")}
        g = masks.build_basic_mask_game(mp, S, I)
        assert ne(g) == {("in", "no")}
        assert so(g) == {("no", "out")}


class TestBayesian:
    def test_cells(self):
        g = masks.build_bayesian_mask_game(MaskParams(rho=0.5, c_i=8, c_use=1))
        assert g.cell("no", "no") == (2, 2)
        assert g.cell("no", "use") == (0, 1)
        assert g.cell("use", "no") == (1, 0)
        assert g.cell("use", "use") == (1, 1)

    def test_no_risk(self):
        g = masks.build_bayesian_mask_game(MaskParams(rho=0.0))
        assert g.cell("no", "no") == (0, 0)
        assert ne(g) == {("no", "no")}

    @given(st.floats(0.01, 0.99), st.floats(0.1, 10), st.floats(1.001, 100))
    def test_one_user_exactly_when_expected_cost_exceeds_mask(self, rho, c_use, mult):
        q = rho * (1 - rho)
        mp = MaskParams(rho=rho, c_use=c_use, c_i=c_use * mult / q)
        assert ne(masks.build_bayesian_mask_game(mp)) == {("no", "use"), ("use", "no")}

    # dyadic inputs keep the shifted arithmetic exact
    @given(st.integers(0, 64).map(lambda i: i / 64), st.integers(0, 10).map(float),
           st.integers(0, 5000).map(float))
    def test_baseline_shift_keeps_equilibria(self, rho, c_use, c_i):
        mp = MaskParams(rho=rho, c_use=c_use, c_i=c_i)
        plain = masks.build_bayesian_mask_game(mp)
        full = masks.build_bayesian_mask_game(mp, include_baseline=True)
        assert ne(plain) == ne(full)
        assert so(plain) == so(full)
        assert full.cell("use", "use")[0] == pytest.approx(c_use + rho * c_i)


class TestEfficiency:
    def test_perfect_protection(self):
        g = masks.build_efficiency_mask_game(MaskParams(a=1, b=1, rho=0.3, c_use=2))
        assert g.cell("use", "use") == (2, 2)

    def test_zero_efficiency_cells(self):
        mp = MaskParams(a=0, b=0, rho=0.3, c_use=2, c_i=50)
        g = masks.build_efficiency_mask_game(mp)
        hat = 0.3 * 0.7 * 50
        assert g.cell("no", "use") == pytest.approx((hat, hat + 2))

    def test_example_cell(self):
        g = masks.build_efficiency_mask_game(MaskParams(a=1 / 3, b=2 / 3, rho=0.0025, c_i=1, c_use=0))
        assert g.cell("no", "no")[1] == pytest.approx(0.00249375, abs=1e-15)

    def test_lower_right_is_symmetric(self):
        g = masks.build_efficiency_mask_game(MaskParams(a=0.2, b=0.7, rho=0.4, c_use=3, c_i=90))
        r, c = g.cell("use", "use")
        assert r == c == pytest.approx(3 + 0.8 * 0.3 * 0.24 * 90)

    @given(st.integers(0, 64).map(lambda i: i / 64), st.integers(0, 16).map(lambda i: i / 4),
           st.integers(1, 1000).map(float))
    def test_zero_efficiency_means_use_buys_nothing(self, rho, c_use, c_i):
        # with a=b=0 every use cell is the no-mask cell plus C_use for the wearer
        mp = MaskParams(a=0, b=0, rho=rho, c_use=c_use, c_i=c_i)
        g = masks.build_efficiency_mask_game(mp)
        hat = masks.bayesian_infection_cost(mp)
        assert g.cell("no", "no") == (hat, hat)
        assert g.cell("use", "use") == pytest.approx((hat + c_use, hat + c_use))
        assert g.cell("use", "no") == pytest.approx((hat + c_use, hat))
        if c_use > 0:
            assert ne(g) == {("no", "no")}

    @pytest.mark.parametrize("r,regime", [(0.10, Regime.BOTH_USE), (0.20, Regime.EXACTLY_ONE_USES),
                                          (0.30, Regime.NOBODY_USES)])
    def test_classifier_examples(self, r, regime):
        reg = masks.classify_efficiency_regime(MaskParams(a=1, b=0.5, rho=0.5, c_use=r, c_i=1))
        assert reg.interval == (0.125, 0.25)
        assert reg.regime is regime

    def test_worked_interval(self):
        lo, hi = masks.efficiency_interval(1 / 3, 2 / 3, 0.0025)
        assert lo == pytest.approx(2.7708e-4, abs=1e-8)
        assert hi == pytest.approx(8.3125e-4, abs=1e-10)

    def test_boundary_flagged(self):
        reg = masks.classify_efficiency_regime(MaskParams(a=1, b=0.5, rho=0.5, c_use=0.25, c_i=1))
        assert reg.regime is None and reg.boundary == "hi"
        assert reg.expected_nash() is None

    def test_zero_infection_cost_rejected(self):
        with pytest.raises(masks.ParameterError):
            masks.classify_efficiency_regime(MaskParams(c_i=0))

    @given(st.floats(0.01, 1), st.floats(0, 0.99), st.floats(0.01, 0.99), st.floats(1e-4, 0.3))
    def test_classifier_matches_solver(self, a, b, rho, r):
        mp = MaskParams(a=a, b=b, rho=rho, c_use=r, c_i=1.0)
        reg = masks.classify_efficiency_regime(mp)
        assume(reg.regime is not None)
        assert ne(masks.build_efficiency_mask_game(mp)) == reg.expected_nash()


class TestMultiplayer:
    def test_infected_use(self):
        assert masks.multiplayer_mask_cost(MaskParams(c_i=1000, c_use=2), "use", I) == 1002

    def test_no_infected(self):
        assert masks.multiplayer_mask_cost(MaskParams(k_infected=0), "no", S) == 0

    def test_two_contacts(self):
        mp = MaskParams(n_players=400, k_infected=1, g_contacts=2, c_i=1)
        assert masks.multiplayer_mask_cost(mp, "no", S) == pytest.approx(0.00499375, abs=1e-15)

    @pytest.mark.parametrize("g,inv_q", [(1, 400.0), (2, 200.2503), (4, 100.3758), (8, 50.4391)])
    def test_required_multiple(self, g, inv_q):
        th = masks.multiplayer_mask_threshold(MaskParams(n_players=400, k_infected=1, g_contacts=g))
        assert th.required_cost_multiple == pytest.approx(inv_q, abs=1e-4)
        assert th.infected_action == "no"

    def test_no_infected_means_no_mask(self):
        th = masks.multiplayer_mask_threshold(MaskParams(k_infected=0, c_use=0.5))
        assert th.q == 0 and th.susceptible_action == "no"
        assert th.required_cost_multiple is None

    def test_threshold_boundary(self):
        th = masks.multiplayer_mask_threshold(MaskParams(n_players=4, k_infected=1, c_use=1, c_i=4))
        assert th.boundary

    def test_zero_players_rejected(self):
        with pytest.raises(masks.ParameterError):
            masks.contact_infection_probability(0, 0, 1)

    @given(st.integers(1, 500), st.data())
    def test_monotone_in_contacts_and_infected(self, n, data):
        k = data.draw(st.integers(0, n))
        g = data.draw(st.integers(1, 20))
        def cost(k, g):
            return masks.multiplayer_mask_cost(
                MaskParams(n_players=n, k_infected=k, g_contacts=g), "no", S)
        assert cost(k, g + 1) >= cost(k, g)
        if k < n:
            assert cost(k + 1, g) >= cost(k, g)

    @given(st.integers(1, 1000), st.integers(1, 30))
    def test_q_formula(self, n, g):
        q = masks.contact_infection_probability(1, n, g)
        assert q == pytest.approx(-math.expm1(g * math.log1p(-1 / n)) if n > 1 else 1.0, rel=1e-9)


@pytest.mark.parametrize("field,value", [("rho", 1.5), ("a", -0.1), ("c_i", -1), ("g_contacts", 0)])
def test_invalid_params(field, value):
    with pytest.raises(masks.ParameterError, match=field):
        MaskParams(**{field: value})
