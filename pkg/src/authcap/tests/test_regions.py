import math

import numpy as np
import pytest

from app.errors import ValidationError
from app.probcore import bsc, bsc_pair, identity_channel, uniform
from app.regions import (CONDITIONAL_3, G_KEY, KEY, SECRECY_3, SUM_RATE, AuxiliaryChoice, BscFamily, RatePoint,
                         RegionBounds, SweepSettings, best_gungor, best_theorem3, bsc_auxiliary, gungor_contains,
                         gungor_exponent, max_alpha_gungor, max_alpha_theorem1, max_alpha_theorem3, rate_split,
                         region_bounds, relaxed_auxiliary, sweep_bsc, theorem1_backoff_contains, theorem1_contains,
                         theorem2_transform, theorem3_contains)

FAST = SweepSettings(resolution=20, rho_steps=4, refine=False)
BOUNDS = RegionBounds(mutual=0.5, conditional=0.3, l_value=0.2, witness=bsc(0.1))


def h2(p: float) -> float:
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_points(rng, count: int, top: float = 0.6) -> list[RatePoint]:
    return [RatePoint(*rng.uniform(0.0, top, size=3)) for _ in range(count)]


class TestRatePoint:

    def test_parse(self):
        assert RatePoint.parse("0.5,0.1,0.2") == RatePoint(0.5, 0.1, 0.2)

    @pytest.mark.parametrize("text", ["0.5,0.1", "a,b,c", "0.5,-0.1,0.2", "0.5,nan,0.2"])
    def test_rejects_bad_points(self, text):
        with pytest.raises(ValidationError):
            RatePoint.parse(text)


class TestAuxiliaryChoice:

    def test_needs_unique_parents(self):
        with pytest.raises(ValidationError):
            AuxiliaryChoice(bsc(0.1), bsc(0.2), uniform(2))

    def test_relaxed_choice_allowed(self):
        assert relaxed_auxiliary(0.1, 0.2).relaxed

    def test_alphabets_must_chain(self):
        aux = bsc_auxiliary(0.1)
        with pytest.raises(ValidationError):
            AuxiliaryChoice(aux.rho, aux.sigma, uniform(2))


class TestTransform:

    def test_one_round(self):
        assert theorem2_transform(RatePoint(0.5, 0.1, 0.2), 0.2, 1) == RatePoint(0.3, 0.3, 0.6)

    def test_two_rounds(self):
        assert theorem2_transform(RatePoint(0.4, 0.0, 0.1), 0.2, 2) == RatePoint(0.2, 0.2, 0.4)

    def test_zero_beta_is_identity(self):
        p = RatePoint(0.0, 0.1, 0.2)
        assert theorem2_transform(p, 0.0, 1) == p

    @pytest.mark.parametrize("beta", [0.5, 0.7, -0.1])
    def test_beta_must_stay_below_rate(self, beta):
        with pytest.raises(ValidationError):
            theorem2_transform(RatePoint(0.5, 0.1, 0.2), beta, 1)


class TestRegionMembership:

    def test_origin_is_always_contained(self, pair):
        aux = bsc_auxiliary(0.1)
        origin = RatePoint(0.0, 0.0, 0.0)
        assert theorem1_contains(origin, aux, pair, resolution=20, family="bsc").contained
        assert theorem3_contains(origin, aux, pair, resolution=20, family="bsc").contained

    def test_bounds_are_cached(self, pair):
        aux = bsc_auxiliary(0.15)
        assert region_bounds(pair, aux, 20, "bsc") is region_bounds(pair, aux, 20, "bsc")

    def test_binding_constraints(self):
        verdict = theorem3_contains(RatePoint(0.1, 0.25, 0.3), bsc_auxiliary(0.0), bsc_pair(0.1, 0.3),
                                    bounds=BOUNDS)
        assert verdict.contained
        assert set(verdict.binding_constraints) == {SECRECY_3}
        assert verdict.slacks[SUM_RATE] == pytest.approx(0.15)

    def test_violated_constraint_has_negative_slack(self):
        verdict = theorem1_contains(RatePoint(0.4, 0.15, 0.1), bsc_auxiliary(0.0), bsc_pair(0.1, 0.3),
                                    bounds=BOUNDS)
        assert not verdict.contained
        assert verdict.slacks[SUM_RATE] < 0
        assert verdict.slacks[KEY] < 0

    def test_downward_closed_in_rate_and_alpha_upward_in_key(self, rng):
        aux = bsc_auxiliary(0.0)
        pair = bsc_pair(0.1, 0.3)
        for p in random_points(rng, 300):
            if not theorem3_contains(p, aux, pair, bounds=BOUNDS).contained:
                continue
            lower = RatePoint(p.r * rng.uniform(), p.alpha * rng.uniform(), p.kappa + rng.uniform(0.0, 0.2))
            assert theorem3_contains(lower, aux, pair, bounds=BOUNDS).contained

    def test_transform_maps_first_region_into_closure(self, rng):
        aux = bsc_auxiliary(0.0)
        pair = bsc_pair(0.1, 0.3)
        seen = 0
        for p in random_points(rng, 500, top=0.4):
            if not theorem1_contains(p, aux, pair, bounds=BOUNDS).contained:
                continue
            seen += 1
            assert theorem3_contains(p, aux, pair, bounds=BOUNDS).contained
            for beta in np.linspace(0.0, p.r, 5, endpoint=False):
                image = theorem2_transform(p, float(beta), aux.j)
                assert theorem3_contains(image, aux, pair, bounds=BOUNDS, tol=1e-12).contained
        assert seen > 0

    def test_closed_form_maxima(self):
        assert max_alpha_theorem1(BOUNDS, 0.1, 0.5, 1) == pytest.approx(0.2)
        assert max_alpha_theorem3(BOUNDS, 0.1, 0.3, 1) == pytest.approx(0.25)
        assert max_alpha_theorem3(BOUNDS, 0.1, 0.3, 2) == pytest.approx(0.5 / 1.5)
        assert max_alpha_theorem3(BOUNDS, 0.6, 0.1, 1) is None


class TestBackoff:

    def test_margins_must_be_positive(self, pair):
        with pytest.raises(ValidationError):
            theorem1_backoff_contains(RatePoint(0, 0, 0), bsc_auxiliary(0.1), pair, 0.0, 0.01)

    def test_backoff_points_lie_in_limit_region(self, rng):
        pair = bsc_pair(0.05, 0.25)
        aux = bsc_auxiliary(0.1)
        checked = 0
        for p in [RatePoint(0.05, 0.02, 0.1)] + random_points(rng, 30, top=0.4):
            verdict = theorem1_backoff_contains(p, aux, pair, 0.01, 0.01, resolution=20, family="bsc")
            if verdict.contained:
                checked += 1
                assert theorem1_contains(p, aux, pair, resolution=20, family="bsc").contained
            assert "L_gamma" in verdict.witness
        assert checked > 0

    def test_rate_split_inside_region(self):
        split = rate_split(RatePoint(0.1, 0.15, 0.2), BOUNDS, 1, 0.01, 0.01, l_gamma=0.18)
        assert split is not None
        assert split.kappa_tilde == pytest.approx(0.15)
        assert split.r_hat + split.r_tilde >= 0.1
        assert split.r_tilde + split.kappa_tilde == pytest.approx(BOUNDS.conditional - 0.01)

    def test_rate_split_outside_region(self):
        assert rate_split(RatePoint(0.1, 0.19, 0.2), BOUNDS, 1, 0.01, 0.01, l_gamma=0.18) is None
        assert rate_split(RatePoint(0.4, 0.15, 0.2), BOUNDS, 1, 0.01, 0.01, l_gamma=0.18) is None


class TestGungorRegion:

    def setup_method(self):
        self.pair = bsc_pair(0.05, 0.25)
        self.rho = identity_channel(2)
        self.tau = uniform(2)

    def test_exponent_is_nondecreasing(self):
        values = [gungor_exponent(self.pair, self.rho, self.tau, k, resolution=50, family="bsc")
                  for k in (0.0, 0.05, 0.1, 0.2, 0.4)]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_negative_kappa_tilde(self):
        with pytest.raises(ValidationError):
            gungor_exponent(self.pair, self.rho, self.tau, -0.1)

    def test_origin(self):
        verdict = gungor_contains(RatePoint(0, 0, 0), self.pair, self.rho, self.tau, resolution=50, family="bsc")
        assert verdict.contained
        assert verdict.witness["kappa_tilde"] == 0.0
        assert G_KEY in verdict.binding_constraints

    def test_maximum_agrees_with_membership(self):
        found = max_alpha_gungor(self.pair, self.rho, self.tau, 0.25, 0.25, resolution=50, family="bsc")
        assert found is not None
        alpha, _ = found
        below = RatePoint(0.25, alpha - 1e-4, 0.25)
        above = RatePoint(0.25, alpha + 1e-3, 0.25)
        assert gungor_contains(below, self.pair, self.rho, self.tau, resolution=50, family="bsc").contained
        assert not gungor_contains(above, self.pair, self.rho, self.tau, resolution=50, family="bsc").contained

    def test_rate_beyond_capacity(self):
        assert max_alpha_gungor(self.pair, self.rho, self.tau, 0.9, 0.1, resolution=50, family="bsc") is None

    def test_searched_choice_beats_fixed_choice(self):
        fixed, _ = max_alpha_gungor(self.pair, self.rho, self.tau, 0.25, 0.25, resolution=50, family="bsc")
        choice = best_gungor(self.pair, 0.25, 0.25, rho_steps=4, tau_steps=10, resolution=50, family="bsc")
        assert choice.alpha >= fixed - 1e-12
        assert choice.alpha > fixed + 1e-3
        assert choice.tau.mass[0] > 0.5
        again = max_alpha_gungor(self.pair, choice.rho, choice.tau, 0.25, 0.25, resolution=50, family="bsc")
        assert again[0] == pytest.approx(choice.alpha)

    def test_search_needs_tau_grid(self):
        with pytest.raises(ValidationError):
            best_gungor(self.pair, 0.25, 0.25, tau_steps=0)

    def test_search_rate_beyond_capacity(self):
        assert best_gungor(self.pair, 0.9, 0.1, rho_steps=2, tau_steps=2, resolution=20, family="bsc") is None

    def test_closure_beats_comparison_region(self):
        family = BscFamily(0.05, 0.25)
        settings = SweepSettings(resolution=50, rho_steps=10)
        alpha, _, _ = best_theorem3(family, 0.25, 0.25, settings)
        gungor = best_gungor(self.pair, 0.25, 0.25, rho_steps=10, tau_steps=10, resolution=50, family="bsc").alpha
        assert alpha == pytest.approx(0.229, abs=5e-3)
        assert gungor == pytest.approx(0.2272, abs=3e-3)
        assert alpha > gungor + 5e-4


class TestSweeps:

    def test_matched_channels_follow_half_kappa(self):
        family = BscFamily(0.1, 0.1)
        curve = sweep_bsc(family, "alpha-vs-kappa", {"r": 0.1}, [0.0, 0.1, 0.2], FAST)
        assert [p.x for p in curve] == [0.0, 0.1, 0.2]
        np.testing.assert_allclose([p.value for p in curve], [0.0, 0.05, 0.1], atol=1e-9)

    def test_matched_channels_rate_limited(self):
        family = BscFamily(0.1, 0.1)
        found = best_theorem3(family, 0.45, 0.4, FAST)
        assert found[0] == pytest.approx(1.0 - h2(0.1) - 0.45, abs=1e-9)
        assert found[1] == SUM_RATE

    def test_matched_channels_key_secrecy_binding(self):
        found = best_theorem3(BscFamily(0.1, 0.1), 0.2, 0.3, FAST)
        assert found[0] == pytest.approx(0.15, abs=1e-9)
        assert found[1] in (SECRECY_3, CONDITIONAL_3)

    def test_infeasible_abscissae_are_left_out(self):
        curve = sweep_bsc(BscFamily(0.1, 0.3), "r-vs-alpha", {"kappa": 0.3}, [0.1, 0.9], FAST)
        assert [p.x for p in curve] == [0.1]

    def test_needs_fixed_coordinates(self):
        with pytest.raises(ValidationError):
            sweep_bsc(BscFamily(0.1, 0.3), "alpha-vs-lambda_t", {"r": 0.1}, [0.1], FAST)

    def test_thread_count_does_not_change_curve(self):
        family = BscFamily(0.05, 0.25)
        xs = [0.05, 0.1, 0.2]
        one = sweep_bsc(family, "alpha-vs-kappa", {"r": 0.2}, xs, FAST, threads=1)
        many = sweep_bsc(family, "alpha-vs-kappa", {"r": 0.2}, xs, FAST, threads=4)
        assert one == many

    def test_key_limited_then_half_slope(self):
        family = BscFamily(0.05, 0.25)
        low = sweep_bsc(family, "alpha-vs-kappa", {"r": 0.1}, [0.05, 0.1, 0.15], FAST)
        np.testing.assert_allclose([p.value for p in low], [0.05, 0.1, 0.15], atol=1e-9)
        assert all(p.binding_constraint == KEY for p in low)
        high = sweep_bsc(family, "alpha-vs-kappa", {"r": 0.1}, [0.3, 0.4, 0.5], FAST)
        np.testing.assert_allclose(np.diff([p.value for p in high]), [0.05, 0.05], atol=1e-6)
        assert all(p.binding_constraint in (SECRECY_3, CONDITIONAL_3) for p in high)
        assert all(p.value < p.x for p in high)

    def test_noisier_main_channel_never_helps(self):
        family = BscFamily(0.05, 0.25)
        curve = sweep_bsc(family, "alpha-vs-lambda_t", {"r": 0.1, "kappa": 0.3}, [0.01, 0.05, 0.1, 0.2], FAST)
        values = [p.value for p in curve]
        assert len(values) == 4
        assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
        assert values[-1] < values[0]

    def test_comparison_never_above_closure(self):
        settings = SweepSettings(resolution=50, rho_steps=10, tau_steps=10, compare_gungor=True)
        curve = sweep_bsc(BscFamily(0.05, 0.25), "alpha-vs-kappa", {"r": 0.25}, [0.1, 0.2, 0.25], settings)
        assert [p.x for p in curve] == [0.1, 0.2, 0.25]
        for p in curve:
            assert p.gungor_value <= p.value + 1e-9
        assert curve[-1].value > curve[-1].gungor_value + 5e-4

    def test_refinement_stays_in_winning_family(self):
        family = BscFamily(0.05, 0.25)
        refined_settings = SweepSettings(resolution=20, rho_steps=4, refine=True)
        for r, kappa in [(0.1, 0.3), (0.25, 0.25), (0.4, 0.5)]:
            coarse = best_theorem3(family, r, kappa, FAST)
            refined = best_theorem3(family, r, kappa, refined_settings)
            assert refined[0] >= coarse[0] - 1e-12
            assert refined[2].split(" ")[0] == coarse[2].split(" ")[0]

    def test_comparison_column(self):
        settings = SweepSettings(resolution=20, rho_steps=2, refine=False, compare_gungor=True)
        curve = sweep_bsc(BscFamily(0.05, 0.25), "alpha-vs-kappa", {"r": 0.25}, [0.25], settings)
        assert curve[0].gungor_value is not None
        assert curve[0].gungor_value <= 0.25
