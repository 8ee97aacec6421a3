import math
from fractions import Fraction
from itertools import product

import pytest

from app.errors import BudgetExceededError, ValidationError
from app.probcore import bsc, identity_channel
from app.simkit import (CodeParams, SimmonsCode, build_simmons, build_typeclass_code, epsilon_exact,
                        epsilon_monte_carlo, omega_exact, omega_monte_carlo, remap_transform, remapped_rates,
                        simmons_impersonation_success, simmons_params, simmons_substitution_success)
from app.simkit.base import AuthCode, rational_kernel, word_prob, words
from app.simkit.remap import default_key2_count
from app.typelab import CondNType, NType, Sequence, empirical_cond


class AcceptAllCode(AuthCode):
    """Sends word m and reads any word back as its index mod |M|."""

    def __init__(self, params: CodeParams):
        super().__init__("accept-all", params)

    def encode_distribution(self, m, k, round_i=1):
        return {self.outputs[m]: Fraction(1)}

    def decode(self, y, k, round_i=1):
        return self.outputs.index(tuple(y)) % self.message_count

    def codebook_json(self):
        return {}


def observed_law(code: AuthCode, q, m: int, k: int, round_i: int) -> dict:
    kernel = rational_kernel(q)
    law = {}
    for z in words(code.params.z_size, code.n):
        law[z] = sum((px * word_prob(kernel, z, x) for x, px in code.encode_distribution(m, k, round_i).items()),
                     Fraction(0))
    return law


def brute_force_omega(code: AuthCode, q) -> Fraction:
    """First-round omega by scoring every deterministic adversary map."""
    zs = words(code.params.z_size, code.n)
    ys = code.outputs
    K, M = code.key_count, code.message_count
    laws = {(m, k): observed_law(code, q, m, k, 1) for m in range(M) for k in range(K)}
    gain = {}
    for z, (yi, y) in product(zs, enumerate(ys)):
        total = Fraction(0)
        for k in range(K):
            d = code.decode(y, k, 1)
            if d is None:
                continue
            total += sum((laws[(m, k)][z] for m in range(M) if m != d), Fraction(0))
        gain[(z, yi)] = total
    best = max(sum((gain[(z, yi)] for z, yi in zip(zs, psi)), Fraction(0))
               for psi in product(range(len(ys)), repeat=len(zs)))
    return best / (K * M)


def best_reply_omega(code: AuthCode, q) -> Fraction:
    """First-round omega with the best reply chosen per observation."""
    K, M = code.key_count, code.message_count
    laws = {(m, k): observed_law(code, q, m, k, 1) for m in range(M) for k in range(K)}
    total = Fraction(0)
    for z in words(code.params.z_size, code.n):
        replies = []
        for y in code.outputs:
            mass = Fraction(0)
            for k in range(K):
                d = code.decode(y, k, 1)
                if d is not None:
                    mass += sum((laws[(m, k)][z] for m in range(M) if m != d), Fraction(0))
            replies.append(mass)
        total += max(replies)
    return total / (K * M)


def second_round_omega(code: AuthCode, q) -> Fraction:
    """Round-two omega with the best reply chosen per observed pair (z1, z2)."""
    zs = words(code.params.z_size, code.n)
    K, M = code.key_count, code.message_count
    first = {(m, k): observed_law(code, q, m, k, 1) for m in range(M) for k in range(K)}
    second = {(m, k): observed_law(code, q, m, k, 2) for m in range(M) for k in range(K)}
    total = Fraction(0)
    for z1, z2 in product(zs, zs):
        replies = []
        for y in code.outputs:
            mass = Fraction(0)
            for k in range(K):
                d = code.decode(y, k, 2)
                if d is None:
                    continue
                seen = sum((first[(m1, k)][z1] for m1 in range(M)), Fraction(0))
                wrong = sum((second[(m2, k)][z2] for m2 in range(M) if m2 != d), Fraction(0))
                mass += seen * wrong
            replies.append(mass)
        total += max(replies)
    return total / (K * M * M)


def brute_force_epsilon(code: AuthCode, t, round_i: int = 1) -> Fraction:
    """Average over (m, k) of the channel mass on words that do not decode to m."""
    kernel = rational_kernel(t)
    total = Fraction(0)
    for m, k in product(range(code.message_count), range(code.key_count)):
        for x, px in code.encode_distribution(m, k, round_i).items():
            for y in code.outputs:
                if code.decode(y, k, round_i) != m:
                    total += px * word_prob(kernel, y, x)
    return total / (code.key_count * code.message_count)


def small_simmons(subsets: list[list[int]]) -> SimmonsCode:
    return SimmonsCode(CodeParams(n=2, message_count=2, key_count=len(subsets)), subsets)


def small_typeclass_code(seed: int = 0, key_count: int = 2):
    tau = NType((2, 2))
    sigma = CondNType(tau, ((1, 1, 0, 0), (0, 0, 1, 1)))
    rho = CondNType(sigma.out_type(), ((1, 0), (0, 1), (1, 0), (0, 1)))
    params = CodeParams(n=4, message_count=2, key_count=key_count)
    return build_typeclass_code(params, rho, sigma, tau, bsc(0.1), seed)


class TestCodeParams:

    def test_rates(self):
        params = CodeParams(n=4, message_count=16, key_count=4, j=2)
        assert params.rate == pytest.approx(1.0)
        assert params.key_rate == pytest.approx(0.25)

    def test_clouds_must_divide_messages(self):
        with pytest.raises(ValidationError):
            CodeParams(n=4, message_count=6, key_count=1, cloud_count=4)

    def test_rational_kernel_uses_decimal_values(self):
        assert rational_kernel(bsc(0.1))[0] == (Fraction(9, 10), Fraction(1, 10))


class TestSimmons:

    def test_params(self):
        params = simmons_params(4, 4)
        assert (params.message_count, params.key_count) == (8, 4)

    @pytest.mark.parametrize("n,k", [(4, 3), (3, 9)])
    def test_params_must_be_integral(self, n, k):
        with pytest.raises(ValidationError):
            simmons_params(n, k)

    def test_build_is_seeded(self):
        params = simmons_params(3, 4)
        assert build_simmons(params, 5).subsets == build_simmons(params, 5).subsets
        assert build_simmons(params, 5).subsets != build_simmons(params, 6).subsets

    def test_round_trip_without_noise(self):
        code = build_simmons(simmons_params(3, 4), 1)
        for k in range(code.key_count):
            for m in range(code.message_count):
                (x,) = code.encode_distribution(m, k)
                assert code.decode(x, k) == m
        assert epsilon_exact(code, identity_channel(2)) == 0

    def test_impersonation_never_beats_substitution(self):
        params = simmons_params(3, 4)
        for seed in range(50):
            code = build_simmons(params, seed)
            assert simmons_impersonation_success(code) <= simmons_substitution_success(code)

    def test_mean_substitution_over_random_codes(self):
        params = simmons_params(4, 4)
        values = [simmons_substitution_success(build_simmons(params, seed)) for seed in range(1000)]
        mean = sum(values, Fraction(0)) / len(values)
        assert Fraction(1, 4) <= mean <= 1

    def test_substitution_equals_noiseless_omega(self):
        params = simmons_params(2, 4)
        for seed in range(10):
            code = build_simmons(params, seed)
            assert omega_exact(code, identity_channel(2)) == simmons_substitution_success(code)


class TestOmega:

    def test_single_key_is_fully_forgeable(self):
        assert omega_exact(small_simmons([[0, 1]]), identity_channel(2)) == 1

    def test_more_keys_lower_success(self):
        q = identity_channel(2)
        assert omega_exact(small_simmons([[0, 1], [0, 2]]), q) == Fraction(3, 4)
        assert omega_exact(small_simmons([[0, 1], [0, 2], [1, 3], [2, 3]]), q) == Fraction(1, 2)

    def test_nested_key_sets_never_raise_success(self):
        subsets = [[0, 1], [0, 2], [1, 3], [2, 3]]
        values = [omega_exact(small_simmons(subsets[:count]), identity_channel(2)) for count in range(1, 5)]
        assert values == [1, Fraction(3, 4), Fraction(2, 3), Fraction(1, 2)]
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_accepting_every_word(self):
        code = AcceptAllCode(CodeParams(n=2, message_count=2, key_count=3))
        assert omega_exact(code, identity_channel(2)) == 1

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force_over_adversary_maps(self, seed):
        code = build_simmons(simmons_params(2, 4), seed)
        assert omega_exact(code, bsc(0.2)) == brute_force_omega(code, bsc(0.2))

    def test_typeclass_code_against_best_replies(self):
        code = small_typeclass_code(key_count=2)
        assert omega_exact(code, bsc(0.3)) == best_reply_omega(code, bsc(0.3))

    def test_second_round_matches_direct_sum(self):
        base = build_simmons(simmons_params(2, 4, j=2), 3)
        code = remap_transform(base, 2, seed=7, key2_count=2)
        assert omega_exact(code, bsc(0.2), round_i=2) == second_round_omega(code, bsc(0.2))

    def test_thread_count_does_not_change_value(self):
        code = build_simmons(simmons_params(3, 4), 2)
        assert omega_exact(code, bsc(0.1), threads=1) == omega_exact(code, bsc(0.1), threads=4)

    def test_monte_carlo_brackets_exact_value(self):
        code = build_simmons(simmons_params(3, 4), 0)
        exact = float(omega_exact(code, bsc(0.2)))
        estimate = omega_monte_carlo(code, bsc(0.2), samples=2000, seed=5)
        assert 0.0 <= estimate.estimate <= 1.0
        assert abs(estimate.estimate - exact) <= 5 * estimate.stderr + 1e-3

    def test_monte_carlo_second_round(self):
        base = build_simmons(simmons_params(2, 4, j=2), 3)
        code = remap_transform(base, 2, seed=7, key2_count=2)
        exact = float(omega_exact(code, bsc(0.2), round_i=2))
        estimate = omega_monte_carlo(code, bsc(0.2), samples=2000, seed=8, round_i=2)
        assert abs(estimate.estimate - exact) <= 5 * estimate.stderr + 1e-3

    def test_monte_carlo_single_key_always_forges(self):
        estimate = omega_monte_carlo(small_simmons([[0, 1]]), identity_channel(2), samples=50, seed=0)
        assert estimate.estimate == 1.0
        assert estimate.stderr == 0.0

    def test_monte_carlo_is_seeded(self):
        code = small_typeclass_code(key_count=2)
        first = omega_monte_carlo(code, bsc(0.3), samples=100, seed=2)
        assert first == omega_monte_carlo(code, bsc(0.3), samples=100, seed=2)

    def test_monte_carlo_needs_samples(self):
        with pytest.raises(ValidationError):
            omega_monte_carlo(small_simmons([[0, 1]]), bsc(0.1), samples=0, seed=0)

    def test_round_outside_key_lifetime(self):
        with pytest.raises(ValidationError):
            omega_exact(small_simmons([[0, 1]]), identity_channel(2), round_i=2)

    def test_budget(self):
        code = build_simmons(simmons_params(3, 4), 0)
        with pytest.raises(BudgetExceededError):
            omega_exact(code, bsc(0.1), budget=10)


class TestEpsilon:

    def test_noisy_channel_exact_value(self):
        # only the sent word decodes to m
        code = small_simmons([[0, 1], [2, 3]])
        value = epsilon_exact(code, bsc(0.1))
        assert value == 1 - Fraction(9, 10) ** 2

    @pytest.mark.parametrize("seed,flip", [(0, 0.1), (1, 0.3), (2, 0.1)])
    def test_matches_direct_sum_on_random_codes(self, seed, flip):
        code = build_simmons(simmons_params(3, 4), seed)
        assert epsilon_exact(code, bsc(flip)) == brute_force_epsilon(code, bsc(flip))

    def test_typeclass_and_remapped_codes_match_direct_sum(self):
        code = small_typeclass_code(key_count=2)
        assert epsilon_exact(code, bsc(0.2)) == brute_force_epsilon(code, bsc(0.2))
        remapped = remap_transform(build_simmons(simmons_params(2, 4, j=2), 3), 2, seed=7, key2_count=2)
        for round_i in (1, 2):
            assert epsilon_exact(remapped, bsc(0.2), round_i) == brute_force_epsilon(remapped, bsc(0.2), round_i)

    def test_useless_channel_leaves_only_guessing(self):
        for seed in range(5):
            code = build_simmons(simmons_params(3, 4), seed)
            assert epsilon_exact(code, bsc(0.5)) >= 1 - Fraction(1, code.message_count)

    def test_monte_carlo_brackets_exact_value(self):
        code = build_simmons(simmons_params(3, 4), 0)
        exact = float(epsilon_exact(code, bsc(0.1)))
        estimate = epsilon_monte_carlo(code, bsc(0.1), samples=4000, seed=11)
        assert abs(estimate.estimate - exact) <= 5 * estimate.stderr + 1e-3

    def test_monte_carlo_is_seeded(self):
        code = build_simmons(simmons_params(3, 4), 0)
        first = epsilon_monte_carlo(code, bsc(0.2), samples=200, seed=3)
        assert first == epsilon_monte_carlo(code, bsc(0.2), samples=200, seed=3)

    def test_needs_samples(self):
        with pytest.raises(ValidationError):
            epsilon_monte_carlo(small_simmons([[0, 1]]), bsc(0.1), samples=0, seed=0)


class TestTypeClassCode:

    def test_satellites_lie_in_their_type_class(self):
        code = small_typeclass_code()
        for (m_hat, _, _), u in code.satellites.items():
            assert empirical_cond(u, code.centres[m_hat]) == code.sigma

    def test_encoder_is_uniform_on_type_class(self):
        code = small_typeclass_code()
        law = code.encode_distribution(1, 0)
        assert sum(law.values()) == 1
        assert len(set(law.values())) == 1
        u = code.satellites[(0, 1, 0)]
        assert all(empirical_cond(Sequence(x, 2), u) == code.rho for x in law)

    def test_at_most_one_key_accepts(self):
        code = small_typeclass_code(key_count=3)
        for y in code.outputs:
            accepting = [k for k in range(code.key_count) if code.decode(y, k) is not None]
            assert len(accepting) <= 1

    def test_build_is_seeded(self):
        assert small_typeclass_code(4).satellites == small_typeclass_code(4).satellites

    def test_rejects_shared_parents(self):
        tau = NType((2, 2))
        sigma = CondNType(tau, ((1, 1), (1, 1)))
        rho = CondNType(sigma.out_type(), ((2, 0), (0, 2)))
        with pytest.raises(ValidationError):
            build_typeclass_code(CodeParams(n=4, message_count=2, key_count=2), rho, sigma, tau, bsc(0.1), 0)

    def test_codebook_json(self):
        payload = small_typeclass_code().to_json()
        assert payload["code"] == "typeclass"
        assert len(payload["codebook"]["satellites"]) == 4


class TestRemap:

    def test_identity_maps_reproduce_base(self):
        base = build_simmons(simmons_params(3, 4), 0)
        same = remap_transform(base, base.message_count, seed=0, key2_count=1, identity=True)
        assert omega_exact(same, bsc(0.1)) == omega_exact(base, bsc(0.1))
        assert epsilon_exact(same, bsc(0.1)) == epsilon_exact(base, bsc(0.1))

    def test_success_grows_at_most_by_message_ratio(self):
        base = build_simmons(simmons_params(3, 4), 1)
        remapped = remap_transform(base, 2, seed=4)
        assert remapped.key_count == base.key_count * 4
        assert omega_exact(remapped, bsc(0.1)) <= 2 * omega_exact(base, bsc(0.1))

    def test_key_split(self):
        base = build_simmons(simmons_params(3, 4), 1)
        remapped = remap_transform(base, 2, seed=4)
        assert remapped.split_key(9) == (2, 1)

    def test_default_second_key_count(self):
        assert default_key2_count(4, 2, 1) == 4
        assert default_key2_count(8, 2, 2) == 64
        with pytest.raises(ValidationError):
            default_key2_count(6, 4, 1)

    def test_rates(self):
        r, alpha, kappa = remapped_rates(0.5, 0.1, 0.2, 0.2, 100, 1)
        assert r == pytest.approx(0.3)
        assert alpha == pytest.approx(0.3 - 2 * math.log2(100 * math.e) / 100)
        assert kappa == pytest.approx(0.6)
