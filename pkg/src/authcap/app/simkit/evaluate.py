"""
Operational quantities of a code, by exhaustive enumeration or simulation.

epsilon: probability that the receiver does not output the sent message in
one round.  omega: success probability of the best adversary in round i,
having watched rounds 1..i under the same key through q and then replaced
the receiver's word.  Both are exact rationals when enumerated; both also
have seeded Monte Carlo estimates for codes past the enumeration budget.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
from tqdm import tqdm

from app.config import rng_stream
from app.errors import DimensionError, ValidationError
from app.probcore import CondDist
from app.simkit.base import EXACT_BUDGET, AuthCode, Word, check_budget, rational_kernel, word_prob, words
from shared.utils.helper import ordered_map

logger = logging.getLogger(__name__)


def _check_channel(code: AuthCode, channel: CondDist, out_size: int, name: str) -> None:
    if channel.in_size != code.params.x_size or channel.out_size != out_size:
        raise DimensionError(
            f"{name} maps {channel.in_size} -> {channel.out_size} symbols, "
            f"code expects {code.params.x_size} -> {out_size}")


def _channel_law(kernel, outputs: list[Word], x: Word, cache: dict) -> list[Fraction]:
    if x not in cache:
        cache[x] = [word_prob(kernel, y, x) for y in outputs]
    return cache[x]


# ==============================================================================
# Message error
# ==============================================================================

def epsilon_exact(code: AuthCode, t: CondDist, round_i: int = 1, budget: int = EXACT_BUDGET,
                  threads: int | None = None) -> Fraction:
    """(1 / |M||K|) sum_{m,k} sum_x f(x|m,k) sum_y t(y|x) 1{phi(y,k) != m}."""
    _check_channel(code, t, code.params.y_size, "main channel")
    outputs = code.outputs
    check_budget("epsilon enumeration", len(outputs) * code.key_count * code.message_count, budget)
    kernel = rational_kernel(t)
    laws: dict[Word, list[Fraction]] = {}
    for k in range(code.key_count):
        for m in range(code.message_count):
            for x in code.encode_distribution(m, k, round_i):
                _channel_law(kernel, outputs, x, laws)

    def key_errors(k: int) -> Fraction:
        decoded = [code.decode(y, k, round_i) for y in outputs]
        total = Fraction(0)
        for m in range(code.message_count):
            for x, px in code.encode_distribution(m, k, round_i).items():
                law = laws[x]
                miss = sum((p for p, d in zip(law, decoded) if d != m), Fraction(0))
                total += px * miss
        return total

    partial = ordered_map(key_errors, range(code.key_count), threads)
    value = sum(partial, Fraction(0)) / (code.key_count * code.message_count)
    logger.debug(f"epsilon over {len(outputs)} outputs and {code.key_count} keys: {value}")
    return value


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    samples: int


def _draw_input(rng: np.random.Generator, law: dict[Word, Fraction]) -> Word:
    xs = list(law)
    weights = np.array([float(law[x]) for x in xs])
    return xs[int(rng.choice(len(xs), p=weights / weights.sum()))]


def _draw_output(rng: np.random.Generator, cumulative: np.ndarray, x: Word) -> Word:
    last = cumulative.shape[1] - 1
    draws = rng.random(len(x))
    return tuple(min(int(np.searchsorted(cumulative[a], u, side="right")), last) for a, u in zip(x, draws))


def epsilon_monte_carlo(code: AuthCode, t: CondDist, samples: int, seed: int, round_i: int = 1,
                        progress: bool = False) -> MonteCarloEstimate:
    """Seeded simulation of epsilon with its binomial standard error."""
    if samples < 1:
        raise ValidationError("Monte Carlo needs at least one sample")
    _check_channel(code, t, code.params.y_size, "main channel")
    rng = rng_stream(seed, "simkit.evaluate", "epsilon")
    cumulative = np.cumsum(t.rows, axis=1)

    errors = 0
    for _ in tqdm(range(samples), desc="epsilon", unit="draw", disable=not progress):
        m = int(rng.integers(code.message_count))
        k = int(rng.integers(code.key_count))
        x = _draw_input(rng, code.encode_distribution(m, k, round_i))
        y = _draw_output(rng, cumulative, x)
        if code.decode(y, k, round_i) != m:
            errors += 1

    p = errors / samples
    return MonteCarloEstimate(p, math.sqrt(p * (1.0 - p) / samples), samples)


# ==============================================================================
# False authentication
# ==============================================================================

def omega_exact(code: AuthCode, q: CondDist, round_i: int = 1, budget: int = EXACT_BUDGET,
                threads: int | None = None) -> Fraction:
    """
    max over adversary maps psi(z_1..z_i) -> y of Pr(phi_i(y, K) not in {!, M_i}).

    A deterministic psi is enough: the objective is linear in psi, so for
    each observed history the best y is chosen independently.  With
    A_l(z|m,k) = sum_x f_l(x|m,k) q(z|x), earlier rounds enter only through
    H(h,k) = prod_{l<i} (1/|M|) sum_m A_l(z_l|m,k), giving

        omega = 1/(|K||M|) sum_h sum_z max_y sum_k H(h,k) [phi(y,k) != !] (sum_m A_i(z|m,k) - A_i(z|phi(y,k),k)).
    """
    code.check_round(round_i)
    _check_channel(code, q, code.params.z_size, "adversary channel")
    kernel = rational_kernel(q)
    zs = words(code.params.z_size, code.n)
    outputs = code.outputs
    K, M = code.key_count, code.message_count
    check_budget("omega enumeration", len(zs) ** round_i * len(outputs) * K, budget)

    laws: dict[Word, list[Fraction]] = {}

    def observed(round_l: int) -> list[list[list[Fraction]]]:
        """A_l as [k][m][z]."""
        table = []
        for k in range(K):
            rows = []
            for m in range(M):
                row = [Fraction(0)] * len(zs)
                for x, px in code.encode_distribution(m, k, round_l).items():
                    for idx, pz in enumerate(_channel_law(kernel, zs, x, laws)):
                        if pz:
                            row[idx] += px * pz
                rows.append(row)
            table.append(rows)
        return table

    current = observed(round_i)
    history_weights = [[Fraction(1)] for _ in range(K)]   # [k][h]
    for round_l in range(1, round_i):
        a_l = observed(round_l)
        marginal = [[sum((a_l[k][m][z] for m in range(M)), Fraction(0)) / M for z in range(len(zs))]
                    for k in range(K)]
        history_weights = [[h * b for h, b in product(history_weights[k], marginal[k])] for k in range(K)]
    histories = len(history_weights[0])

    decoded = [[code.decode(y, k, round_i) for y in outputs] for k in range(K)]
    totals = [[sum((current[k][m][z] for m in range(M)), Fraction(0)) for z in range(len(zs))] for k in range(K)]

    def gain(z: int) -> list[list[Fraction]]:
        """[y][k]: acceptance mass of a wrong message when z is seen and y is sent."""
        return [[Fraction(0) if decoded[k][y] is None else totals[k][z] - current[k][decoded[k][y]][z]
                 for k in range(K)] for y in range(len(outputs))]

    def best_for(z: int) -> Fraction:
        g = gain(z)
        total = Fraction(0)
        for h in range(histories):
            weights = [history_weights[k][h] for k in range(K)]
            total += max(sum((w * gk for w, gk in zip(weights, row) if w and gk), Fraction(0)) for row in g)
        return total

    partial = ordered_map(best_for, range(len(zs)), threads)
    value = sum(partial, Fraction(0)) / (K * M)
    logger.debug(f"omega at round {round_i}: {histories} histories x {len(zs)} observations, value {value}")
    return value


def _best_reply_mass(posterior: np.ndarray, decoded: np.ndarray) -> float:
    """max over y of sum_k [phi(y,k) != !] (posterior(k) - posterior(k, phi(y,k)))."""
    accepted = decoded >= 0
    keys = np.arange(decoded.shape[0])[:, np.newaxis]
    picked = posterior[keys, np.where(accepted, decoded, 0)]
    mass = np.where(accepted, posterior.sum(axis=1)[:, np.newaxis] - picked, 0.0).sum(axis=0)
    return float(mass.max())


def omega_monte_carlo(code: AuthCode, q: CondDist, samples: int, seed: int, round_i: int = 1,
                      progress: bool = False) -> MonteCarloEstimate:
    """
    Seeded estimate of omega.

    Each draw simulates a key, messages m_1..m_i and the adversary's view
    z_1..z_i, then scores the view by the best reply's posterior mass on a
    wrong accepted message.  The mean of the scores is unbiased for omega.
    """
    if samples < 1:
        raise ValidationError("Monte Carlo needs at least one sample")
    code.check_round(round_i)
    _check_channel(code, q, code.params.z_size, "adversary channel")
    rng = rng_stream(seed, "simkit.evaluate", "omega")
    cumulative = np.cumsum(q.rows, axis=1)
    K, M = code.key_count, code.message_count
    decoded = np.array([[-1 if d is None else d for d in (code.decode(y, k, round_i) for y in code.outputs)]
                        for k in range(K)])
    laws: dict[tuple[int, int, int], list[tuple[Word, float]]] = {}

    def likelihood(z: Word, m: int, k: int, round_l: int) -> float:
        """A_l(z|m,k) in floating point."""
        key = (m, k, round_l)
        if key not in laws:
            laws[key] = [(x, float(px)) for x, px in code.encode_distribution(m, k, round_l).items()]
        return sum(px * math.prod(float(q.table[a, b]) for a, b in zip(x, z)) for x, px in laws[key])

    scores = np.empty(samples)
    for s in tqdm(range(samples), desc="omega", unit="draw", disable=not progress):
        k = int(rng.integers(K))
        history = []
        for round_l in range(1, round_i + 1):
            m = int(rng.integers(M))
            history.append(_draw_output(rng, cumulative, _draw_input(rng, code.encode_distribution(m, k, round_l))))
        posterior = np.ones((K, M))
        for round_l, z in enumerate(history[:-1], start=1):
            seen = np.array([sum(likelihood(z, m, kk, round_l) for m in range(M)) for kk in range(K)])
            posterior *= seen[:, np.newaxis]
        posterior *= np.array([[likelihood(history[-1], m, kk, round_i) for m in range(M)] for kk in range(K)])
        posterior /= posterior.sum()
        scores[s] = _best_reply_mass(posterior, decoded)

    stderr = float(scores.std(ddof=1)) / math.sqrt(samples) if samples > 1 else 0.0
    logger.debug(f"omega at round {round_i}: {samples} simulated views, estimate {scores.mean():.6g}")
    return MonteCarloEstimate(float(scores.mean()), stderr, samples)
