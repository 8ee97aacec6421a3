"""
Method-of-types machinery with exact integer arithmetic.

Counts stay integers and probabilities stay ``Fraction`` until a caller asks
for a logarithm, so exponent comparisons against entropies are not blurred by
float drift in the counting.
"""

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb

import numpy as np

from app.errors import BudgetExceededError, DimensionError, ValidationError
from app.probcore import CondDist, Dist

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000_000


# ==============================================================================
# Sequences and types
# ==============================================================================

@dataclass(frozen=True)
class Sequence:
    """n symbols drawn from {0, ..., alphabet_size - 1}."""

    symbols: tuple[int, ...]
    alphabet_size: int

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if self.alphabet_size < 1:
            raise ValidationError(f"alphabet size must be positive, got {self.alphabet_size}")
        bad = [s for s in self.symbols if not 0 <= s < self.alphabet_size]
        if bad:
            raise ValidationError(f"symbols {bad} outside alphabet of size {self.alphabet_size}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i: int) -> int:
        return self.symbols[i]

    def paired(self, other: "Sequence") -> "Sequence":
        """The sequence of pairs (self_i, other_i), indexed self_i * |other| + other_i."""
        _same_length(self, other)
        return Sequence(tuple(a * other.alphabet_size + b for a, b in zip(self, other)),
                        self.alphabet_size * other.alphabet_size)


@dataclass(frozen=True)
class NType:
    """Empirical distribution with denominator n, stored as integer counts."""

    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if not self.counts or any(c < 0 for c in self.counts):
            raise ValidationError(f"type counts must be non-negative, got {self.counts}")
        if sum(self.counts) == 0:
            raise ValidationError("a type needs n >= 1")

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def alphabet_size(self) -> int:
        return len(self.counts)

    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.n) for c in self.counts)

    def dist(self) -> Dist:
        return Dist(np.array(self.counts, dtype=float) / self.n)


@dataclass(frozen=True)
class CondNType:
    """
    Conditional type of y given x: ``counts[a][b]`` is the number of positions
    with x = a and y = b.  Row a sums to ``cond.counts[a]``.
    """

    cond: NType
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in row) for row in self.counts)
        object.__setattr__(self, "counts", rows)
        if len(rows) != self.cond.alphabet_size:
            raise DimensionError(f"{len(rows)} rows for a conditioning alphabet of {self.cond.alphabet_size}")
        widths = {len(row) for row in rows}
        if len(widths) != 1:
            raise DimensionError("conditional type rows have different lengths")
        for a, row in enumerate(rows):
            if any(c < 0 for c in row) or sum(row) != self.cond.counts[a]:
                raise ValidationError(f"row {a} = {row} does not split {self.cond.counts[a]} occurrences")

    @property
    def n(self) -> int:
        return self.cond.n

    @property
    def in_size(self) -> int:
        return self.cond.alphabet_size

    @property
    def out_size(self) -> int:
        return len(self.counts[0])

    def fraction(self, a: int, b: int) -> Fraction | None:
        """p(b|a), or None when a never occurs."""
        n_a = self.cond.counts[a]
        return Fraction(self.counts[a][b], n_a) if n_a else None

    def out_type(self) -> NType:
        return NType(tuple(sum(row[b] for row in self.counts) for b in range(self.out_size)))

    def kernel(self) -> CondDist:
        """As a float kernel; rows of unseen conditioning symbols are uniform."""
        table = np.empty((self.in_size, self.out_size))
        for a, row in enumerate(self.counts):
            n_a = self.cond.counts[a]
            table[a] = np.array(row, dtype=float) / n_a if n_a else 1.0 / self.out_size
        return CondDist(table)

    def has_unique_parents(self) -> bool:
        """Each outcome b occurs under at most one conditioning symbol."""
        return all(sum(1 for row in self.counts if row[b] > 0) <= 1 for b in range(self.out_size))

    def compose(self, inner: "CondNType") -> tuple[tuple[Fraction | None, ...], ...]:
        """
        (self inner)(c|a) = sum_b self(c|b) inner(b|a), exactly.

        ``inner`` is a type of b given a and ``self`` a type of c given b.
        Rows for conditioning symbols a that never occur are None.
        """
        if inner.out_size != self.in_size:
            raise DimensionError("inner type does not produce this type's conditioning alphabet")
        table = []
        for a in range(inner.in_size):
            if inner.cond.counts[a] == 0:
                table.append((None,) * self.out_size)
                continue
            row = []
            for c in range(self.out_size):
                total = Fraction(0)
                for b in range(self.in_size):
                    weight = inner.fraction(a, b)
                    if weight:
                        total += self.fraction(b, c) * weight
                row.append(total)
            table.append(tuple(row))
        return tuple(table)


def _same_length(*seqs: Sequence) -> None:
    if len({len(s) for s in seqs}) > 1:
        raise DimensionError(f"sequence lengths differ: {[len(s) for s in seqs]}")


def empirical(x: Sequence) -> NType:
    counts = [0] * x.alphabet_size
    for s in x:
        counts[s] += 1
    return NType(tuple(counts))


def empirical_cond(y: Sequence, x: Sequence) -> CondNType:
    """p_{y|x}: the conditional type of y given x."""
    _same_length(y, x)
    counts = [[0] * y.alphabet_size for _ in range(x.alphabet_size)]
    for a, b in zip(x, y):
        counts[a][b] += 1
    return CondNType(empirical(x), tuple(tuple(row) for row in counts))


# ==============================================================================
# Enumeration
# ==============================================================================

def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """
    Every tuple of ``parts`` non-negative integers summing to ``total``,
    in lexicographic order.
    """
    if parts == 1:
        yield (total,)
        return
    for value in range(total + 1):
        for rest in compositions(total - value, parts - 1):
            yield (value,) + rest


def _bounded_compositions(total: int, caps: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    for value in range(min(total, caps[0]) + 1):
        for rest in _bounded_compositions(total - value, caps[1:]):
            yield (value,) + rest


def _check_budget(what: str, size: int, budget: int) -> None:
    if size > budget:
        raise BudgetExceededError(what, size, budget)


def enumerate_ntypes(n: int, alphabet_size: int, budget: int = DEFAULT_BUDGET) -> list[NType]:
    """All types with denominator n; there are C(n + k - 1, k - 1) of them."""
    if n < 1 or alphabet_size < 1:
        raise ValidationError(f"need n >= 1 and a non-empty alphabet, got n={n}, k={alphabet_size}")
    _check_budget("n-types", comb(n + alphabet_size - 1, alphabet_size - 1), budget)
    return [NType(c) for c in compositions(n, alphabet_size)]


def enumerate_cond_ntypes(cond: NType, out_size: int, budget: int = DEFAULT_BUDGET) -> list[CondNType]:
    """All conditional types of an out_size-ary outcome given a fixed conditioning type."""
    size = math.prod(comb(c + out_size - 1, out_size - 1) for c in cond.counts)
    _check_budget("conditional n-types", size, budget)
    rows = [list(compositions(c, out_size)) for c in cond.counts]
    return [CondNType(cond, combo) for combo in product(*rows)]


def multinomial(counts: tuple[int, ...]) -> int:
    """(sum counts)! / prod(count!) built from binomials."""
    result, running = 1, 0
    for c in counts:
        running += c
        result *= comb(running, c)
    return result


def type_class_size(mu: NType | CondNType, x: Sequence | None = None) -> int:
    """|T_mu(x)|, or |T_mu| for an unconditioned type."""
    if isinstance(mu, NType):
        return multinomial(mu.counts)
    if x is None or empirical(x) != mu.cond:
        raise ValidationError("the conditioning sequence does not have the type's conditioning type")
    return math.prod(multinomial(row) for row in mu.counts)


def _groups(mu: NType | CondNType, x: Sequence | None) -> tuple[list[list[int]], list[tuple[int, ...]], int]:
    if isinstance(mu, NType):
        return [list(range(mu.n))], [mu.counts], mu.n
    type_class_size(mu, x)
    positions = [[i for i, a in enumerate(x) if a == sym] for sym in range(mu.in_size)]
    return positions, list(mu.counts), mu.n


def _multiset_permutations(counts: list[int]) -> Iterator[tuple[int, ...]]:
    if sum(counts) == 0:
        yield ()
        return
    for b, c in enumerate(counts):
        if c:
            counts[b] -= 1
            for rest in _multiset_permutations(counts):
                yield (b,) + rest
            counts[b] += 1


def type_class_members(mu: NType | CondNType, x: Sequence | None = None,
                       budget: int = DEFAULT_BUDGET) -> Iterator[Sequence]:
    """Every y with p_{y|x} = mu, in a fixed order."""
    _check_budget("type class", type_class_size(mu, x), budget)
    positions, rows, n = _groups(mu, x)
    out_size = len(rows[0])
    per_group = [list(_multiset_permutations(list(row))) for row in rows]
    for choice in product(*per_group):
        y = [0] * n
        for pos, values in zip(positions, choice):
            for i, v in zip(pos, values):
                y[i] = v
        yield Sequence(tuple(y), out_size)


def sample_type_class(mu: NType | CondNType, x: Sequence | None, rng: np.random.Generator) -> Sequence:
    """A uniform draw from T_mu(x): shuffle the required multiset within each group."""
    positions, rows, n = _groups(mu, x)
    y = [0] * n
    for pos, row in zip(positions, rows):
        values = rng.permutation(np.repeat(np.arange(len(row)), row))
        for i, v in zip(pos, values):
            y[i] = int(v)
    return Sequence(tuple(y), len(rows[0]))


# ==============================================================================
# Probabilities and exponents
# ==============================================================================

def seq_prob_log(t: CondDist, y: Sequence, x: Sequence) -> float:
    """-(1/n) log2 t(y|x) for the memoryless extension of t."""
    _same_length(y, x)
    total = 0.0
    for a, b in zip(x, y):
        p = float(t.table[a, b])
        if p == 0.0:
            return math.inf
        total -= math.log2(p)
    return total / len(x)


def typeclass_prob_log(t: CondDist, mu: CondNType, x: Sequence) -> float:
    """-(1/n) log2 t(T_mu(x)|x), as class size times the common sequence probability."""
    size = type_class_size(mu, x)
    log_p = 0.0
    for a, row in enumerate(mu.counts):
        for b, count in enumerate(row):
            if count == 0:
                continue
            p = float(t.table[a, b])
            if p == 0.0:
                return math.inf
            log_p += count * math.log2(p)
    return -(math.log2(size) + log_p) / mu.n


def chain_membership(nu: CondNType, sigma: CondNType, z: Sequence, u: Sequence, w: Sequence) -> bool:
    """
    Is z in the type class of the composed type nu sigma given w?

    When z is in T_nu(u), u is in T_sigma(w) and sigma has unique parents this
    always holds; without unique parents it can fail.
    """
    _same_length(z, u, w)
    composed = nu.compose(sigma)
    observed = empirical_cond(z, w)
    if observed.in_size != len(composed) or observed.out_size != nu.out_size:
        raise DimensionError("sequences do not match the alphabets of the types")
    hypotheses = empirical_cond(z, u) == nu and empirical_cond(u, w) == sigma
    for a in range(observed.in_size):
        if observed.cond.counts[a] == 0:
            continue
        if composed[a][0] is None:
            return False
        if any(observed.fraction(a, c) != composed[a][c] for c in range(observed.out_size)):
            if hypotheses and sigma.has_unique_parents():
                logger.error("chained type membership failed under unique parents")
            return False
    return True


def membership_prob(mu: CondNType, sigma: CondNType, tau: NType, w: Sequence, y: Sequence) -> Fraction:
    """
    Pr(y in T_mu(U)) for U uniform over T_sigma(w), exactly.

    ``mu`` is a type of y given u, ``sigma`` of u given w with unique parents,
    ``tau`` the type of w, and y must lie in T_{mu sigma}(w).
    """
    _same_length(w, y)
    if empirical(w) != tau or sigma.cond != tau:
        raise ValidationError("tau must be the type of w and the conditioning type of sigma")
    if not sigma.has_unique_parents():
        raise ValidationError("sigma must have unique parents")
    if mu.cond != sigma.out_type():
        raise ValidationError("mu must condition on the u-type produced by sigma")

    parent = {b: a for a, row in enumerate(sigma.counts) for b, c in enumerate(row) if c > 0}
    observed = empirical_cond(y, w)
    numerator = 1
    for a in range(sigma.in_size):
        children = [b for b, p in parent.items() if p == a]
        for c in range(mu.out_size):
            split = tuple(mu.counts[b][c] for b in children)
            if sum(split) != observed.counts[a][c]:
                raise ValidationError("y is not in the type class of mu sigma given w")
            numerator *= multinomial(split) if split else 1
    return Fraction(numerator, type_class_size(sigma, w))


def btx_exponent(t: CondDist, rho: CondNType, u: Sequence, y: Sequence,
                 budget: int = DEFAULT_BUDGET) -> float:
    """-(1/n) log2 of the average of t(y|x) over x uniform on T_rho(u)."""
    _same_length(u, y)
    size = type_class_size(rho, u)
    total = 0.0
    for x in type_class_members(rho, u, budget):
        p = 1.0
        for a, b in zip(x, y):
            p *= float(t.table[a, b])
        total += p
    if total == 0.0:
        return math.inf
    return -math.log2(total / size) / len(u)


def _tables(row_margins: tuple[int, ...], col_caps: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Non-negative integer tables with the given row sums and column sums."""
    if not row_margins:
        if all(c == 0 for c in col_caps):
            yield ()
        return
    for row in _bounded_compositions(row_margins[0], col_caps):
        rest_caps = tuple(c - r for c, r in zip(col_caps, row))
        for rest in _tables(row_margins[1:], rest_caps):
            yield (row,) + rest


def fn_project(mu: CondNType, t: CondDist, rho: CondNType, sigma_tau: NType,
               budget: int = DEFAULT_BUDGET) -> float:
    """
    F_n(mu || t, rho | sigma tau): the minimum of D(zeta || t x rho | sigma tau)
    over joint n-types zeta(y,x|u) with marginals rho and mu, by enumeration.

    The problem separates over u; each u enumerates integer tables with row
    sums n_u mu(.|u) and column sums n_u rho(.|u).
    """
    if mu.cond != sigma_tau or rho.cond != sigma_tau:
        raise ValidationError("mu, rho and sigma_tau must share the conditioning type")
    if t.table.shape != (rho.out_size, mu.out_size):
        raise DimensionError(f"t has shape {t.table.shape}, expected {(rho.out_size, mu.out_size)}")

    n = sigma_tau.n
    tt = t.table
    total, seen = 0.0, 0
    for u in range(sigma_tau.alphabet_size):
        if sigma_tau.counts[u] == 0:
            continue
        col = rho.counts[u]
        best = math.inf
        for table in _tables(mu.counts[u], col):
            seen += 1
            _check_budget("joint n-types", seen, budget)
            value = 0.0
            for y, row in enumerate(table):
                for x, count in enumerate(row):
                    if count == 0:
                        continue
                    p = float(tt[x, y])
                    if p == 0.0:
                        value = math.inf
                        break
                    value += count / n * math.log2(count / (p * col[x]))
                if math.isinf(value):
                    break
            best = min(best, value)
        if math.isinf(best):
            return math.inf
        total += best
    logger.debug(f"fn_project scanned {seen} joint types")
    return max(total, 0.0)
