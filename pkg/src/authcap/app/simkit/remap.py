"""
Trading message rate for authentication rate with keyed injective maps.

The key becomes (k1, k2).  In round i the reduced message m' is carried by
the base code as g_{k2,i}(m') under key k1; the receiver inverts g and
rejects base messages outside its image.
"""

import math
from collections.abc import Mapping
from fractions import Fraction

from app.config import rng_stream
from app.errors import ValidationError
from app.simkit.base import AuthCode, CodeParams, Word


class RemappedCode(AuthCode):

    def __init__(self, base: AuthCode, reduced_count: int, key2_count: int,
                 maps: Mapping[tuple[int, int], tuple[int, ...]], seed: int | None = None):
        j = base.params.j
        params = CodeParams(
            n=base.n, message_count=reduced_count, key_count=base.key_count * key2_count, j=j,
            x_size=base.params.x_size, y_size=base.params.y_size, z_size=base.params.z_size,
        )
        super().__init__(f"remapped-{base.code_id}", params, seed)
        if not 1 <= reduced_count <= base.message_count:
            raise ValidationError(f"reduced message count {reduced_count} outside 1..{base.message_count}")
        for k2 in range(key2_count):
            for i in range(1, j + 1):
                g = maps.get((k2, i))
                if g is None:
                    raise ValidationError(f"no map for key {k2} in round {i}")
                if len(g) != reduced_count or len(set(g)) != len(g):
                    raise ValidationError(f"map for key {k2} round {i} is not injective on {reduced_count} messages")
                if any(not 0 <= m < base.message_count for m in g):
                    raise ValidationError(f"map for key {k2} round {i} leaves the base message set")
        self.base = base
        self.key2_count = key2_count
        self.maps = {key: tuple(g) for key, g in maps.items()}
        self._inverse = {key: {m: a for a, m in enumerate(g)} for key, g in self.maps.items()}

    def split_key(self, k: int) -> tuple[int, int]:
        """k = k1 * |K2| + k2."""
        return divmod(k, self.key2_count)

    def encode_distribution(self, m: int, k: int, round_i: int = 1) -> dict[Word, Fraction]:
        self.check_round(round_i)
        k1, k2 = self.split_key(k)
        return self.base.encode_distribution(self.maps[(k2, round_i)][m], k1, round_i)

    def decode(self, y: Word, k: int, round_i: int = 1) -> int | None:
        self.check_round(round_i)
        k1, k2 = self.split_key(k)
        m = self.base.decode(y, k1, round_i)
        if m is None:
            return None
        return self._inverse[(k2, round_i)].get(m)

    def codebook_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "key2_count": self.key2_count,
            "maps": [{"key2": k2, "round": i, "image": list(g)} for (k2, i), g in sorted(self.maps.items())],
        }


def default_key2_count(message_count: int, reduced_count: int, j: int) -> int:
    """(|M| / |M'|)^(j+1), which must be an integer."""
    count = Fraction(message_count, reduced_count) ** (j + 1)
    if count.denominator != 1:
        raise ValidationError(
            f"(|M|/|M'|)^(j+1) = {count} is not an integer; pick message counts that divide")
    return int(count)


def remap_transform(base: AuthCode, reduced_count: int, seed: int, key2_count: int | None = None,
                    identity: bool = False) -> RemappedCode:
    """
    Draw g_{k2,i} uniformly among injective maps, independently per (k2, round).

    ``identity`` uses g(m') = m' everywhere, which with equal message counts
    and one extra key reproduces the base code exactly.
    """
    j = base.params.j
    if key2_count is None:
        key2_count = default_key2_count(base.message_count, reduced_count, j)
    if key2_count < 1:
        raise ValidationError("the second key set must be non-empty")
    rng = rng_stream(seed, "simkit.remap", "maps")
    maps = {}
    for k2 in range(key2_count):
        for i in range(1, j + 1):
            if identity:
                maps[(k2, i)] = tuple(range(reduced_count))
            else:
                maps[(k2, i)] = tuple(int(m) for m in rng.choice(base.message_count, size=reduced_count,
                                                                 replace=False))
    return RemappedCode(base, reduced_count, key2_count, maps, seed)


def remapped_rates(r: float, alpha: float, kappa: float, beta: float, n: int, j: int) -> tuple[float, float, float]:
    """(r - beta, alpha + beta - 2 log2(n e) / n, kappa + (1 + 1/j) beta)."""
    if n < 1 or j < 1:
        raise ValidationError("blocklength and round count must be positive")
    if beta < 0 or (beta > 0 and beta >= r):
        raise ValidationError(f"beta must satisfy 0 <= beta < r = {r}, got {beta}")
    return r - beta, alpha + beta - 2.0 * math.log2(n * math.e) / n, kappa + (1.0 + 1.0 / j) * beta
