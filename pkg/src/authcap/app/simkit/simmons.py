"""
Keyed-subset authentication over a noiseless channel.

Each key owns a random subset of the input words, as large as the message
set; message m under key k is sent as the m-th word of that subset.  The
receiver rejects anything outside the subset of its key.
"""

import math
from fractions import Fraction

import numpy as np

from app.config import rng_stream
from app.errors import ValidationError
from app.simkit.base import AuthCode, CodeParams, Word, words


def simmons_params(n: int, key_count: int, x_size: int = 2, j: int = 1) -> CodeParams:
    """|M| = |X|^n / sqrt(|K|), which must come out as a positive integer."""
    root = math.isqrt(key_count)
    total = x_size ** n
    if key_count < 1 or root * root != key_count:
        raise ValidationError(f"key count {key_count} is not a perfect square")
    if total % root:
        raise ValidationError(f"|X|^n = {total} is not divisible by sqrt(|K|) = {root}")
    return CodeParams(n=n, message_count=total // root, key_count=key_count, j=j, x_size=x_size)


class SimmonsCode(AuthCode):

    def __init__(self, params: CodeParams, subsets: list[list[int]], seed: int | None = None):
        super().__init__("simmons", params, seed)
        if params.y_size != params.x_size:
            raise ValidationError("a noiseless code needs matching input and output alphabets")
        self.space = words(params.x_size, params.n)
        if len(subsets) != params.key_count:
            raise ValidationError(f"{len(subsets)} subsets for {params.key_count} keys")
        for k, subset in enumerate(subsets):
            if len(subset) != params.message_count or len(set(subset)) != len(subset):
                raise ValidationError(f"subset of key {k} must hold {params.message_count} distinct words")
            if any(not 0 <= x < len(self.space) for x in subset):
                raise ValidationError(f"subset of key {k} names words outside the input space")
        self.subsets = [list(s) for s in subsets]
        self._index = [{x: m for m, x in enumerate(s)} for s in self.subsets]
        self._word_index = {w: i for i, w in enumerate(self.space)}

    @property
    def incidence(self) -> np.ndarray:
        """Boolean [key, word] membership matrix."""
        table = np.zeros((self.key_count, len(self.space)), dtype=np.int64)
        for k, subset in enumerate(self.subsets):
            table[k, subset] = 1
        return table

    def encode_distribution(self, m: int, k: int, round_i: int = 1) -> dict[Word, Fraction]:
        self.check_round(round_i)
        return {self.space[self.subsets[k][m]]: Fraction(1)}

    def decode(self, y: Word, k: int, round_i: int = 1) -> int | None:
        self.check_round(round_i)
        return self._index[k].get(self._word_index[tuple(y)])

    def codebook_json(self) -> dict:
        return {"subsets": [[list(self.space[x]) for x in s] for s in self.subsets]}


def build_simmons(params: CodeParams, seed: int) -> SimmonsCode:
    """Independent uniform subsets per key, in random order, from a seeded stream."""
    expected = simmons_params(params.n, params.key_count, params.x_size, params.j)
    if params.message_count != expected.message_count:
        raise ValidationError(
            f"{params.key_count} keys over {params.x_size}^{params.n} words fix |M| = {expected.message_count}, "
            f"got {params.message_count}")
    rng = rng_stream(seed, "simkit.simmons", "subsets")
    total = params.x_size ** params.n
    subsets = [rng.choice(total, size=params.message_count, replace=False).tolist()
               for _ in range(params.key_count)]
    return SimmonsCode(params, subsets, seed)


def simmons_substitution_success(code: SimmonsCode) -> Fraction:
    """
    Best substitution attack: seeing x, send the x' != x most likely valid.

    Success = sum_x max_{x' != x} |K(x) & K(x')| / (|K| |M|), with K(x) the
    keys whose subset holds x.
    """
    inc = code.incidence
    overlap = inc.T @ inc
    np.fill_diagonal(overlap, 0)
    best = int(overlap.max(axis=1).sum()) if overlap.shape[0] > 1 else 0
    return Fraction(best, code.key_count * code.message_count)


def simmons_impersonation_success(code: SimmonsCode) -> Fraction:
    """Best blind attack: max_x' |K(x')| (|M| - 1) / (|K| |M|)."""
    counts = code.incidence.sum(axis=0)
    return Fraction(int(counts.max()) * (code.message_count - 1), code.key_count * code.message_count)
