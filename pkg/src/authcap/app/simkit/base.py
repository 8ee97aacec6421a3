import logging
import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product

from app.errors import BudgetExceededError, DimensionError, ValidationError
from app.probcore import CondDist

logger = logging.getLogger(__name__)

EXACT_BUDGET = 100_000_000

Word = tuple[int, ...]

# ==============================================================================
# Parameters and exact channel arithmetic
# ==============================================================================

@dataclass(frozen=True)
class CodeParams:
    """
    Sizes of one authentication code.

    ``message_count`` counts every message; a code that splits messages into
    clouds uses ``message_count = cloud_count * messages per cloud``.
    """

    n: int
    message_count: int
    key_count: int
    j: int = 1
    x_size: int = 2
    y_size: int | None = None
    z_size: int | None = None
    cloud_count: int = 1

    def __post_init__(self):
        if self.y_size is None:
            object.__setattr__(self, "y_size", self.x_size)
        if self.z_size is None:
            object.__setattr__(self, "z_size", self.x_size)
        for name in ("n", "message_count", "key_count", "j", "x_size", "y_size", "z_size", "cloud_count"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.message_count % self.cloud_count:
            raise ValidationError(f"{self.message_count} messages do not split into {self.cloud_count} clouds")

    @property
    def cloud_size(self) -> int:
        return self.message_count // self.cloud_count

    @property
    def rate(self) -> float:
        """log2 |M| / n."""
        return math.log2(self.message_count) / self.n

    @property
    def key_rate(self) -> float:
        """log2 |K| / (n j), amortized over the rounds one key serves."""
        return math.log2(self.key_count) / (self.n * self.j)

    def to_json(self) -> dict:
        return asdict(self) | {"rate": self.rate, "key_rate": self.key_rate}


def rational_kernel(t: CondDist) -> tuple[tuple[Fraction, ...], ...]:
    """The kernel's entries as the rationals their shortest decimal forms denote."""
    if len(t.cond_shape) != 1:
        raise DimensionError("channel must be a kernel with one input axis")
    return tuple(tuple(Fraction(repr(float(p))) for p in row) for row in t.rows)


def words(alphabet_size: int, n: int) -> list[Word]:
    """Every length-n word in lexicographic order."""
    return list(product(range(alphabet_size), repeat=n))


def word_prob(kernel: tuple[tuple[Fraction, ...], ...], out: Word, inp: Word) -> Fraction:
    """Memoryless extension: prod_i kernel(out_i | inp_i)."""
    p = Fraction(1)
    for a, b in zip(inp, out):
        p *= kernel[a][b]
        if not p:
            break
    return p


def check_budget(what: str, size: int, budget: int) -> None:
    if size > budget:
        raise BudgetExceededError(what, size, budget)


# ==============================================================================
# LAYER 1: AuthCode - interface for every executable code
# ==============================================================================

class AuthCode(ABC):
    """
    A keyed, round-aware code: a stochastic encoder f_i(x|m,k) and a decoder
    phi_i(y,k) that returns a message or None for "!".
    """

    def __init__(self, code_id: str, params: CodeParams, seed: int | None = None):
        self.code_id = code_id
        self.params = params
        self.seed = seed
        self.logger = logging.getLogger(f"{__name__}.{code_id}")

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def message_count(self) -> int:
        return self.params.message_count

    @property
    def key_count(self) -> int:
        return self.params.key_count

    @cached_property
    def outputs(self) -> list[Word]:
        return words(self.params.y_size, self.n)

    def check_round(self, round_i: int) -> None:
        if not 1 <= round_i <= self.params.j:
            raise ValidationError(f"round {round_i} outside 1..{self.params.j}")

    # =========================================================================
    # Abstract methods - MUST be implemented by all codes
    # =========================================================================

    @abstractmethod
    def encode_distribution(self, m: int, k: int, round_i: int = 1) -> dict[Word, Fraction]:
        """The law of the transmitted word for message m under key k in round i."""
        pass

    @abstractmethod
    def decode(self, y: Word, k: int, round_i: int = 1) -> int | None:
        pass

    @abstractmethod
    def codebook_json(self) -> dict:
        pass

    def to_json(self) -> dict:
        return {
            "code": self.code_id,
            "seed": self.seed,
            "params": self.params.to_json(),
            "codebook": self.codebook_json(),
        }
