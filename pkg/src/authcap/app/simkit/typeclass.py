"""
Superposition code over type classes.

A cloud centre w(m_hat) is drawn from T_tau; inside it every (m_tilde, k)
gets a satellite u(m_hat, m_tilde, k) drawn from T_sigma(w).  The encoder
sends x uniform on T_rho(u).  The decoder scores every satellite of every
key by the probability that x uniform on T_rho(u) produces y, and accepts
the unique best one only if it belongs to the receiver's key.
"""

from fractions import Fraction

from app.config import rng_stream
from app.errors import ValidationError
from app.probcore import CondDist
from app.simkit.base import AuthCode, CodeParams, Word, rational_kernel, word_prob
from app.typelab import CondNType, NType, Sequence, sample_type_class, type_class_members, type_class_size


class TypeClassCode(AuthCode):

    def __init__(self, params: CodeParams, rho: CondNType, sigma: CondNType, tau: NType,
                 centres: list[Sequence], satellites: dict[tuple[int, int, int], Sequence],
                 t: CondDist, seed: int | None = None):
        super().__init__("typeclass", params, seed)
        _check_types(params, rho, sigma, tau)
        if len(centres) != params.cloud_count:
            raise ValidationError(f"{len(centres)} cloud centres for {params.cloud_count} clouds")
        for (m_hat, _, _), u in satellites.items():
            # the centre must carry the conditioning type of sigma
            type_class_size(sigma, centres[m_hat])
            if _cond_counts(u, centres[m_hat], sigma) != sigma.counts:
                raise ValidationError(f"satellite {u.symbols} is not in T_sigma(w({m_hat}))")
        self.rho, self.sigma, self.tau = rho, sigma, tau
        self.centres = centres
        self.satellites = satellites
        self.t = t
        self._t_exact = rational_kernel(t)
        self._members: dict[Sequence, list[Word]] = {}
        self._best: dict[Word, tuple[int, int, int] | None] = {}

    def _triple(self, m: int) -> tuple[int, int]:
        return divmod(m, self.params.cloud_size)

    def members(self, u: Sequence) -> list[Word]:
        """T_rho(u), enumerated once per satellite."""
        if u not in self._members:
            self._members[u] = [x.symbols for x in type_class_members(self.rho, u)]
        return self._members[u]

    def encode_distribution(self, m: int, k: int, round_i: int = 1) -> dict[Word, Fraction]:
        self.check_round(round_i)
        m_hat, m_tilde = self._triple(m)
        xs = self.members(self.satellites[(m_hat, m_tilde, k)])
        weight = Fraction(1, len(xs))
        return {x: weight for x in xs}

    def score(self, y: Word, u: Sequence) -> Fraction:
        """sum over x in T_rho(u) of t(y|x)."""
        return sum((word_prob(self._t_exact, y, x) for x in self.members(u)), Fraction(0))

    def best_triple(self, y: Word) -> tuple[int, int, int] | None:
        """The unique maximizer of the score over all (m_hat, m_tilde, key), or None on a tie."""
        y = tuple(y)
        if y not in self._best:
            best, best_score, tied = None, Fraction(-1), False
            for triple, u in sorted(self.satellites.items()):
                s = self.score(y, u)
                if s > best_score:
                    best, best_score, tied = triple, s, False
                elif s == best_score:
                    tied = True
            self._best[y] = None if tied else best
        return self._best[y]

    def decode(self, y: Word, k: int, round_i: int = 1) -> int | None:
        self.check_round(round_i)
        best = self.best_triple(y)
        if best is None or best[2] != k:
            return None
        m_hat, m_tilde, _ = best
        return m_hat * self.params.cloud_size + m_tilde

    def codebook_json(self) -> dict:
        return {
            "rho": [list(r) for r in self.rho.counts],
            "sigma": [list(r) for r in self.sigma.counts],
            "tau": list(self.tau.counts),
            "centres": [list(w.symbols) for w in self.centres],
            "satellites": [
                {"m_hat": a, "m_tilde": b, "key": k, "u": list(u.symbols)}
                for (a, b, k), u in sorted(self.satellites.items())
            ],
        }


def _cond_counts(u: Sequence, w: Sequence, sigma: CondNType) -> tuple[tuple[int, ...], ...]:
    counts = [[0] * sigma.out_size for _ in range(sigma.in_size)]
    for a, b in zip(w, u):
        counts[a][b] += 1
    return tuple(tuple(row) for row in counts)


def _check_types(params: CodeParams, rho: CondNType, sigma: CondNType, tau: NType) -> None:
    if tau.n != params.n:
        raise ValidationError(f"tau has denominator {tau.n}, blocklength is {params.n}")
    if sigma.cond != tau:
        raise ValidationError("sigma must condition on the type tau")
    if not sigma.has_unique_parents():
        raise ValidationError("sigma must have unique parents")
    if rho.cond != sigma.out_type():
        raise ValidationError("rho must condition on the u-type that sigma produces")
    if rho.out_size != params.x_size:
        raise ValidationError(f"rho produces {rho.out_size} symbols, x alphabet has {params.x_size}")


def build_typeclass_code(params: CodeParams, rho: CondNType, sigma: CondNType, tau: NType,
                         t: CondDist, seed: int) -> TypeClassCode:
    """Draw centres and satellites uniformly from their type classes with seeded streams."""
    _check_types(params, rho, sigma, tau)
    if t.in_size != params.x_size or t.out_size != params.y_size:
        raise ValidationError("main channel does not match the code's alphabets")
    centre_rng = rng_stream(seed, "simkit.typeclass", "centres")
    satellite_rng = rng_stream(seed, "simkit.typeclass", "satellites")
    centres = [sample_type_class(tau, None, centre_rng) for _ in range(params.cloud_count)]
    satellites = {}
    for m_hat, w in enumerate(centres):
        for m_tilde in range(params.cloud_size):
            for k in range(params.key_count):
                satellites[(m_hat, m_tilde, k)] = sample_type_class(sigma, w, satellite_rng)
    return TypeClassCode(params, rho, sigma, tau, centres, satellites, t, seed)
