"""
Finite distributions, stochastic kernels and their composition algebra.

Every kernel is a dense numpy table whose leading axes index the
conditioning symbols and whose trailing ``out_ndim`` axes index the
outcome.  A ``Dist`` is the special case with no conditioning axes.

    v(y|x,u)  ->  table[x, u, y]     cond_shape (X, U), out_shape (Y,)
    rho(x|u)  ->  table[u, x]        cond_shape (U,),   out_shape (X,)
    tau(w)    ->  table[w]           cond_shape (),     out_shape (W,)
"""

import json
import logging
from dataclasses import dataclass
from decimal import Decimal
from functools import cached_property
from math import prod

import numpy as np

from app.errors import DimensionError, ValidationError

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


# ==============================================================================
# Kernels
# ==============================================================================

class CondDist:
    """
    A stochastic kernel: every slice over the outcome axes is a probability vector.

    Tables are copied on construction and frozen, so instances can be shared
    across threads and used as cache keys.
    """

    def __init__(self, table, out_ndim: int = 1):
        arr = np.array(table, dtype=float)
        if out_ndim < 1 or arr.ndim < out_ndim:
            raise DimensionError(
                f"table of rank {arr.ndim} cannot carry {out_ndim} outcome axes")
        if arr.size == 0:
            raise ValidationError("empty probability table")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("probability table has non-finite entries")
        if np.any(arr < 0):
            raise ValidationError(f"negative probability {arr.min():.3g}")

        out_axes = tuple(range(arr.ndim - out_ndim, arr.ndim))
        sums = arr.sum(axis=out_axes, keepdims=True)
        drift = float(np.max(np.abs(sums - 1.0)))
        if drift > RENORMALIZE_TOL:
            raise ValidationError(f"rows do not sum to 1 (max drift {drift:.3g})")
        if drift > EXACT_TOL:
            logger.debug(f"Renormalizing kernel with drift {drift:.3g}")
            arr = arr / sums

        arr.flags.writeable = False
        self._table = arr
        self._out_ndim = out_ndim

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def out_ndim(self) -> int:
        return self._out_ndim

    @property
    def cond_shape(self) -> tuple[int, ...]:
        return self._table.shape[:self._table.ndim - self._out_ndim]

    @property
    def out_shape(self) -> tuple[int, ...]:
        return self._table.shape[self._table.ndim - self._out_ndim:]

    @property
    def in_size(self) -> int:
        return prod(self.cond_shape)

    @property
    def out_size(self) -> int:
        return prod(self.out_shape)

    @property
    def rows(self) -> np.ndarray:
        """The table flattened to (in_size, out_size)."""
        return self._table.reshape(self.in_size, self.out_size)

    @cached_property
    def _key(self) -> tuple:
        return (type(self).__name__, self._table.shape, self._out_ndim, self._table.tobytes())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CondDist):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(cond={self.cond_shape}, out={self.out_shape})"

    def allclose(self, other: "CondDist", atol: float = 1e-12) -> bool:
        return self._table.shape == other.table.shape and bool(
            np.allclose(self._table, other.table, rtol=0.0, atol=atol))

    def to_json(self) -> dict:
        return {"rows": self.rows.tolist()}


class Dist(CondDist):
    """A probability vector (a kernel with nothing to condition on)."""

    def __init__(self, mass):
        arr = np.asarray(mass, dtype=float)
        super().__init__(arr, out_ndim=max(1, arr.ndim))

    @property
    def mass(self) -> np.ndarray:
        return self.table

    @property
    def alphabet_size(self) -> int:
        return self.out_size


class DetCondDist(CondDist):
    """
    A kernel sigma(u|w) in which every outcome u is reachable from at most one w.

    Knowing u therefore pins down w, which is what lets chained type classes
    compose.
    """

    def __init__(self, table):
        super().__init__(table, out_ndim=1)
        if len(self.cond_shape) != 1:
            raise DimensionError("a deterministic-parent kernel needs exactly one conditioning axis")
        parents = np.count_nonzero(self.table > 0, axis=0)
        if np.any(parents > 1):
            bad = np.flatnonzero(parents > 1).tolist()
            raise ValidationError(f"outputs {bad} are reachable from more than one input")

    def parent(self, u: int) -> int | None:
        """The unique input that can produce ``u``, or None if none can."""
        hits = np.flatnonzero(self.table[:, u] > 0)
        return int(hits[0]) if hits.size else None


@dataclass(frozen=True)
class ChannelPair:
    """Main channel t(y|x) and adversary channel q(z|x) of one interlope channel."""

    t: CondDist
    q: CondDist

    def __post_init__(self):
        if self.t.cond_shape != self.q.cond_shape:
            raise DimensionError(
                f"t and q disagree on the input alphabet: {self.t.cond_shape} vs {self.q.cond_shape}")

    @property
    def x_size(self) -> int:
        return self.t.in_size


# ==============================================================================
# Composition algebra
# ==============================================================================

def independent(v: CondDist, extra_shape: tuple[int, ...]) -> CondDist:
    """Lift v(y|x) to v(y|x,u) = v(y|x) for u ranging over ``extra_shape``."""
    extra_shape = tuple(extra_shape)
    if not extra_shape:
        return v
    cond, out = v.cond_shape, v.out_shape
    table = v.table.reshape(cond + (1,) * len(extra_shape) + out)
    table = np.broadcast_to(table, cond + extra_shape + out)
    return CondDist(table, out_ndim=v.out_ndim)


def _aligned(v: CondDist, rho: CondDist, broadcast: bool) -> CondDist:
    if rho.out_ndim != 1:
        raise DimensionError("the inner kernel must have a single outcome axis")
    expected = rho.out_shape + rho.cond_shape
    if v.cond_shape == expected:
        return v
    if broadcast and v.cond_shape == rho.out_shape:
        return independent(v, rho.cond_shape)
    raise DimensionError(
        f"kernel conditioned on {v.cond_shape} cannot follow one producing {rho.out_shape} "
        f"given {rho.cond_shape}" + ("" if broadcast else "; pass broadcast=True to lift it"))


def compose(v: CondDist, rho: CondDist, broadcast: bool = False) -> CondDist:
    """
    v rho (y|u) = sum_x v(y|x,u) rho(x|u).

    With ``broadcast=True`` a kernel v(y|x) that ignores u is lifted first.
    A ``Dist`` rho gives the output law of v under that input.
    """
    v = _aligned(v, rho, broadcast)
    x_size = rho.out_size
    cond_n = rho.in_size
    vt = v.table.reshape(x_size, cond_n, v.out_size)
    rt = rho.table.reshape(cond_n, x_size)
    out = np.einsum("cx,xcy->cy", rt, vt)
    shape = rho.cond_shape + v.out_shape
    if not rho.cond_shape:
        return Dist(out.reshape(shape))
    return CondDist(out.reshape(shape), out_ndim=v.out_ndim)


def joint(v: CondDist, rho: CondDist, broadcast: bool = False) -> CondDist:
    """(v x rho)(y,x|u) = v(y|x,u) rho(x|u), with the outcome axes ordered (y..., x)."""
    v = _aligned(v, rho, broadcast)
    x_size = rho.out_size
    cond_n = rho.in_size
    vt = v.table.reshape(x_size, cond_n, v.out_size)
    rt = rho.table.reshape(cond_n, x_size)
    out = np.einsum("cx,xcy->cyx", rt, vt)
    shape = rho.cond_shape + v.out_shape + rho.out_shape
    if not rho.cond_shape:
        return Dist(out.reshape(shape))
    return CondDist(out.reshape(shape), out_ndim=v.out_ndim + 1)


def marginal_out(v: CondDist, keep: int) -> CondDist:
    """Sum a joint outcome down to its ``keep``-th outcome axis."""
    lead = len(v.cond_shape)
    axes = tuple(lead + i for i in range(v.out_ndim) if i != keep)
    out = v.table.sum(axis=axes)
    return Dist(out) if lead == 0 else CondDist(out, out_ndim=1)


# ==============================================================================
# Constructors
# ==============================================================================

def bsc(flip: float) -> CondDist:
    """Binary symmetric kernel with crossover probability ``flip``."""
    if not 0.0 <= flip <= 1.0:
        raise ValidationError(f"crossover probability {flip} outside [0, 1]")
    return CondDist([[1.0 - flip, flip], [flip, 1.0 - flip]])


def bsc_pair(lambda_t: float, lambda_q: float) -> ChannelPair:
    return ChannelPair(t=bsc(lambda_t), q=bsc(lambda_q))


def identity_channel(size: int) -> CondDist:
    return CondDist(np.eye(size))


def uniform(size: int) -> Dist:
    return Dist(np.full(size, 1.0 / size))


def point_mass(size: int, symbol: int = 0) -> Dist:
    mass = np.zeros(size)
    mass[symbol] = 1.0
    return Dist(mass)


def uniform_rows(in_size: int, out_size: int) -> CondDist:
    return CondDist(np.full((in_size, out_size), 1.0 / out_size))


# ==============================================================================
# JSON
# ==============================================================================

def _exact_rows(rows) -> np.ndarray:
    """Check decimal rows exactly before handing floats to numpy."""
    if not isinstance(rows, list) or not rows:
        raise ValidationError("'rows' must be a non-empty list")
    width = None
    for row in rows:
        if not isinstance(row, list) or not row:
            raise ValidationError("every row must be a non-empty list of numbers")
        if width is not None and len(row) != width:
            raise DimensionError("rows have different lengths")
        width = len(row)
        total = sum((Decimal(str(v)) for v in row), Decimal(0))
        if abs(total - 1) > Decimal(str(RENORMALIZE_TOL)):
            raise ValidationError(f"row {row} sums to {total}, not 1")
    return np.array([[float(v) for v in row] for row in rows])


def from_json(payload: str | dict, kind: str = "cond") -> CondDist:
    """
    Parse ``{"rows": [[...], ...]}``.

    ``kind`` is ``"cond"``, ``"det"`` (deterministic-parent kernel) or
    ``"dist"`` (a single row).
    """
    if isinstance(payload, str):
        payload = json.loads(payload, parse_float=Decimal)
    if not isinstance(payload, dict) or "rows" not in payload:
        raise ValidationError("distribution JSON must be an object with a 'rows' key")
    table = _exact_rows(payload["rows"])
    if kind == "dist":
        if table.shape[0] != 1:
            raise DimensionError("a distribution takes exactly one row")
        return Dist(table[0])
    if kind == "det":
        return DetCondDist(table)
    return CondDist(table)
