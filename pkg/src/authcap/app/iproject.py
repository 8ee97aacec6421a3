"""
Constrained KL minimization (I-projection) and the L functional built on it.

F(mu || t, rho | sigma) = min D(zeta || t x rho | sigma) over joints zeta(y,x|u)
whose marginals are rho(x|u) and mu(y|u).  The single-marginal form
F(nu || q, rho | sigma) ranges over kernels zeta(z|x,u) with zeta rho = nu and
measures D(zeta || q | rho x sigma); writing pi = zeta x rho turns it into the
two-marginal problem with reference q, so both share the feasibility test.
"""

import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from itertools import product
from typing import Literal

import numpy as np
from scipy.optimize import linprog, minimize_scalar
from scipy.special import rel_entr

from app.errors import DimensionError, NonConvergenceError
from app.infofn import LN2, pos_part, s_ab, s_theorem1
from app.probcore import ChannelPair, CondDist, DetCondDist, Dist, bsc, compose, independent
from app.typelab import compositions
from shared.utils.helper import ordered_map

logger = logging.getLogger(__name__)

GAP_TOL = 1e-10
MAX_ITER = 10_000
STALL_CHECK_ITER = 1_000
STALL_GAP = 1e-6

Mode = Literal["both", "output"]
NuFamily = Literal["simplex", "bsc"]


@dataclass(frozen=True)
class ProjectionProblem:
    """
    One constrained KL minimization.

    ``reference`` is t(y|x) (or t(y|x,u)); ``rho`` is x|u; ``sigma`` weighs u;
    ``target`` is the prescribed output law given u.
    """

    reference: CondDist
    rho: CondDist
    sigma: Dist
    target: CondDist
    mode: Mode = "both"

    def __post_init__(self):
        if self.mode not in ("both", "output"):
            raise DimensionError(f"unknown constraint mode {self.mode!r}")
        if self.rho.out_ndim != 1 or len(self.rho.cond_shape) != 1:
            raise DimensionError("rho must be a kernel x|u with one conditioning axis")
        if self.sigma.out_shape != self.rho.cond_shape:
            raise DimensionError(f"sigma over {self.sigma.out_shape} does not weigh u in {self.rho.cond_shape}")
        ref = self.reference
        if ref.cond_shape == self.rho.out_shape:
            ref = independent(ref, self.rho.cond_shape)
            object.__setattr__(self, "reference", ref)
        if ref.cond_shape != self.rho.out_shape + self.rho.cond_shape:
            raise DimensionError(f"reference conditioned on {ref.cond_shape} does not fit rho")
        if self.target.cond_shape != self.rho.cond_shape or self.target.out_shape != ref.out_shape:
            raise DimensionError("target law must map the conditioning of rho to the reference outcomes")

    @property
    def u_size(self) -> int:
        return self.rho.in_size

    def base(self, u: int) -> np.ndarray:
        """t(y|x,u) rho(x|u) as a [y, x] matrix."""
        x_size = self.rho.out_size
        ref = self.reference.table.reshape(x_size, self.u_size, -1)[:, u, :]
        return ref.T * self.rho.rows[u][np.newaxis, :]


@dataclass(frozen=True)
class ProjectionResult:
    value: float
    minimizer: CondDist | None
    iterations: int
    converged: bool


# ==============================================================================
# Per-conditioning-symbol solvers
# ==============================================================================

def _support_feasible(base: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> bool:
    """Is there a nonnegative plan on the support of ``base`` with these marginals?"""
    if np.all(base > 0):
        return True
    cells = np.argwhere(base > 0)
    if cells.size == 0:
        return False
    n_rows, n_cols = base.shape
    a_eq = np.zeros((n_rows + n_cols, len(cells)))
    for k, (i, j) in enumerate(cells):
        a_eq[i, k] = 1.0
        a_eq[n_rows + j, k] = 1.0
    b_eq = np.concatenate([rows, cols])
    res = linprog(np.zeros(len(cells)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0


def _scale(base: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, int, float]:
    """Alternate row and column scaling of ``base`` toward the two marginals."""
    u = np.ones(base.shape[0])
    v = np.ones(base.shape[1])
    plan, gap = base, math.inf
    for it in range(1, MAX_ITER + 1):
        u = rows / (base @ v)
        v = cols / (base.T @ u)
        plan = u[:, np.newaxis] * base * v[np.newaxis, :]
        gap = float(np.max(np.abs(plan.sum(axis=1) - rows)))
        if gap < GAP_TOL:
            return plan, it, gap
        if it == STALL_CHECK_ITER and gap > STALL_GAP and not _support_feasible(base, rows, cols):
            return plan, it, math.inf
    return plan, MAX_ITER, gap


def _mirror(ref: np.ndarray, weights: np.ndarray, target: np.ndarray,
            eta: float = 1.0) -> tuple[np.ndarray, int, float]:
    """
    Exponentiated-gradient steps on the rows of zeta(z|x).

    Each step multiplies zeta(.|x) by (target / zeta-image)^eta and renormalizes
    the row, so every iterate stays row-stochastic.
    """
    zeta = ref.copy()
    gap = math.inf
    for it in range(1, MAX_ITER + 1):
        image = weights @ zeta
        ratio = np.divide(target, image, out=np.zeros_like(target), where=image > 0)
        zeta = zeta * ratio[np.newaxis, :] ** eta
        zeta = zeta / zeta.sum(axis=1, keepdims=True)
        gap = float(np.max(np.abs(weights @ zeta - target)))
        if gap < GAP_TOL:
            return zeta, it, gap
    return zeta, MAX_ITER, gap


# ==============================================================================
# Public solvers
# ==============================================================================

def _finish(name: str, converged: bool, strict: bool, gap: float) -> None:
    if converged:
        return
    message = f"{name} stopped after {MAX_ITER} iterations with marginal gap {gap:.3g}"
    if strict:
        raise NonConvergenceError(message)
    logger.warning(message)


def f_project(problem: ProjectionProblem, strict: bool = False) -> ProjectionResult:
    """
    Both-marginal F(mu || t, rho | sigma) by iterative proportional fitting.

    Returns +inf with no minimizer when some u of positive weight admits no
    joint on the support of t x rho with the prescribed marginals.
    """
    y_size, x_size = problem.base(0).shape
    plans = np.zeros((problem.u_size, y_size, x_size))
    total, iterations, converged, worst_gap = 0.0, 0, True, 0.0
    feasible_everywhere = True

    for u in range(problem.u_size):
        base = problem.base(u)
        rows = problem.target.rows[u]
        cols = problem.rho.rows[u]
        ya, xa = rows > 0, cols > 0
        sub = base[np.ix_(ya, xa)]
        weight = float(problem.sigma.mass[u])

        if not _support_feasible(sub, rows[ya], cols[xa]):
            feasible_everywhere = False
            if weight > 0:
                return ProjectionResult(math.inf, None, iterations, True)
            continue

        plan, it, gap = _scale(sub, rows[ya], cols[xa])
        if math.isinf(gap):
            feasible_everywhere = False
            if weight > 0:
                return ProjectionResult(math.inf, None, iterations + it, True)
            continue
        iterations += it
        worst_gap = max(worst_gap, gap)
        converged = converged and gap < GAP_TOL
        plans[u][np.ix_(ya, xa)] = plan
        if weight > 0:
            total += weight * float(rel_entr(plan, sub).sum()) / LN2

    _finish("f_project", converged, strict, worst_gap)
    logger.debug(f"f_project value={total:.6g} iterations={iterations}")
    minimizer = None
    if feasible_everywhere:
        minimizer = CondDist(plans.reshape(problem.rho.cond_shape + (y_size, x_size)), out_ndim=2)
    return ProjectionResult(max(total, 0.0), minimizer, iterations, converged)


def f_project_single(problem: ProjectionProblem, strict: bool = False, eta: float = 1.0) -> ProjectionResult:
    """
    Single-marginal F(nu || q, rho | sigma) by mirror descent on zeta(z|x,u).

    A run that misses the tolerance is retried with the two-marginal scaling
    solver on pi = zeta x rho, which has the same minimizer.
    """
    x_size = problem.rho.out_size
    ref_all = problem.reference.table.reshape(x_size, problem.u_size, -1)
    z_size = ref_all.shape[2]
    kernels = np.zeros((x_size, problem.u_size, z_size))
    total, iterations, converged, worst_gap = 0.0, 0, True, 0.0

    for u in range(problem.u_size):
        ref = ref_all[:, u, :]
        weights = problem.rho.rows[u]
        target = problem.target.rows[u]
        weight = float(problem.sigma.mass[u])
        xa, za = weights > 0, target > 0
        kernels[:, u, :] = ref

        base = ref[np.ix_(xa, za)].T * weights[xa][np.newaxis, :]
        if not _support_feasible(base, target[za], weights[xa]):
            if weight > 0:
                return ProjectionResult(math.inf, None, iterations, True)
            continue

        # Rows restricted to the target support must still carry mass.
        restricted = ref[np.ix_(xa, za)]
        restricted = restricted / restricted.sum(axis=1, keepdims=True)
        zeta, it, gap = _mirror(restricted, weights[xa], target[za], eta)
        if gap >= GAP_TOL:
            plan, extra, gap = _scale(base, target[za], weights[xa])
            zeta = (plan / weights[xa][np.newaxis, :]).T
            it += extra
        iterations += it
        worst_gap = max(worst_gap, gap)
        converged = converged and gap < GAP_TOL

        full = np.zeros((int(xa.sum()), z_size))
        full[:, za] = zeta
        kernels[xa, u, :] = full
        if weight > 0:
            div = rel_entr(full, ref[xa]).sum(axis=1) / LN2
            total += weight * float(np.dot(weights[xa], div))

    _finish("f_project_single", converged, strict, worst_gap)
    return ProjectionResult(max(total, 0.0), CondDist(kernels), iterations, converged)


def project(problem: ProjectionProblem, strict: bool = False) -> ProjectionResult:
    """Dispatch on the constraint mode."""
    if problem.mode == "both":
        return f_project(problem, strict)
    return f_project_single(problem, strict)


# ==============================================================================
# Minimization over adversary kernels nu(z|u)
# ==============================================================================

def nu_grid(u_size: int, z_size: int, resolution: int, family: NuFamily = "simplex") -> list[CondDist]:
    """
    Candidate kernels nu(z|u) in a fixed order.

    ``simplex`` takes every row on the lattice with step 1/resolution;
    ``bsc`` takes BSC(lambda) for lambda = 0, 1/resolution, ..., 1.
    """
    if resolution < 1:
        raise DimensionError(f"grid resolution must be positive, got {resolution}")
    if family == "bsc":
        if u_size != 2 or z_size != 2:
            raise DimensionError("the symmetric family needs binary u and z")
        return [bsc(k / resolution) for k in range(resolution + 1)]
    rows = [np.array(c, dtype=float) / resolution for c in compositions(resolution, z_size)]
    return [CondDist(np.vstack(combo)) for combo in product(rows, repeat=u_size)]


@dataclass(frozen=True)
class NuMinimum:
    value: float
    witness: CondDist
    evaluations: int
    parts: dict[str, float] = field(default_factory=dict)


def minimize_over_nu(objective: Callable[[CondDist], float], u_size: int, z_size: int,
                     resolution: int, family: NuFamily = "simplex",
                     extra: Iterable[CondDist] = (), threads: int | None = None) -> NuMinimum:
    """
    Grid search then local refinement of ``objective`` over nu(z|u).

    Extra candidates (e.g. the no-tampering witness q rho) are always scored.
    Ties go to the smaller crossover probability in the symmetric family and
    to the earlier candidate (extras first) otherwise.
    """
    grid = nu_grid(u_size, z_size, resolution, family)
    candidates = list(extra) + grid
    values = ordered_map(objective, candidates, threads)

    def rank(k: int) -> tuple:
        if family == "bsc":
            return values[k], float(candidates[k].table[0, 1]), k
        return values[k], k

    best = min(range(len(candidates)), key=rank)
    best_value, best_nu = values[best], candidates[best]
    evaluations = len(candidates)

    step = 1.0 / resolution
    if family == "bsc":
        centre = float(best_nu.table[0, 1])
        lo, hi = max(0.0, centre - step), min(1.0, centre + step)
        res = minimize_scalar(lambda lam: objective(bsc(lam)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        evaluations += int(res.nfev)
        if res.fun < best_value:
            best_value, best_nu = float(res.fun), bsc(float(res.x))
    elif z_size == 2:
        for u in range(u_size):
            centre = float(best_nu.table[u, 1])
            lo, hi = max(0.0, centre - step), min(1.0, centre + step)

            def along(p: float, u: int = u, nu: CondDist = best_nu) -> float:
                table = np.array(nu.table)
                table[u] = [1.0 - p, p]
                return objective(CondDist(table))

            res = minimize_scalar(along, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
            evaluations += int(res.nfev)
            if res.fun < best_value:
                table = np.array(best_nu.table)
                table[u] = [1.0 - res.x, res.x]
                best_value, best_nu = float(res.fun), CondDist(table)

    logger.debug(f"nu search: {evaluations} evaluations, best {best_value:.6g}")
    return NuMinimum(best_value, best_nu, evaluations)


# ==============================================================================
# L functional
# ==============================================================================

def _penalty(pair: ChannelPair, rho: CondDist, weights: Dist, nu: CondDist) -> float:
    problem = ProjectionProblem(pair.q, rho, weights, nu, mode="output")
    return f_project_single(problem).value


def l_func(pair: ChannelPair, rho: CondDist, sigma: DetCondDist, tau: Dist,
           resolution: int = 100, family: NuFamily = "simplex",
           threads: int | None = None) -> NuMinimum:
    """
    L(t, q | rho, sigma, tau) = min_nu F(nu || q, rho | sigma tau) + |S(t rho, nu | sigma, tau)|^+.

    The reported witness is one minimizer; uniqueness is not claimed.
    """
    t_rho = compose(pair.t, rho, broadcast=True)
    q_rho = compose(pair.q, rho, broadcast=True)
    weights = compose(sigma, tau)

    def objective(nu: CondDist) -> float:
        penalty = _penalty(pair, rho, weights, nu)
        if math.isinf(penalty):
            return math.inf
        return penalty + pos_part(s_theorem1(t_rho, nu, sigma, tau))

    found = minimize_over_nu(objective, rho.in_size, pair.q.out_size, resolution, family,
                             extra=[q_rho], threads=threads)
    penalty = _penalty(pair, rho, weights, found.witness)
    return NuMinimum(found.value, found.witness, found.evaluations,
                     {"penalty": penalty, "secrecy": found.value - penalty})


def l_func_backoff(pair: ChannelPair, rho: CondDist, sigma: DetCondDist, tau: Dist,
                   gamma1: float, gamma2: float, resolution: int = 100,
                   family: NuFamily = "simplex", threads: int | None = None) -> NuMinimum:
    """min_nu F(nu || q, rho | sigma tau) + S_{-gamma1, gamma1 - gamma2}(t rho, nu | sigma, tau)."""
    t_rho = compose(pair.t, rho, broadcast=True)
    q_rho = compose(pair.q, rho, broadcast=True)
    weights = compose(sigma, tau)

    def objective(nu: CondDist) -> float:
        penalty = _penalty(pair, rho, weights, nu)
        if math.isinf(penalty):
            return math.inf
        return penalty + s_ab(t_rho, nu, -gamma1, gamma1 - gamma2, sigma, tau)

    return minimize_over_nu(objective, rho.in_size, pair.q.out_size, resolution, family,
                            extra=[q_rho], threads=threads)
