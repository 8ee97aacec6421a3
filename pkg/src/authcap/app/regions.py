"""
Rate-region membership, closed-form boundaries and binary symmetric sweeps.

Every region here is linear in (r, alpha, kappa) once the auxiliary choice is
fixed, so membership reduces to a handful of scalar bounds computed once per
auxiliary choice (``region_bounds``) and reused across points and abscissae.

The symmetric sweeps restrict rho, sigma, tau and the adversary kernel to
binary symmetric families.  They trace inner bounds only; nothing here claims
the restricted auxiliaries are optimal.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from tqdm import tqdm

from app.errors import ValidationError
from app.infofn import kl_div, mutual_info, pos_part
from app.iproject import NuFamily, l_func, l_func_backoff, nu_grid
from app.probcore import (ChannelPair, CondDist, DetCondDist, Dist, bsc, bsc_pair, compose,
                          point_mass, uniform)
from shared.utils.helper import ordered_map

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
KAPPA_TILDE_MAX = 2.0

SweepMode = Literal["r-vs-alpha", "alpha-vs-kappa", "alpha-vs-lambda_t"]
CloudFamily = Literal["single-cloud", "binary-cloud"]

# Constraint identifiers, shared by verdicts and the sweep CSV.
SUM_RATE = "r+alpha<=I(t_rho;sigma_tau)"
SECRECY = "alpha<=L"
CONDITIONAL = "alpha<=I(t_rho;sigma|tau)"
KEY = "alpha-j*kappa<=0"
SECRECY_3 = "(1+1/j)alpha-kappa<=L"
CONDITIONAL_3 = "(1+1/j)alpha-kappa<=I(t_rho;sigma|tau)"
SUM_RATE_BACKOFF = "r+alpha<=I(t_rho;sigma_tau)-gamma2"
CONDITIONAL_BACKOFF = "alpha<=I(t_rho;sigma|tau)-gamma1"
SECRECY_BACKOFF = "alpha<=L_gamma"
G_RATE = "r+kappa<=I(t_rho;tau)+kappa_tilde"
G_KEY = "alpha-kappa<=-kappa_tilde"
G_EXPONENT = "alpha<=G(kappa_tilde)"


# ==============================================================================
# Data model
# ==============================================================================

@dataclass(frozen=True)
class RatePoint:
    """(r, alpha, kappa) in bits per symbol."""

    r: float
    alpha: float
    kappa: float

    def __post_init__(self):
        for name in ("r", "alpha", "kappa"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be a finite non-negative rate, got {value}")

    @classmethod
    def parse(cls, text: str) -> "RatePoint":
        """From ``"r,alpha,kappa"``."""
        parts = text.split(",")
        if len(parts) != 3:
            raise ValidationError(f"expected r,alpha,kappa, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError as e:
            raise ValidationError(f"bad rate point {text!r}: {e}")

    def as_dict(self) -> dict[str, float]:
        return {"r": self.r, "alpha": self.alpha, "kappa": self.kappa}


@dataclass(frozen=True)
class AuxiliaryChoice:
    """rho(x|u), sigma(u|w), tau(w) and the round count j."""

    rho: CondDist
    sigma: CondDist
    tau: Dist
    j: int = 1
    label: str = ""
    relaxed: bool = False

    def __post_init__(self):
        if self.j < 1:
            raise ValidationError(f"round count must be positive, got {self.j}")
        if not self.relaxed and not isinstance(self.sigma, DetCondDist):
            raise ValidationError("sigma must have unique parents unless the choice is marked relaxed")
        if self.sigma.cond_shape != self.tau.out_shape:
            raise ValidationError("sigma must condition on the alphabet of tau")
        if self.rho.cond_shape != self.sigma.out_shape:
            raise ValidationError("rho must condition on the alphabet sigma produces")


@dataclass(frozen=True)
class BscFamily:
    lambda_t: float
    lambda_q: float
    j: int = 1

    def __post_init__(self):
        for name in ("lambda_t", "lambda_q"):
            value = getattr(self, name)
            if not 0.0 <= value <= 0.5:
                raise ValidationError(f"{name} must lie in [0, 1/2], got {value}")
        if self.j < 1:
            raise ValidationError(f"round count must be positive, got {self.j}")

    @property
    def pair(self) -> ChannelPair:
        return bsc_pair(self.lambda_t, self.lambda_q)


@dataclass(frozen=True)
class RegionVerdict:
    contained: bool
    slacks: dict[str, float]
    binding_constraints: tuple[str, ...]
    witness: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "contained": self.contained,
            "slacks": dict(self.slacks),
            "binding_constraints": list(self.binding_constraints),
            "witness": dict(self.witness),
        }


@dataclass(frozen=True)
class RegionBounds:
    """The scalar bounds every region test needs for one auxiliary choice."""

    mutual: float        # I(t rho, sigma tau)
    conditional: float   # I(t rho, sigma | tau)
    l_value: float
    witness: CondDist


def _verdict(slacks: dict[str, float], tol: float, witness: dict[str, float] | None = None) -> RegionVerdict:
    contained = all(s >= -tol for s in slacks.values())
    binding = tuple(name for name, s in slacks.items() if s <= tol)
    return RegionVerdict(contained, slacks, binding, witness or {})


# ==============================================================================
# Theorem regions
# ==============================================================================

@lru_cache(maxsize=4096)
def region_bounds(pair: ChannelPair, aux: AuxiliaryChoice, resolution: int = 100,
                  family: NuFamily = "simplex") -> RegionBounds:
    t_rho = compose(pair.t, aux.rho, broadcast=True)
    mutual = mutual_info(t_rho, compose(aux.sigma, aux.tau))
    conditional = mutual_info(t_rho, aux.sigma, aux.tau)
    found = l_func(pair, aux.rho, aux.sigma, aux.tau, resolution=resolution, family=family)
    logger.debug(f"bounds {aux.label or aux}: I={mutual:.6g} I_cond={conditional:.6g} L={found.value:.6g}")
    return RegionBounds(mutual, conditional, found.value, found.witness)


def _theorem1_slacks(p: RatePoint, b: RegionBounds, j: int) -> dict[str, float]:
    return {
        SUM_RATE: b.mutual - p.r - p.alpha,
        SECRECY: b.l_value - p.alpha,
        CONDITIONAL: b.conditional - p.alpha,
        KEY: j * p.kappa - p.alpha,
    }


def _theorem3_slacks(p: RatePoint, b: RegionBounds, j: int) -> dict[str, float]:
    lhs = (1.0 + 1.0 / j) * p.alpha - p.kappa
    return {
        SUM_RATE: b.mutual - p.r - p.alpha,
        SECRECY_3: b.l_value - lhs,
        CONDITIONAL_3: b.conditional - lhs,
        KEY: j * p.kappa - p.alpha,
    }


def theorem1_contains(p: RatePoint, aux: AuxiliaryChoice, pair: ChannelPair, *,
                      bounds: RegionBounds | None = None, resolution: int = 100,
                      family: NuFamily = "simplex", tol: float = DEFAULT_TOL) -> RegionVerdict:
    """r + alpha <= I(t rho, sigma tau); alpha <= L; alpha <= I(t rho, sigma|tau); alpha <= j kappa."""
    bounds = bounds or region_bounds(pair, aux, resolution, family)
    return _verdict(_theorem1_slacks(p, bounds, aux.j), tol)


def theorem3_contains(p: RatePoint, aux: AuxiliaryChoice, pair: ChannelPair, *,
                      bounds: RegionBounds | None = None, resolution: int = 100,
                      family: NuFamily = "simplex", tol: float = DEFAULT_TOL) -> RegionVerdict:
    """The closure of the first region under the rate-for-authentication transform."""
    bounds = bounds or region_bounds(pair, aux, resolution, family)
    return _verdict(_theorem3_slacks(p, bounds, aux.j), tol)


def theorem2_transform(p: RatePoint, beta: float, j: int) -> RatePoint:
    """
    (r - beta, alpha + beta, kappa + (1 + 1/j) beta), computed on the decimal
    values of the inputs so that e.g. 0.5 - 0.2 gives exactly 0.3.
    """
    if j < 1:
        raise ValidationError(f"round count must be positive, got {j}")
    if beta < 0 or (beta > 0 and beta >= p.r):
        raise ValidationError(f"beta must satisfy 0 <= beta < r = {p.r}, got {beta}")
    r, alpha, kappa, b = (Fraction(str(v)) for v in (p.r, p.alpha, p.kappa, beta))
    return RatePoint(float(r - b), float(alpha + b), float(kappa + (1 + Fraction(1, j)) * b))


def _theorem1_caps(b: RegionBounds, r: float, kappa: float, j: int) -> dict[str, float]:
    return {
        SUM_RATE: b.mutual - r,
        SECRECY: b.l_value,
        CONDITIONAL: b.conditional,
        KEY: j * kappa,
    }


def _theorem3_caps(b: RegionBounds, r: float, kappa: float, j: int) -> dict[str, float]:
    share = j / (j + 1.0)
    return {
        SUM_RATE: b.mutual - r,
        SECRECY_3: share * (kappa + b.l_value),
        CONDITIONAL_3: share * (kappa + b.conditional),
        KEY: j * kappa,
    }


def _best(caps: dict[str, float], tol: float = DEFAULT_TOL) -> tuple[float, str] | None:
    name = min(caps, key=caps.get)
    value = caps[name]
    if value < -tol:
        return None
    return max(value, 0.0), name


def max_alpha_theorem1(bounds: RegionBounds, r: float, kappa: float, j: int) -> float | None:
    found = _best(_theorem1_caps(bounds, r, kappa, j))
    return None if found is None else found[0]


def max_alpha_theorem3(bounds: RegionBounds, r: float, kappa: float, j: int) -> float | None:
    found = _best(_theorem3_caps(bounds, r, kappa, j))
    return None if found is None else found[0]


# ==============================================================================
# Finite-margin region and rate split
# ==============================================================================

@dataclass(frozen=True)
class RateSplit:
    r_hat: float
    r_tilde: float
    kappa_tilde: float


def theorem1_backoff_contains(p: RatePoint, aux: AuxiliaryChoice, pair: ChannelPair,
                              gamma1: float, gamma2: float, *, resolution: int = 100,
                              family: NuFamily = "simplex", tol: float = DEFAULT_TOL) -> RegionVerdict:
    """The region at margins gamma1, gamma2 > 0; its points lie in the limiting region."""
    if gamma1 <= 0 or gamma2 <= 0:
        raise ValidationError("margins must be strictly positive")
    bounds = region_bounds(pair, aux, resolution, family)
    l_gamma = l_func_backoff(pair, aux.rho, aux.sigma, aux.tau, gamma1, gamma2,
                             resolution=resolution, family=family).value
    slacks = {
        KEY: aux.j * p.kappa - p.alpha,
        SUM_RATE_BACKOFF: bounds.mutual - gamma2 - p.r - p.alpha,
        CONDITIONAL_BACKOFF: bounds.conditional - gamma1 - p.alpha,
        SECRECY_BACKOFF: l_gamma - p.alpha,
    }
    return _verdict(slacks, tol, {"L_gamma": l_gamma})


def rate_split(p: RatePoint, bounds: RegionBounds, j: int, gamma1: float, gamma2: float,
               l_gamma: float, tol: float = DEFAULT_TOL) -> RateSplit | None:
    """
    A witness (r_hat, r_tilde, kappa_tilde) for the split system

        r <= r_hat + r_tilde,  kappa_tilde <= kappa,
        r_tilde + j kappa_tilde = I(t rho, sigma|tau) - gamma1,
        r_tilde + r_hat + j kappa_tilde = I(t rho, sigma tau) - gamma2,
        alpha <= j kappa_tilde <= L_gamma,

    with all split rates non-negative; None if there is none.  Taking
    kappa_tilde = alpha / j leaves the most room for r.
    """
    kappa_tilde = p.alpha / j
    r_tilde = bounds.conditional - gamma1 - j * kappa_tilde
    r_hat = (bounds.mutual - gamma2) - (bounds.conditional - gamma1)
    ok = (kappa_tilde <= p.kappa + tol
          and j * kappa_tilde <= l_gamma + tol
          and r_tilde >= -tol
          and r_hat >= -tol
          and p.r <= r_hat + r_tilde + tol)
    if not ok:
        return None
    return RateSplit(max(r_hat, 0.0), max(r_tilde, 0.0), kappa_tilde)


# ==============================================================================
# Comparison region with the corrected exponent
# ==============================================================================

@dataclass(frozen=True, eq=False)
class GungorTable:
    """
    D(nu || q rho | tau) and I(nu, tau) over a grid of adversary kernels, so
    G(kappa_tilde) = min_nu D + |kappa_tilde + I(t rho, tau) - I(nu, tau)|^+
    is a vectorized minimum for any kappa_tilde.
    """

    pair: ChannelPair
    rho: CondDist
    tau: Dist
    family: NuFamily
    resolution: int
    main_info: float
    divs: np.ndarray
    infos: np.ndarray
    nus: tuple[CondDist, ...]

    def _terms(self, nu: CondDist) -> tuple[float, float]:
        q_rho = compose(self.pair.q, self.rho, broadcast=True)
        return kl_div(nu, q_rho, self.tau), mutual_info(nu, self.tau)

    def coarse(self, kappa_tilde: float) -> tuple[float, int]:
        values = self.divs + np.maximum(kappa_tilde + self.main_info - self.infos, 0.0)
        best = int(np.argmin(values))
        return float(values[best]), best

    def __call__(self, kappa_tilde: float) -> float:
        value, best = self.coarse(kappa_tilde)
        if self.family != "bsc":
            return value
        centre = float(self.nus[best].table[0, 1])
        step = 1.0 / self.resolution

        def objective(lam: float) -> float:
            div, info = self._terms(bsc(lam))
            return div + pos_part(kappa_tilde + self.main_info - info)

        res = minimize_scalar(objective, bounds=(max(0.0, centre - step), min(1.0, centre + step)),
                              method="bounded", options={"xatol": 1e-10})
        return min(value, float(res.fun))


@lru_cache(maxsize=256)
def gungor_table(pair: ChannelPair, rho: CondDist, tau: Dist, resolution: int = 100,
                 family: NuFamily = "simplex") -> GungorTable:
    q_rho = compose(pair.q, rho, broadcast=True)
    nus = [q_rho] + nu_grid(rho.in_size, pair.q.out_size, resolution, family)
    terms = ordered_map(lambda nu: (kl_div(nu, q_rho, tau), mutual_info(nu, tau)), nus)
    main_info = mutual_info(compose(pair.t, rho, broadcast=True), tau)
    return GungorTable(pair, rho, tau, family, resolution, main_info,
                       np.array([d for d, _ in terms]), np.array([i for _, i in terms]), tuple(nus))


def gungor_exponent(pair: ChannelPair, rho: CondDist, tau: Dist, kappa_tilde: float,
                    resolution: int = 100, family: NuFamily = "simplex") -> float:
    """inf_nu D(nu || q rho | tau) + |kappa_tilde + I(t rho, tau) - I(nu, tau)|^+."""
    if kappa_tilde < 0:
        raise ValidationError("kappa_tilde must be non-negative")
    return gungor_table(pair, rho, tau, resolution, family)(kappa_tilde)


def gungor_contains(p: RatePoint, pair: ChannelPair, rho: CondDist, tau: Dist, *,
                    kappa_step: float = 1e-3, resolution: int = 100, family: NuFamily = "simplex",
                    tol: float = DEFAULT_TOL) -> RegionVerdict:
    """
    Membership in the union over kappa_tilde >= 0 of the comparison regions.

    The exponent bound grows with kappa_tilde while the key constraint caps
    it at kappa - alpha, so the largest feasible grid value (or kappa - alpha
    itself) is the one to test.
    """
    if kappa_step <= 0:
        raise ValidationError("kappa_tilde grid step must be positive")
    table = gungor_table(pair, rho, tau, resolution, family)
    grid = np.arange(0.0, KAPPA_TILDE_MAX + kappa_step / 2, kappa_step)
    candidates = sorted(set(grid.tolist()) | {max(p.kappa - p.alpha, 0.0)})
    lower = p.r + p.kappa - table.main_info
    feasible = [k for k in candidates if k >= lower - tol and p.alpha - p.kappa <= -k + tol]
    kappa_tilde = feasible[-1] if feasible else max(p.kappa - p.alpha, 0.0)
    slacks = {
        G_RATE: table.main_info + kappa_tilde - p.r - p.kappa,
        G_KEY: p.kappa - p.alpha - kappa_tilde,
        G_EXPONENT: table(kappa_tilde) - p.alpha,
    }
    return _verdict(slacks, tol, {"kappa_tilde": kappa_tilde})


def max_alpha_gungor(pair: ChannelPair, rho: CondDist, tau: Dist, r: float, kappa: float, *,
                     kappa_step: float = 1e-3, resolution: int = 100,
                     family: NuFamily = "simplex") -> tuple[float, float] | None:
    """
    max over kappa_tilde of min(kappa - kappa_tilde, G(kappa_tilde)) subject to
    kappa_tilde >= max(0, r + kappa - I(t rho, tau)); returns (alpha, kappa_tilde).
    """
    table = gungor_table(pair, rho, tau, resolution, family)
    lo = max(0.0, r + kappa - table.main_info)
    if lo > kappa + DEFAULT_TOL:
        return None
    hi = max(kappa, lo)

    def crossing(k: float) -> float:
        return table(k) - (kappa - k)

    if crossing(lo) >= 0:
        return kappa - lo, lo

    grid = np.arange(lo, hi + kappa_step, kappa_step)
    grid[-1] = min(grid[-1], hi)
    left = lo
    for k in grid[1:]:
        if table.coarse(k)[0] - (kappa - k) >= 0 and crossing(k) >= 0:
            break
        left = k
    right = min(left + kappa_step, hi)
    while crossing(right) < 0 and right < hi:
        left, right = right, min(right + kappa_step, hi)
    if crossing(right) < 0:
        return max(kappa - hi, 0.0), hi
    root = brentq(crossing, left, right, xtol=1e-12)
    return max(kappa - root, 0.0), root


def _rho_grid(steps: int) -> list[float]:
    if steps == 0:
        return [0.0]
    return [0.5 * k / steps for k in range(steps + 1)]


@dataclass(frozen=True)
class GungorChoice:
    alpha: float
    kappa_tilde: float
    rho: CondDist
    tau: Dist
    label: str


def _tau_grid(steps: int) -> list[float]:
    return [0.5 + 0.5 * k / steps for k in range(steps)]


def best_gungor(pair: ChannelPair, r: float, kappa: float, *, rho_steps: int = 10, tau_steps: int = 10,
                kappa_step: float = 1e-3, resolution: int = 100,
                family: NuFamily = "simplex") -> GungorChoice | None:
    """
    Largest comparison-region alpha over rho = BSC(lambda_rho), lambda_rho on
    the ``rho_steps`` grid of [0, 1/2], and tau = (p, 1 - p), p on the
    ``tau_steps`` grid of [1/2, 1).

    p and 1 - p give the same value for symmetric channels.  Ties keep the
    earlier choice, so the uniform tau with the noiseless rho wins them.
    """
    if tau_steps < 1:
        raise ValidationError("tau grid needs at least one step")
    best: GungorChoice | None = None
    for lam in _rho_grid(rho_steps):
        rho = bsc(lam)
        for p in _tau_grid(tau_steps):
            tau = Dist([p, 1.0 - p])
            found = max_alpha_gungor(pair, rho, tau, r, kappa, kappa_step=kappa_step, resolution=resolution,
                                     family=family)
            if found and (best is None or found[0] > best.alpha + DEFAULT_TOL):
                best = GungorChoice(found[0], found[1], rho, tau, f"lambda_rho={lam:.6g} p={p:.6g}")
    if best is not None:
        logger.debug(f"comparison region at r={r:.6g}, kappa={kappa:.6g}: alpha={best.alpha:.6g} ({best.label})")
    return best


# ==============================================================================
# Binary symmetric sweeps
# ==============================================================================

def bsc_auxiliary(lambda_rho: float, cloud: CloudFamily = "single-cloud", j: int = 1,
                  anti: bool = False) -> AuxiliaryChoice:
    """
    Symmetric auxiliary choices with unique parents.

    ``single-cloud``: one w, sigma uniform over binary u, rho = BSC(lambda_rho).
    ``binary-cloud``: u = w uniform, sigma the identity (or its swap), rho = BSC(lambda_rho).
    """
    rho = bsc(lambda_rho)
    if cloud == "single-cloud":
        return AuxiliaryChoice(rho, DetCondDist([[0.5, 0.5]]), point_mass(1), j,
                               label=f"single-cloud lambda_rho={lambda_rho:.6g}")
    sigma = DetCondDist([[0.0, 1.0], [1.0, 0.0]] if anti else np.eye(2))
    return AuxiliaryChoice(rho, sigma, uniform(2), j,
                           label=f"binary-cloud{'-swap' if anti else ''} lambda_rho={lambda_rho:.6g}")


def relaxed_auxiliary(lambda_rho: float, lambda_sigma: float, j: int = 1) -> AuxiliaryChoice:
    """sigma = BSC(lambda_sigma) with u = w uniform: outside the unique-parent class unless lambda_sigma is 0 or 1."""
    return AuxiliaryChoice(bsc(lambda_rho), bsc(lambda_sigma), uniform(2), j,
                           label=f"relaxed lambda_rho={lambda_rho:.6g} lambda_sigma={lambda_sigma:.6g}",
                           relaxed=True)


@dataclass(frozen=True)
class SweepPoint:
    x: float
    value: float
    binding_constraint: str
    aux_label: str
    gungor_value: float | None = None
    relaxed_value: float | None = None


@dataclass(frozen=True)
class SweepSettings:
    resolution: int = 100          # nu grid cells per unit
    rho_steps: int = 10            # lambda_rho grid over [0, 1/2]
    refine: bool = True
    compare_gungor: bool = False
    relaxed: bool = False
    kappa_step: float = 1e-3
    tau_steps: int = 10            # comparison tau grid over [1/2, 1)


def best_theorem3(family: BscFamily, r: float, kappa: float, settings: SweepSettings,
                  pair: ChannelPair | None = None) -> tuple[float, str, str] | None:
    """
    Largest theorem-3 alpha over the unique-parent symmetric auxiliaries.

    The grid winner's lambda_rho is refined locally within its own family
    (single-cloud, binary-cloud or its swap).
    """
    pair = pair or family.pair

    def evaluate(aux: AuxiliaryChoice) -> tuple[float, str] | None:
        bounds = region_bounds(pair, aux, settings.resolution, "bsc")
        return _best(_theorem3_caps(bounds, r, kappa, aux.j))

    best: tuple[float, str, str] | None = None
    best_rho, best_shape = None, None
    shapes = (("single-cloud", False), ("binary-cloud", False), ("binary-cloud", True))
    for lam in _rho_grid(settings.rho_steps):
        for cloud, anti in shapes:
            aux = bsc_auxiliary(lam, cloud, family.j, anti=anti)
            found = evaluate(aux)
            if found and (best is None or found[0] > best[0]):
                best, best_rho, best_shape = (found[0], found[1], aux.label), lam, (cloud, anti)

    if best is not None and settings.refine and settings.rho_steps > 0:
        step = 0.5 / settings.rho_steps
        cloud, anti = best_shape

        def negated(lam: float) -> float:
            found = evaluate(bsc_auxiliary(lam, cloud, family.j, anti=anti))
            return -found[0] if found else math.inf

        res = minimize_scalar(negated, bounds=(max(0.0, best_rho - step), min(0.5, best_rho + step)),
                              method="bounded", options={"xatol": 1e-4, "maxiter": 20})
        if -res.fun > best[0] + DEFAULT_TOL:
            aux = bsc_auxiliary(float(res.x), cloud, family.j, anti=anti)
            found = evaluate(aux)
            best = (found[0], found[1], aux.label)
    return best


def best_relaxed(family: BscFamily, r: float, kappa: float, settings: SweepSettings,
                 pair: ChannelPair | None = None) -> float | None:
    """Heuristic: the same search with sigma = BSC(lambda_sigma); never a region claim."""
    pair = pair or family.pair
    best = None
    for lam in _rho_grid(settings.rho_steps):
        for lam_sigma in _rho_grid(settings.rho_steps):
            bounds = region_bounds(pair, relaxed_auxiliary(lam, lam_sigma, family.j), settings.resolution, "bsc")
            found = _best(_theorem3_caps(bounds, r, kappa, family.j))
            if found and (best is None or found[0] > best):
                best = found[0]
    if best is not None:
        logger.warning(f"relaxed auxiliary point at r={r:.6g}, kappa={kappa:.6g}: alpha={best:.6g} (heuristic)")
    return best


def sweep_bsc(family: BscFamily, mode: SweepMode, fixed: dict[str, float], abscissae: list[float],
              settings: SweepSettings = SweepSettings(), threads: int | None = None,
              progress: bool = False) -> list[SweepPoint]:
    """
    Maximum authentication rate along one axis of the symmetric family.

    ``fixed`` binds the other coordinates: ``kappa`` for r-vs-alpha, ``r`` for
    alpha-vs-kappa, ``r`` and ``kappa`` for alpha-vs-lambda_t.  Abscissae with
    an empty feasible set are left out of the curve.
    """
    required = {"r-vs-alpha": ("kappa",), "alpha-vs-kappa": ("r",), "alpha-vs-lambda_t": ("r", "kappa")}
    if mode not in required:
        raise ValidationError(f"unknown sweep mode {mode!r}")
    missing = [k for k in required[mode] if k not in fixed]
    if missing:
        raise ValidationError(f"mode {mode} needs fixed values for {missing}")
    if any(x < 0 for x in abscissae):
        raise ValidationError("abscissae must be non-negative")

    def point(x: float) -> SweepPoint | None:
        pair = family.pair
        if mode == "r-vs-alpha":
            r, kappa = x, fixed["kappa"]
        elif mode == "alpha-vs-kappa":
            r, kappa = fixed["r"], x
        else:
            if x > 0.5:
                raise ValidationError(f"lambda_t abscissa {x} outside [0, 1/2]")
            r, kappa = fixed["r"], fixed["kappa"]
            pair = bsc_pair(x, family.lambda_q)
        found = best_theorem3(family, r, kappa, settings, pair)
        if found is None:
            return None
        alpha, binding, label = found
        gungor = relaxed = None
        if settings.compare_gungor:
            g = best_gungor(pair, r, kappa, rho_steps=settings.rho_steps, tau_steps=settings.tau_steps,
                            kappa_step=settings.kappa_step, resolution=settings.resolution, family="bsc")
            gungor = g.alpha if g else math.nan
        if settings.relaxed:
            relaxed = best_relaxed(family, r, kappa, settings, pair)
            relaxed = math.nan if relaxed is None else relaxed
        return SweepPoint(x, alpha, binding, label, gungor, relaxed)

    items = list(abscissae)
    with tqdm(total=len(items), desc=f"sweep {mode}", unit="pt", disable=not progress) as bar:
        def tracked(x: float) -> SweepPoint | None:
            found = point(x)
            bar.update(1)
            return found

        points = ordered_map(tracked, items, threads)
    curve = [p for p in points if p is not None]
    logger.info(f"sweep {mode}: {len(curve)} of {len(items)} abscissae feasible")
    return curve
