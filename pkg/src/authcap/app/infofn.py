"""
Information functionals in bits.

Conventions: 0 log 0 = 0, p log(p/0) = +inf for p > 0, and conditioning
symbols of zero weight are skipped so 0 * inf never turns into NaN.  A kernel
that ignores part of the conditioning (t(y|x) where t(y|x,u) is expected) is
lifted by broadcasting.
"""

import math

import numpy as np
from scipy.special import entr, rel_entr

from app.errors import DimensionError
from app.probcore import CondDist, Dist, compose, independent

LN2 = math.log(2.0)


def pos_part(a: float) -> float:
    """|a|^+ = a when a > 0, else 0."""
    return a if a > 0 else 0.0


def neg_part(a: float) -> float:
    """|a|^- = a when a < 0, else 0."""
    return a if a < 0 else 0.0


def _weights(kernel: CondDist, sigma: Dist | None) -> np.ndarray:
    if sigma is None:
        if kernel.cond_shape:
            raise DimensionError(f"kernel conditioned on {kernel.cond_shape} needs a weighting law")
        return np.ones(1)
    if sigma.out_shape != kernel.cond_shape:
        raise DimensionError(
            f"weighting law over {sigma.out_shape} does not match conditioning {kernel.cond_shape}")
    return sigma.mass.reshape(-1)


def _average(per_row: np.ndarray, weights: np.ndarray) -> float:
    live = weights > 0
    terms = per_row[live]
    if np.any(np.isinf(terms)):
        return math.inf
    return float(np.dot(weights[live], terms))


def entropy(rho: CondDist, sigma: Dist | None = None) -> float:
    """H(rho|sigma) = -sum_u sigma(u) sum_x rho(x|u) log2 rho(x|u)."""
    weights = _weights(rho, sigma)
    per_row = entr(rho.rows).sum(axis=1) / LN2
    return _average(per_row, weights)


def kl_div(rho: CondDist, omega: CondDist, sigma: Dist | None = None) -> float:
    """
    D(rho || omega | sigma).

    ``omega`` may ignore trailing conditioning axes of ``rho``; it is lifted
    to match.  Returns ``math.inf`` when rho escapes omega's support on a
    symbol of positive weight.
    """
    if omega.cond_shape != rho.cond_shape:
        extra = rho.cond_shape[len(omega.cond_shape):]
        if rho.cond_shape[:len(omega.cond_shape)] != omega.cond_shape:
            raise DimensionError(f"cannot align {omega.cond_shape} with {rho.cond_shape}")
        omega = independent(omega, extra)
    if omega.out_shape != rho.out_shape:
        raise DimensionError(f"outcome alphabets differ: {rho.out_shape} vs {omega.out_shape}")
    weights = _weights(rho, sigma)
    per_row = rel_entr(rho.rows, omega.rows).sum(axis=1) / LN2
    return _average(per_row, weights)


def mutual_info(q: CondDist, rho: CondDist, sigma: Dist | None = None) -> float:
    """
    I(q, rho | sigma) = sum_u sigma(u) sum_x rho(x|u) D(q(.|x,u) || q rho(.|u)).

    With ``sigma=None`` rho must be a ``Dist`` and this is the plain mutual
    information between the input and output of q.
    """
    weights = _weights(rho, sigma)
    if q.cond_shape == rho.out_shape and rho.cond_shape:
        q = independent(q, rho.cond_shape)
    out = compose(q, rho)

    x_size, cond_n = rho.out_size, rho.in_size
    qt = q.table.reshape(x_size, cond_n, q.out_size)
    ot = out.table.reshape(cond_n, q.out_size)
    div = rel_entr(qt, ot[np.newaxis, :, :]).sum(axis=2) / LN2   # [x, c]
    inner = rho.table.reshape(cond_n, x_size)
    per_row = np.array([
        float(np.dot(inner[c][inner[c] > 0], div[inner[c] > 0, c]))
        for c in range(cond_n)
    ])
    return max(_average(per_row, weights), 0.0)


# ==============================================================================
# Secrecy functionals
# ==============================================================================

def s_ab(mu: CondDist, nu: CondDist, a: float, b: float, rho: CondDist, sigma: Dist) -> float:
    """
    S_{a,b}(mu, nu | rho, sigma)
      = I(mu, rho|sigma) + a - I(nu, rho|sigma) + |I(mu rho, sigma) + b - I(nu rho, sigma)|^+

    mu(y|u) and nu(z|u) share the conditioning alphabet of rho(u|w).
    """
    if mu.cond_shape != nu.cond_shape:
        raise DimensionError(f"mu and nu condition on different alphabets: {mu.cond_shape} vs {nu.cond_shape}")
    inner = mutual_info(mu, rho, sigma) + a - mutual_info(nu, rho, sigma)
    outer = (mutual_info(compose(mu, rho, broadcast=True), sigma) + b
             - mutual_info(compose(nu, rho, broadcast=True), sigma))
    return inner + pos_part(outer)


def s_ab_single(nu: CondDist, a: float, b: float, rho: CondDist, sigma: Dist) -> float:
    """S_{a,b}(nu | rho, sigma) = a - I(nu, rho|sigma) + |b - I(nu rho, sigma)|^+."""
    inner = a - mutual_info(nu, rho, sigma)
    outer = b - mutual_info(compose(nu, rho, broadcast=True), sigma)
    return inner + pos_part(outer)


def s_theorem1(mu: CondDist, nu: CondDist, sigma: CondDist, tau: Dist) -> float:
    """The secrecy surplus of mu over nu through sigma(u|w) and tau(w): S_{0,0}."""
    return s_ab(mu, nu, 0.0, 0.0, sigma, tau)
