"""Rank-one escape step for stagnated factorizations.

At a stationary factor pair the most profitable rank-one direction to
append is the top singular pair (sigma, u, v) of the embedded residual
P*(Y - U V^T). Appending the balanced columns (tau u, tau v) changes
the objective, as a function of tau, by

    f(tau) = -tau^2 sigma + 0.5 tau^4 |P(u v^T)|_F^2 + lam tau^(2p).

For the fully observed operator |P(u v^T)|_F = 1 and the 1-D model is
exact; f dips below zero iff lam - mu^(1-p) sigma + 0.5 mu^(2-p) <= 0
with mu = (2-2p)/(2-p) * sigma, in which case tau = sqrt(mu). For masks
the projection is contractive, so an accepted step can only realize at
least the modeled descent; the realized decrease is still verified
before the append is committed, with a rollback guard for edge cases.

At p = 1 the mu formula degenerates; the classical polar condition
applies instead: accept iff sigma > lam, with tau^2 = sigma - lam.
"""

from dataclasses import dataclass, replace

import numpy as np

from .norms import Factors, check_p, variational_sum
from .observed import adjoint_embed, loss_value, masked_residual
from .spectral import _as_finite_matrix, top_singular_pair

POWER_TOL = 1e-10
POWER_MAX_ITER = 20000


@dataclass(frozen=True)
class EscapeDecision:
    """Outcome of the 1-D escape test.

    tau = sqrt(mu) when accepted and 0 otherwise; descent_value is the
    modeled objective change f(tau) (0 when rejected). rip_gap marks an
    append that the 1-D model accepted but the verified objective change
    rejected, which rolls the append back.
    """

    sigma: float
    mu: float
    tau: float
    descent_value: float
    accepted: bool
    rip_gap: bool = False


def _decide(sigma, lam, p):
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if p == 1.0:
        # Polar condition of the nuclear-norm specialization.
        if sigma > lam:
            mu = sigma - lam
            return EscapeDecision(sigma, mu, float(np.sqrt(mu)), -0.5 * mu * mu, True)
        return EscapeDecision(sigma, 0.0, 0.0, 0.0, False)
    mu = (2.0 - 2.0 * p) / (2.0 - p) * sigma
    test = lam - mu ** (1.0 - p) * sigma + 0.5 * mu ** (2.0 - p)
    if test <= 0.0:
        descent = -mu * sigma + 0.5 * mu * mu + lam * mu**p
        return EscapeDecision(sigma, mu, float(np.sqrt(mu)), descent, True)
    return EscapeDecision(sigma, mu, 0.0, 0.0, False)


def escape_decision(R_dense, lam, p, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Closed-form accept/reject of a rank-one step on a dense residual."""
    p = check_p(p)
    if lam <= 0:
        raise ValueError("lam must be positive for the escape test")
    R_dense = _as_finite_matrix(R_dense, "residual")
    triple = top_singular_pair(R_dense, tol, max_iter)
    return _decide(triple.sigma, lam, p)


def attempt(Y, F, cfg):
    """Try a rank-one escape at (Y, F); commit only on verified descent.

    Returns (factors, decision). On acceptance the factors gain the
    balanced column pair (tau u, tau v); on rejection (including the
    rollback path) the input factors are returned unchanged.
    """
    if cfg.lam <= 0:
        raise ValueError("lam must be positive for the escape test")
    R = adjoint_embed(masked_residual(Y, F))
    triple = top_singular_pair(R, POWER_TOL, POWER_MAX_ITER)
    dec = _decide(triple.sigma, cfg.lam, cfg.p)
    if not dec.accepted:
        return F, dec
    tau = dec.tau
    F_new = Factors(
        np.hstack([F.U, tau * triple.u[:, None]]),
        np.hstack([F.V, tau * triple.v[:, None]]),
    )
    obj_old = loss_value(Y, F) + cfg.lam * variational_sum(F, cfg.p)
    obj_new = loss_value(Y, F_new) + cfg.lam * variational_sum(F_new, cfg.p)
    if obj_new < obj_old:
        return F_new, dec
    return F, replace(dec, accepted=False, tau=0.0, rip_gap=True)
