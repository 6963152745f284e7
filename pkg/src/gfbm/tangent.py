"""Local limits: tangent-process covariance, conditional-variance floor,
and the small-increment variance ratio.

Around a fixed interior time t the rescaled increments
(X(t + u*tau) - X(t)) / u^(a + 1/2) converge in law, as u -> 0, to a
fractional Brownian motion of index a + 1/2 scaled by
sqrt(increment_rate) * t^(-gamma/2).  Gaussian laws are determined by
covariances, so convergence is checked deterministically: the exact
covariance of the rescaled increments on a tau grid is compared against
the limiting fractional form, and the deviation must shrink along a
ladder of u.

The one-sided nondeterminism floor bounds Var(Z(t) | Z(r), r <= s) from
below by |t-s|^(2a+1) / ((2a+1) b^gamma) on [0, b]; conditioning on any
finite set of past times only enlarges the conditional variance, so the
finite-grid Schur complement must respect the same floor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .covariance import (
    ProcessId,
    constants,
    cov_x_many,
    cov_z_many,
    cov_zprime_many,
    inc_var_z,
    var_z,
)
from .errors import DomainError, NotPSD, RegimeError
from .params import GfbmParams
from .simulate import JITTER_LADDER

MAX_CONDITIONING_POINTS = 256


@dataclass(frozen=True)
class TangentQuery:
    t_center: float
    u_ladder: np.ndarray          # decreasing positives
    tau_grid: np.ndarray          # increasing, in [0, T_tau]
    process: ProcessId = ProcessId.X

    def __post_init__(self):
        u = np.asarray(self.u_ladder, dtype=float)
        tau = np.asarray(self.tau_grid, dtype=float)
        if self.t_center <= 0.0:
            raise DomainError("t_center must be positive")
        if u.size == 0 or np.any(u <= 0.0) or np.any(np.diff(u) >= 0.0):
            raise DomainError("u ladder must be positive and strictly decreasing")
        if tau.size < 2 or np.any(np.diff(tau) <= 0.0) or tau[0] < 0.0:
            raise DomainError("tau grid must be increasing and nonnegative")
        if u[0] * tau[-1] >= self.t_center / 2.0:
            raise DomainError("u * max(tau) must stay below t_center / 2")
        if self.process not in (ProcessId.X, ProcessId.Z):
            raise DomainError("tangent check applies to the process or its causal part")
        object.__setattr__(self, "u_ladder", u)
        object.__setattr__(self, "tau_grid", tau)


def tangent_cov_error(params: GfbmParams, query: TangentQuery) -> np.ndarray:
    """Max deviation of the rescaled-increment covariance from the limit.

    Deterministic (no sampling): for each u the covariance matrix of
    (X(t+u tau_i) - X(t)) / u^(a+1/2) on the tau grid is assembled from
    exact covariances and compared entrywise with
    increment_rate * t^(-gamma) * fBm-covariance of index a + 1/2.
    """
    a = params.alpha
    if a >= 0.5:
        raise RegimeError("tangent limit of this form needs the rough regime")
    t = query.t_center
    tau = query.tau_grid
    cov_fn = cov_x_many if query.process is ProcessId.X else cov_z_many
    rate = constants(params).increment_rate
    expo = 2.0 * a + 1.0
    target = (
        0.5
        * rate
        * t**-params.gamma
        * (
            tau[:, None] ** expo
            + tau[None, :] ** expo
            - np.abs(tau[:, None] - tau[None, :]) ** expo
        )
    )
    errors = np.empty(query.u_ladder.size)
    for k, u in enumerate(query.u_ladder):
        pts = t + u * tau
        ii, jj = np.triu_indices(tau.size)
        c_pair = cov_fn(params, pts[ii], pts[jj])
        c_left = cov_fn(params, pts, np.full_like(pts, t))
        c_tt = float(cov_fn(params, np.array([t]), np.array([t]))[0])
        v = np.empty((tau.size, tau.size))
        v[ii, jj] = c_pair
        v.T[ii, jj] = c_pair
        v = (v - c_left[:, None] - c_left[None, :] + c_tt) / u**expo
        errors[k] = float(np.max(np.abs(v - target)))
    return errors


def slnd_gap(
    params: GfbmParams,
    cond_times: np.ndarray,
    s: float,
    t: float,
    bound_horizon: float,
) -> tuple[float, float]:
    """Conditional variance of the causal part against its analytic floor.

    cond_var = Var(Z(t)) - c^T G^{-1} c for the conditioning times (all
    <= s), via Cholesky with the jitter ladder; the floor is
    |t-s|^(2a+1) / ((2a+1) b^gamma) for a <= 1/2 and the derivative-
    process analogue (exponent 2a-1) for a > 1/2.
    """
    a, g = params.alpha, params.gamma
    b = bound_horizon
    if not (0.0 <= s < t <= b):
        raise DomainError("need 0 <= s < t <= bound_horizon")
    cond = np.asarray(cond_times, dtype=float)
    if cond.size > MAX_CONDITIONING_POINTS:
        raise DomainError(f"conditioning grid capped at {MAX_CONDITIONING_POINTS} points")
    if cond.size and (np.any(cond < 0.0) or np.any(cond > s)):
        raise DomainError("conditioning times must lie in [0, s]")

    if a <= 0.5:
        cov_fn = cov_z_many
        bound = (t - s) ** (2.0 * a + 1.0) / ((2.0 * a + 1.0) * b**g)
    else:
        cov_fn = cov_zprime_many
        bound = (t - s) ** (2.0 * a - 1.0) / ((2.0 * a - 1.0) * b**g)

    var_t = float(cov_fn(params, np.array([t]), np.array([t]))[0])
    cond = cond[cov_fn(params, cond, cond) > 0.0]  # drop deterministic times
    if cond.size == 0:
        return var_t, bound

    ii, jj = np.triu_indices(cond.size)
    gram = np.empty((cond.size, cond.size))
    vals = cov_fn(params, cond[ii], cond[jj])
    gram[ii, jj] = vals
    gram.T[ii, jj] = vals
    cross = cov_fn(params, cond, np.full_like(cond, t))

    scale = float(np.trace(gram)) / cond.size
    for eps in JITTER_LADDER:
        try:
            cf = cho_factor(gram + eps * scale * np.eye(cond.size), lower=True)
        except np.linalg.LinAlgError:
            continue
        explained = float(cross @ cho_solve(cf, cross))
        return var_t - explained, bound
    raise NotPSD("conditioning matrix failed the jitter ladder")


def increment_ratio(params: GfbmParams, t: float, s_ladder: np.ndarray) -> np.ndarray:
    """E[(Z(t)-Z(s))^2] / |t-s|^(2a+1) along times approaching t.

    In the rough regime the ratio converges to
    increment_rate * t^(-gamma); the direct increment integrals keep the
    evaluation accurate down to |t-s|/t ~ 1e-8.
    """
    if params.alpha >= 0.5:
        raise RegimeError("increment-rate limit needs the rough regime (alpha < 1/2)")
    s_ladder = np.asarray(s_ladder, dtype=float)
    if np.any(s_ladder <= 0.0) or np.any(s_ladder >= t):
        raise DomainError("ladder times must lie in (0, t)")
    expo = 2.0 * params.alpha + 1.0
    return np.array(
        [inc_var_z(params, float(s), t).value / (t - s) ** expo for s in s_ladder]
    )
