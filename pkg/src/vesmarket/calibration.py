"""Recover quadratic-logit coefficients and structural parameters from share data.

Observed log-odds are regressed on ``[1, t, t**2]`` (the model's exponent is
``-logit(share)``). Times are mapped to ``[-1, 1]`` before a column-pivoted QR
solve and the coefficients mapped back afterwards. Structural recovery needs the
initial price as an external input because ``(a, b, c)`` cannot pin down all of
``(alpha, p0, d, phi)``.

Noise model: additive Gaussian error on the logit scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import linalg

from vesmarket.core import logit
from vesmarket.dynamics import QuadCoeffs

NOISE_MODEL = "gaussian-logit"
# |c| below this is indistinguishable from a constant-elasticity path
DEFAULT_C_TOL = 1e-8


class RankDeficientError(ValueError):
    pass


class InfeasibleRecoveryError(ValueError):
    pass


@dataclass(frozen=True)
class Observation:
    """Observed AI share at time ``t``.

    ``logit_share`` may be supplied directly; it then takes precedence over
    ``share`` and lets shares that round to 0 or 1 in floating point still be
    used.
    """

    t: float
    share: float
    logit_share: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ValueError(f"t must be finite and >= 0, got {self.t!r}")
        if self.logit_share is None:
            if not 0.0 < self.share < 1.0:
                raise ValueError(f"share must lie strictly inside (0, 1), got {self.share!r}")
        else:
            if not math.isfinite(self.logit_share):
                raise ValueError(f"logit_share must be finite, got {self.logit_share!r}")
            if not 0.0 <= self.share <= 1.0:
                raise ValueError(f"share must lie in [0, 1], got {self.share!r}")

    @property
    def log_odds(self) -> float:
        if self.logit_share is not None:
            return self.logit_share
        return float(logit(self.share))


@dataclass(frozen=True)
class FitResult:
    coeffs: QuadCoeffs
    rss: float
    n_obs: int
    feasible: bool
    alpha_hat: float | None = None
    d_hat: float | None = None
    phi_hat: float | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "coeffs": {"a": self.coeffs.a, "b": self.coeffs.b, "c": self.coeffs.c},
            "rss": self.rss,
            "n_obs": self.n_obs,
            "feasible": self.feasible,
            "alpha_hat": self.alpha_hat,
            "d_hat": self.d_hat,
            "phi_hat": self.phi_hat,
            "reason": self.reason,
            "noise_model": NOISE_MODEL,
        }


def _dedup(observations: Iterable[Observation]) -> list[Observation]:
    seen: dict[float, float] = {}
    kept = []
    for obs in observations:
        y = obs.log_odds
        if obs.t in seen:
            if seen[obs.t] != y:
                raise ValueError(f"conflicting observations at t={obs.t!r}")
            continue
        seen[obs.t] = y
        kept.append(obs)
    return kept


def fit_quadratic_logit(observations: Iterable[Observation]) -> tuple[QuadCoeffs, float]:
    """Least-squares fit of ``-logit(share) = a + b t + c t**2``.

    Exact duplicates are dropped. Returns the coefficients and the residual sum
    of squares on the logit scale.
    """
    obs = _dedup(observations)
    if len(obs) < 3:
        raise RankDeficientError(f"need at least 3 distinct times, got {len(obs)}")
    t = np.array([o.t for o in obs])
    y = -np.array([o.log_odds for o in obs])

    mid = 0.5 * (t.max() + t.min())
    half = 0.5 * (t.max() - t.min())
    u = (t - mid) / half
    design = np.column_stack([np.ones_like(u), u, u * u])
    q, r, perm = linalg.qr(design, mode="economic", pivoting=True)
    if abs(r[-1, -1]) <= 1e-12 * abs(r[0, 0]):
        raise RankDeficientError("design matrix is rank deficient")
    z = linalg.solve_triangular(r, q.T @ y)
    scaled = np.empty(3)
    scaled[perm] = z
    a_u, b_u, c_u = scaled

    # undo u = (t - mid) / half
    c = c_u / half**2
    b = b_u / half - 2.0 * c_u * mid / half**2
    a = a_u - b_u * mid / half + c_u * mid**2 / half**2
    coeffs = QuadCoeffs(float(a), float(b), float(c))
    resid = y - coeffs.exponent(t)
    return coeffs, float(resid @ resid)


def recover_structural(
    coeffs: QuadCoeffs, price0: float, c_tol: float = DEFAULT_C_TOL
) -> tuple[float, float, float]:
    """Invert the coefficient map for ``(alpha, d, phi)`` given the initial price.

    ``d`` is the positive root of ``d**2 - b d - c ln(p0) = 0``; with ``c < 0`` and
    ``ln p0 < 0`` the roots always have opposite signs.
    """
    if not 0.0 < price0 < 1.0:
        raise ValueError(f"price0 must lie in (0, 1), got {price0!r}")
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    if not c < -c_tol:
        raise InfeasibleRecoveryError(f"quadratic coefficient c={c!r} is not negative")
    beta0 = math.log(price0)
    disc = b * b + 4.0 * c * beta0
    if disc < 0:
        raise InfeasibleRecoveryError("negative discriminant")
    root = math.sqrt(disc)
    # avoid cancellation: take the larger-magnitude root directly, the other from the product
    if b >= 0:
        d = 0.5 * (b + root)
    else:
        d = -c * beta0 / (0.5 * (b - root))
    if not d > 0:
        raise InfeasibleRecoveryError("no positive root for the decay rate")
    phi = -c / d
    alpha = 1.0 / (1.0 + math.exp(a + beta0))
    if not 0.0 < alpha < 1.0:
        raise InfeasibleRecoveryError(f"recovered alpha={alpha!r} outside (0, 1)")
    return alpha, d, phi


def fit_scenario(
    observations: Iterable[Observation], price0: float, c_tol: float = DEFAULT_C_TOL
) -> FitResult:
    """Fit coefficients, then recover structure.

    A model-inconsistent fit comes back with ``feasible=False`` and the reason;
    only bad input raises.
    """
    obs = list(observations)
    coeffs, rss = fit_quadratic_logit(obs)
    n_obs = len(_dedup(obs))
    try:
        alpha, d, phi = recover_structural(coeffs, price0, c_tol)
    except InfeasibleRecoveryError as exc:
        return FitResult(coeffs, rss, n_obs, feasible=False, reason=str(exc))
    return FitResult(coeffs, rss, n_obs, feasible=True, alpha_hat=alpha, d_hat=d, phi_hat=phi)
