"""Power-law generalization of the adoption dynamics.

Elasticity ``sigma(t) = sigma0 + phi t**k`` and price ``p0 exp(-d t**xi)``. The
human-share log-odds is affine in ``(sigma0, phi)``::

    X(t) = Theta(t) + Upsilon(t) sigma0 + Xi(t) phi
    Upsilon(t) = ln p0 - d t**xi
    Theta(t)   = ln((1 - alpha) / alpha) - Upsilon(t)
    Xi(t)      = t**k Upsilon(t)

which is what makes the moment formulas and cross-task differencing below exact.
With ``k = xi = 1`` and ``sigma0 = 0`` everything reduces to :mod:`vesmarket.dynamics`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from vesmarket.core import share_from_exponent
from vesmarket.dynamics import (
    DEFAULT_EPSILON,
    DEFAULT_SIGMA_TOL,
    Phase,
    as_time,
    classify_phase,
)


class Crossing(enum.Enum):
    """Marker returned instead of a time when sigma starts at or above the level."""

    ALREADY_CROSSED = "already-crossed"

    def __repr__(self) -> str:
        return f"Crossing.{self.name}"


ALREADY_CROSSED = Crossing.ALREADY_CROSSED


@dataclass(frozen=True)
class GenScenario:
    alpha: float
    price0: float
    decay_d: float
    phi: float
    sigma0: float = 0.0
    k: float = 1.0
    xi: float = 1.0
    beta0: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0.0 < self.price0 < 1.0:
            raise ValueError(f"price0 must lie in (0, 1), got {self.price0!r}")
        if not self.decay_d > 0.0:
            raise ValueError(f"decay_d must be positive, got {self.decay_d!r}")
        if not self.phi > 0.0:
            raise ValueError(f"phi must be positive, got {self.phi!r}")
        if not self.sigma0 >= 0.0:
            raise ValueError(f"sigma0 must be >= 0, got {self.sigma0!r}")
        for name in ("k", "xi"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {value!r}")
        object.__setattr__(self, "beta0", math.log(self.price0))

    @property
    def log_odds_weight(self) -> float:
        return math.log((1.0 - self.alpha) / self.alpha)


@dataclass(frozen=True)
class AffineX:
    theta: float
    upsilon: float
    xi_weight: float
    value: float


def sigma_pl(gs: GenScenario, t):
    return gs.sigma0 + gs.phi * as_time(t) ** gs.k


def price_pl(gs: GenScenario, t):
    return gs.price0 * np.exp(-gs.decay_d * as_time(t) ** gs.xi)


def upsilon(gs: GenScenario, t):
    """Log AI price at ``t``; always negative."""
    return gs.beta0 - gs.decay_d * as_time(t) ** gs.xi


def affine_x(gs: GenScenario, t) -> AffineX:
    t = as_time(t)
    ups = upsilon(gs, t)
    theta = gs.log_odds_weight - ups
    xi_weight = t**gs.k * ups
    return AffineX(
        theta=theta,
        upsilon=ups,
        xi_weight=xi_weight,
        value=theta + ups * gs.sigma0 + xi_weight * gs.phi,
    )


def share_pl(gs: GenScenario, t):
    return share_from_exponent(affine_x(gs, t).value)[()]


def t_sigma_level(gs: GenScenario, level: float) -> float | Crossing:
    """First time sigma reaches ``level``; the marker if it starts there already."""
    if gs.sigma0 >= level:
        return ALREADY_CROSSED
    return ((level - gs.sigma0) / gs.phi) ** (1.0 / gs.k)


def t_star_general(gs: GenScenario) -> float | Crossing:
    return t_sigma_level(gs, 1.0)


def mean_x(gs: GenScenario, t, mean_sigma0: float, mean_phi: float):
    ax = affine_x(gs, t)
    return ax.theta + ax.upsilon * mean_sigma0 + ax.xi_weight * mean_phi


def var_x(gs: GenScenario, t, var_sigma0: float):
    """Variance of X with phi held fixed and only sigma0 random."""
    if var_sigma0 < 0:
        raise ValueError("var_sigma0 must be >= 0")
    return upsilon(gs, t) ** 2 * var_sigma0


def delta_x(gs: GenScenario, t, sigma0_task1: float, sigma0_task2: float):
    """Log-odds gap between two tasks that differ only in baseline elasticity.

    Depends on ``gs`` only through ``beta0``, ``decay_d`` and ``xi``.
    """
    return upsilon(gs, t) * (sigma0_task1 - sigma0_task2)


def phase_at_pl(
    gs: GenScenario,
    t: float,
    epsilon: float = DEFAULT_EPSILON,
    sigma_tol: float = DEFAULT_SIGMA_TOL,
) -> Phase:
    if t < 0:
        raise ValueError("t must be >= 0")
    return classify_phase(float(sigma_pl(gs, t)), float(share_pl(gs, t)), epsilon, sigma_tol)
