"""Static two-good CES quantities: utility, AI revenue share and its price elasticity.

Human price is normalized to 1 throughout, so ``price_ai`` is the relative AI price.
"""

from __future__ import annotations

import math

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

SIGMA_ONE_TOL = 1e-12


def _check_weight(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def _check_share(share: float, *, open_interval: bool = False) -> None:
    ok = 0.0 < share < 1.0 if open_interval else 0.0 <= share <= 1.0
    if not ok:
        bounds = "(0, 1)" if open_interval else "[0, 1]"
        raise ValueError(f"share must lie in {bounds}, got {share!r}")


@dataclass(frozen=True)
class CesPoint:
    """One static CES evaluation context.

    ``permissive=True`` lifts the ``price_ai <= 1`` restriction. It exists for
    residual evaluation during calibration, where fitted prices can drift above
    the human price.
    """

    alpha: float
    price_ai: float
    sigma: float
    permissive: bool = False

    def __post_init__(self) -> None:
        _check_weight(self.alpha)
        if not self.price_ai > 0.0:
            raise ValueError(f"price_ai must be positive, got {self.price_ai!r}")
        if self.price_ai > 1.0 and not self.permissive:
            raise ValueError(
                f"price_ai must be <= 1 (human price is 1), got {self.price_ai!r}; "
                "use CesPoint.unbounded for prices above the human price"
            )
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")

    @classmethod
    def unbounded(cls, alpha: float, price_ai: float, sigma: float) -> CesPoint:
        return cls(alpha, price_ai, sigma, permissive=True)

    @property
    def rho(self) -> float:
        return (self.sigma - 1.0) / self.sigma


def ces_utility(h_quantity: float, a_quantity: float, point: CesPoint) -> float:
    """Weighted CES aggregate of human and AI quantities.

    Routes ``|sigma - 1| < 1e-12`` to the Cobb-Douglas limit. ``sigma == 0``
    (Leontief) is not supported here.
    """
    if h_quantity < 0 or a_quantity < 0:
        raise ValueError("quantities must be nonnegative")
    if point.sigma <= 0.0:
        raise ValueError("ces_utility requires sigma > 0")
    alpha = point.alpha
    if abs(point.sigma - 1.0) < SIGMA_ONE_TOL:
        return float(h_quantity ** (1.0 - alpha) * a_quantity**alpha)
    if point.sigma < 1.0:
        if h_quantity == 0 and a_quantity == 0:
            raise ValueError("quantities cannot both be zero when sigma <= 1")
        # rho < 0: any zero input drives the aggregate to zero
        if h_quantity == 0 or a_quantity == 0:
            return 0.0
    if h_quantity == 0 and a_quantity == 0:
        return 0.0
    rho = point.rho
    log_h = math.log(h_quantity) if h_quantity > 0 else -math.inf
    log_a = math.log(a_quantity) if a_quantity > 0 else -math.inf
    if abs(rho) * max(abs(log_h), abs(log_a)) <= 1.0:
        # near sigma = 1: inner ** (1/rho) would amplify rounding by 1/rho
        y = (1.0 - alpha) * math.expm1(rho * log_h) + alpha * math.expm1(rho * log_a)
        return math.exp(math.log1p(y) / rho)
    terms = sorted(
        (math.log1p(-alpha) + rho * log_h, math.log(alpha) + rho * log_a),
        reverse=True,
    )
    log_inner = terms[0] + math.log1p(math.exp(terms[1] - terms[0]))
    return math.exp(log_inner / rho)


def share_exponent(alpha, price_ai, sigma):
    """Log-odds of the human share, ``ln((1-alpha)/alpha) + (sigma-1) ln p``.

    Works elementwise on arrays. The AI share is ``1 / (1 + exp(exponent))``.
    """
    return np.log((1.0 - alpha) / alpha) + (np.asarray(sigma) - 1.0) * np.log(price_ai)


def share_from_exponent(x):
    """Overflow-free ``1 / (1 + exp(x))``."""
    return expit(-np.asarray(x, dtype=float))


def logit(share):
    """``ln(s / (1 - s))`` evaluated without cancellation near either end."""
    s = np.asarray(share, dtype=float)
    return np.log(s) - np.log1p(-s)


def revenue_share(point: CesPoint) -> float:
    return float(share_from_exponent(share_exponent(point.alpha, point.price_ai, point.sigma)))


def share_elasticity(sigma: float, share: float) -> float:
    """d ln(share) / d ln(price) at fixed sigma."""
    _check_share(share)
    return -(sigma - 1.0) * (1.0 - share)


def share_sigma2(alpha: float, price_ai: float) -> float:
    _check_weight(alpha)
    if not price_ai > 0.0:
        raise ValueError(f"price_ai must be positive, got {price_ai!r}")
    return alpha / ((1.0 - alpha) * price_ai + alpha)


def price_for_share_sigma2(alpha: float, share: float) -> float:
    """Price at which ``share_sigma2`` returns ``share``; its exact inverse."""
    _check_weight(alpha)
    _check_share(share, open_interval=True)
    return (alpha / (1.0 - alpha)) * ((1.0 - share) / share)

