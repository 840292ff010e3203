"""Exponential-regime adoption dynamics.

Compute grows as ``exp(g t)`` and the elasticity of substitution tracks log compute,
so ``sigma(t) = phi t`` with ``phi = delta * g``. Combined with an exponentially
falling AI price the AI revenue share follows a quadratic-logit path::

    r_A(t) = 1 / (1 + exp(a + b t + c t**2))
    a = ln((1 - alpha) / alpha) - ln p0,  b = d + phi ln p0,  c = -d phi
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable

import numpy as np

from vesmarket.core import share_from_exponent

DEFAULT_EPSILON = 1e-6
DEFAULT_SIGMA_TOL = 1e-9


class Phase(IntEnum):
    COMPLEMENT = 1
    KNIFE_EDGE = 2
    JEVONS = 3
    STRONG_JEVONS = 4
    SATURATION = 5


@dataclass(frozen=True)
class Scenario:
    alpha: float
    price0: float
    growth_g: float
    decay_d: float
    delta: float
    phi: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0.0 < self.price0 < 1.0:
            raise ValueError(f"price0 must lie in (0, 1), got {self.price0!r}")
        for name in ("growth_g", "decay_d", "delta"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        object.__setattr__(self, "phi", self.delta * self.growth_g)


@dataclass(frozen=True)
class QuadCoeffs:
    a: float
    b: float
    c: float

    def exponent(self, t):
        t = as_time(t)
        return self.a + self.b * t + self.c * t * t


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    sigma: np.ndarray
    price: np.ndarray
    exponent: np.ndarray
    share: np.ndarray
    logit_share: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class PhaseTimeline:
    """Phase-boundary times of one scenario.

    ``t_saturation`` is the first grid time with ``share >= 1 - epsilon`` or
    ``None`` when the horizon ends first.
    """

    t_star: float
    t_2star: float
    t_saturation: float | None
    epsilon: float
    scenario: Scenario

    def phase_at(self, t: float, sigma_tol: float = DEFAULT_SIGMA_TOL) -> Phase:
        return phase_at(self.scenario, t, self.epsilon, sigma_tol)


def as_time(t):
    """Float array for sequences, numpy scalar for scalars."""
    return np.asarray(t, dtype=float)[()]


def sigma_at(phi: float, t):
    return phi * as_time(t)


def price_at(price0: float, decay_d: float, t):
    return price0 * np.exp(-decay_d * as_time(t))


def quad_coeffs(scenario: Scenario) -> QuadCoeffs:
    log_p0 = math.log(scenario.price0)
    return QuadCoeffs(
        a=math.log((1.0 - scenario.alpha) / scenario.alpha) - log_p0,
        b=scenario.decay_d + scenario.phi * log_p0,
        c=-scenario.decay_d * scenario.phi,
    )


def share_at(scenario: Scenario, t):
    return share_from_exponent(quad_coeffs(scenario).exponent(t))[()]


def t_star(phi: float) -> float:
    """Time at which sigma(t) = phi t first reaches 1."""
    if not phi > 0.0:
        raise ValueError(f"phi must be positive, got {phi!r}")
    return 1.0 / phi


def classify_phase(
    sigma: float,
    share: float,
    epsilon: float = DEFAULT_EPSILON,
    sigma_tol: float = DEFAULT_SIGMA_TOL,
) -> Phase:
    """Phase of a (sigma, share) state.

    Saturation wins over phases 3 and 4 once ``share >= 1 - epsilon``.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon!r}")
    if abs(sigma - 1.0) <= sigma_tol:
        return Phase.KNIFE_EDGE
    if sigma < 1.0:
        return Phase.COMPLEMENT
    if share >= 1.0 - epsilon:
        return Phase.SATURATION
    if sigma >= 2.0:
        return Phase.STRONG_JEVONS
    return Phase.JEVONS


def phase_at(
    scenario: Scenario,
    t: float,
    epsilon: float = DEFAULT_EPSILON,
    sigma_tol: float = DEFAULT_SIGMA_TOL,
) -> Phase:
    if t < 0:
        raise ValueError("t must be >= 0")
    return classify_phase(sigma_at(scenario.phi, t), share_at(scenario, t), epsilon, sigma_tol)


def time_grid(t_end: float, steps: int) -> np.ndarray:
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps!r}")
    return np.linspace(0.0, t_end, steps)


def trajectory(scenario: Scenario, t_end: float, steps: int) -> Trajectory:
    times = time_grid(t_end, steps)
    x = quad_coeffs(scenario).exponent(times)
    return Trajectory(
        times=times,
        sigma=sigma_at(scenario.phi, times),
        price=price_at(scenario.price0, scenario.decay_d, times),
        exponent=x,
        share=share_from_exponent(x),
        logit_share=-x,
    )


def first_saturation_time(times: np.ndarray, share: np.ndarray, epsilon: float) -> float | None:
    hits = np.flatnonzero(share >= 1.0 - epsilon)
    return float(times[hits[0]]) if hits.size else None


def phase_timeline(
    scenario: Scenario,
    t_end: float = 30.0,
    steps: int = 301,
    epsilon: float = DEFAULT_EPSILON,
) -> PhaseTimeline:
    ts = t_star(scenario.phi)
    traj = trajectory(scenario, t_end, steps)
    return PhaseTimeline(
        t_star=ts,
        t_2star=2.0 * ts,
        t_saturation=first_saturation_time(traj.times, traj.share, epsilon),
        epsilon=epsilon,
        scenario=scenario,
    )


def phase_boundaries(
    phase_of: Callable[[float], Phase],
    t_sigma1: float | None,
    t_sigma2: float | None,
    t_saturation: float | None,
    t_end: float,
) -> list[tuple[Phase, float]]:
    """Ordered ``(phase, entry time)`` pairs within ``[0, t_end]``.

    ``t_sigma1``/``t_sigma2`` are the times sigma reaches 1 and 2 (``None`` when
    already past at t=0). The knife-edge and phase 3 share the same entry time.
    """
    out = [(phase_of(0.0), 0.0)]
    if out[0][0] == Phase.KNIFE_EDGE:
        out.append((Phase.JEVONS, 0.0))
    events = []
    if t_sigma1 is not None and 0.0 < t_sigma1 <= t_end:
        events += [(t_sigma1, Phase.KNIFE_EDGE), (t_sigma1, Phase.JEVONS)]
    if t_sigma2 is not None and 0.0 < t_sigma2 <= t_end:
        events.append((t_sigma2, Phase.STRONG_JEVONS))
    if t_saturation is not None and t_saturation <= t_end:
        events.append((t_saturation, Phase.SATURATION))
    for t, phase in sorted(events):
        if phase > out[-1][0]:
            out.append((phase, t))
    return out
