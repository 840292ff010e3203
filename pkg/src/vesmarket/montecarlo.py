"""Monte Carlo propagation of random baseline elasticity and quality growth.

Random numbers come from Philox, a counter-based generator. Draw ``i`` of a
stream lives in block ``i // BLOCK_SIZE`` and each block gets its own counter
window, so a draw never depends on how blocks are scheduled across workers.
The scheme is identified by :data:`RNG_SCHEME` and echoed in outputs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import stats

from vesmarket.core import share_from_exponent
from vesmarket.powerlaw import GenScenario, affine_x

RNG_SCHEME = "philox4x64-block8192-v1"
BLOCK_SIZE = 8192
SIGMA0_STREAM = 0
PHI_STREAM = 1
DEFAULT_QUANTILES = (0.05, 0.5, 0.95)

_FAMILY_PARAMS = {
    "point": ("value",),
    "exponential": ("rate",),
    "lognormal": ("mu", "s"),
    "truncated-normal": ("mean", "sd", "lower"),
}


@dataclass(frozen=True)
class DistributionSpec:
    """Sampling distribution for a nonnegative model parameter.

    Families and their parameters:

    * ``point``: ``value``
    * ``exponential``: ``rate``
    * ``lognormal``: ``mu``, ``s`` (log-scale location and scale)
    * ``truncated-normal``: ``mean``, ``sd``, ``lower`` (default 0)
    """

    family: str
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in _FAMILY_PARAMS:
            raise ValueError(f"unknown family {self.family!r}; expected one of {sorted(_FAMILY_PARAMS)}")
        params = dict(self.params)
        if self.family == "truncated-normal":
            params.setdefault("lower", 0.0)
        expected = set(_FAMILY_PARAMS[self.family])
        if set(params) != expected:
            raise ValueError(f"{self.family} takes parameters {sorted(expected)}, got {sorted(params)}")
        params = {key: float(value) for key, value in params.items()}
        if not all(math.isfinite(v) for v in params.values()):
            raise ValueError("distribution parameters must be finite")
        if self.family == "point" and params["value"] < 0:
            raise ValueError("point value must be >= 0")
        if self.family == "exponential" and not params["rate"] > 0:
            raise ValueError("exponential rate must be positive")
        if self.family == "lognormal" and not params["s"] > 0:
            raise ValueError("lognormal scale s must be positive")
        if self.family == "truncated-normal":
            if not params["sd"] > 0:
                raise ValueError("truncated-normal sd must be positive")
            if params["lower"] < 0:
                raise ValueError("truncated-normal lower bound must be >= 0")
        object.__setattr__(self, "params", params)

    @classmethod
    def point(cls, value: float) -> DistributionSpec:
        return cls("point", {"value": value})

    @classmethod
    def exponential(cls, rate: float) -> DistributionSpec:
        return cls("exponential", {"rate": rate})

    @classmethod
    def lognormal(cls, mu: float, s: float) -> DistributionSpec:
        return cls("lognormal", {"mu": mu, "s": s})

    @classmethod
    def truncated_normal(cls, mean: float, sd: float, lower: float = 0.0) -> DistributionSpec:
        return cls("truncated-normal", {"mean": mean, "sd": sd, "lower": lower})

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DistributionSpec:
        data = dict(data)
        try:
            family = data.pop("family")
        except KeyError:
            raise ValueError("distribution needs a 'family' field") from None
        params = data.pop("params", None)
        return cls(family, params if params is not None else data)

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family, **self.params}

    @property
    def is_point(self) -> bool:
        return self.family == "point"

    def mean(self) -> float:
        p = self.params
        if self.family == "point":
            return p["value"]
        if self.family == "exponential":
            return 1.0 / p["rate"]
        if self.family == "lognormal":
            return math.exp(p["mu"] + p["s"] ** 2 / 2)
        return float(self._truncnorm().mean())

    def var(self) -> float:
        p = self.params
        if self.family == "point":
            return 0.0
        if self.family == "exponential":
            return 1.0 / p["rate"] ** 2
        if self.family == "lognormal":
            s2 = p["s"] ** 2
            return math.expm1(s2) * math.exp(2 * p["mu"] + s2)
        return float(self._truncnorm().var())

    def _truncnorm(self):
        p = self.params
        lo = (p["lower"] - p["mean"]) / p["sd"]
        return stats.truncnorm(lo, np.inf, loc=p["mean"], scale=p["sd"])

    def _draw(self, gen: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.family == "point":
            return np.full(size, p["value"])
        if self.family == "exponential":
            return gen.exponential(1.0 / p["rate"], size)
        if self.family == "lognormal":
            return gen.lognormal(p["mu"], p["s"], size)
        return self._truncnorm().ppf(gen.random(size))


def _block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    key = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    # counter words: [draw counter, unused, block, stream]
    bitgen = np.random.Philox(key=key, counter=[0, 0, block, stream])
    return np.random.Generator(bitgen)


def _block_sizes(n: int) -> list[int]:
    full, rest = divmod(n, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _sample_block(spec: DistributionSpec, size: int, seed: int, stream: int, block: int) -> np.ndarray:
    return spec._draw(_block_generator(seed, stream, block), size)


def sample(spec: DistributionSpec, n: int, seed: int, stream: int = SIGMA0_STREAM) -> np.ndarray:
    """``n`` i.i.d. draws from ``spec``, fully determined by ``(seed, stream)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if seed < 0:
        raise ValueError("seed must be >= 0")
    parts = [_sample_block(spec, size, seed, stream, b) for b, size in enumerate(_block_sizes(n))]
    return np.concatenate(parts)


@dataclass(frozen=True)
class TstarSummary:
    """Distribution of the generalized crossing time.

    ``samples`` holds finite draws only; draws whose sigma0 is already at or
    above 1 are counted in ``already_crossed`` and draws that never cross
    (zero quality growth) in ``never``.
    """

    samples: np.ndarray
    already_crossed: int
    never: int
    n: int
    median: float | None
    iqr: float | None


@dataclass(frozen=True)
class McResult:
    times: np.ndarray
    share_mean: np.ndarray
    quantile_probs: tuple[float, ...]
    share_quantiles: np.ndarray  # shape (len(quantile_probs), len(times))
    x_mean: np.ndarray
    x_var: np.ndarray
    tstar: TstarSummary
    seed: int
    n: int

    def quantile(self, prob: float) -> np.ndarray:
        return self.share_quantiles[self.quantile_probs.index(prob)]


def _bounded_mean(values: np.ndarray) -> np.ndarray:
    # summation rounding can push the mean of equal draws off the common value
    return np.clip(values.mean(axis=0), values.min(axis=0), values.max(axis=0))


def nearest_rank(sorted_values: np.ndarray, prob: float) -> Any:
    """Nearest-rank quantile along axis 0 of presorted data."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError("quantile probability must lie in [0, 1]")
    n = sorted_values.shape[0]
    rank = max(1, math.ceil(prob * n))
    return sorted_values[rank - 1]


def _tstar_values(sigma0: np.ndarray, phi: np.ndarray, k: float) -> tuple[np.ndarray, int, int]:
    crossed = sigma0 >= 1.0
    never = ~crossed & (phi <= 0.0)
    ok = ~crossed & ~never
    values = ((1.0 - sigma0[ok]) / phi[ok]) ** (1.0 / k)
    return values, int(crossed.sum()), int(never.sum())


def _summarize_tstar(values: np.ndarray, already: int, never: int, n: int) -> TstarSummary:
    if values.size:
        ordered = np.sort(values)
        median = float(nearest_rank(ordered, 0.5))
        iqr = float(nearest_rank(ordered, 0.75) - nearest_rank(ordered, 0.25))
    else:
        median = iqr = None
    return TstarSummary(samples=values, already_crossed=already, never=never, n=n, median=median, iqr=iqr)


def tstar_distribution(
    sigma0_spec: DistributionSpec,
    phi_spec: DistributionSpec,
    k: float,
    n: int,
    seed: int,
) -> TstarSummary:
    if not 0.0 < k <= 1.0:
        raise ValueError(f"k must lie in (0, 1], got {k!r}")
    sigma0 = sample(sigma0_spec, n, seed, SIGMA0_STREAM)
    phi = sample(phi_spec, n, seed, PHI_STREAM)
    values, already, never = _tstar_values(sigma0, phi, k)
    return _summarize_tstar(values, already, never, n)


def propagate(
    gs: GenScenario,
    sigma0_spec: DistributionSpec,
    phi_spec: DistributionSpec,
    grid: Sequence[float],
    n: int,
    seed: int,
    quantiles: Sequence[float] = DEFAULT_QUANTILES,
    workers: int = 1,
) -> McResult:
    """Push independent (sigma0, phi) draws through the power-law share model.

    The scenario's own ``sigma0`` and ``phi`` are ignored; every draw replaces
    them. ``workers`` only changes scheduling, never the result.
    """
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("grid must be a nonempty 1-d sequence of times")
    if np.any(times < 0):
        raise ValueError("grid times must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    probs = tuple(float(q) for q in quantiles)

    ax = affine_x(gs, times)

    def run_block(job: tuple[int, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        block, size = job
        s0 = _sample_block(sigma0_spec, size, seed, SIGMA0_STREAM, block)
        ph = _sample_block(phi_spec, size, seed, PHI_STREAM, block)
        x = ax.theta + np.outer(s0, ax.upsilon) + np.outer(ph, ax.xi_weight)
        return s0, ph, x

    jobs = list(enumerate(_block_sizes(n)))
    if workers == 1:
        results = [run_block(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, jobs))

    # fixed-order merge
    sigma0 = np.concatenate([r[0] for r in results])
    phi = np.concatenate([r[1] for r in results])
    x = np.concatenate([r[2] for r in results], axis=0)
    share = share_from_exponent(x)

    ordered = np.sort(share, axis=0)
    share_quantiles = np.vstack([nearest_rank(ordered, q) for q in probs])
    x_mean = _bounded_mean(x)
    x_var = ((x - x_mean) ** 2).sum(axis=0) / (n - 1) if n > 1 else np.zeros_like(times)

    values, already, never = _tstar_values(sigma0, phi, gs.k)
    return McResult(
        times=times,
        share_mean=_bounded_mean(share),
        quantile_probs=probs,
        share_quantiles=share_quantiles,
        x_mean=x_mean,
        x_var=x_var,
        tstar=_summarize_tstar(values, already, never, n),
        seed=seed,
        n=n,
    )
