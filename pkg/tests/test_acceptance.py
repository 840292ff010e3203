"""End-to-end acceptance checks, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import json
import math
import time

import mpmath
import numpy as np
import pytest

from conftest import REFERENCE_TABLE, TABLE1_ALPHA, TABLE1_PRICE0, TABLE1_TRIPLES
from vesmarket.calibration import Observation, fit_scenario
from vesmarket.cli import main, table1_rows
from vesmarket.core import CesPoint, revenue_share
from vesmarket.dynamics import (
    Scenario,
    phase_timeline,
    price_at,
    share_at,
    sigma_at,
    t_star,
    trajectory,
)
from vesmarket.montecarlo import DistributionSpec, propagate
from vesmarket.powerlaw import (
    ALREADY_CROSSED,
    GenScenario,
    affine_x,
    delta_x,
    mean_x,
    price_pl,
    share_pl,
    sigma_pl,
    t_star_general,
    var_x,
)

SEED = 20240611


def random_scenario(rng):
    return Scenario(
        alpha=rng.uniform(0.001, 0.999),
        price0=rng.uniform(0.01, 0.99),
        growth_g=rng.uniform(0.1, 2.0),
        decay_d=rng.uniform(0.05, 2.0),
        delta=rng.uniform(0.01, 0.3),
    )


def random_gen_scenario(rng, sigma0_max=3.0):
    return GenScenario(
        alpha=rng.uniform(0.001, 0.999),
        price0=rng.uniform(0.01, 0.99),
        decay_d=rng.uniform(0.05, 2.0),
        phi=rng.uniform(0.005, 0.5),
        sigma0=rng.uniform(0.0, sigma0_max),
        k=rng.uniform(0.1, 1.0),
        xi=rng.uniform(0.1, 1.0),
    )


def rel_close(x, y, tol):
    return abs(x - y) <= tol * max(abs(x), abs(y)) or x == y


@pytest.mark.criterion(1, "reference table reproduced at printed precision, runtime < 1 s")
def test_table1_reproduction(tmp_path):
    start = time.perf_counter()
    rows = table1_rows()
    assert main(["table1", "--out", str(tmp_path / "t1.csv")]) == 0
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    assert len(rows) == 8
    by_key = {(r["g"], r["d"], r["delta"]): r for r in rows}
    for g, d, delta, phi, tstar, r10, r30 in REFERENCE_TABLE:
        row = by_key[(g, d, delta)]
        assert f"{row['phi']:.3f}" == phi
        assert f"{row['t_star']:.3f}" == tstar
        assert abs(row["r_A_10"] - float(r10)) <= 5e-7
        assert abs(row["r_A_30"] - float(r30)) <= 5e-7


@pytest.mark.criterion(2, "route equivalence to 1e-12 relative on 1,000 random points")
def test_route_equivalence():
    rng = np.random.default_rng(SEED)
    for _ in range(1000):
        s = random_scenario(rng)
        t = rng.uniform(0.0, 100.0)
        direct = revenue_share(CesPoint(s.alpha, float(price_at(s.price0, s.decay_d, t)), float(sigma_at(s.phi, t))))
        assert rel_close(float(share_at(s, t)), direct, 1e-12)

        gs = random_gen_scenario(rng)
        direct = revenue_share(CesPoint(gs.alpha, float(price_pl(gs, t)), float(sigma_pl(gs, t))))
        assert rel_close(float(share_pl(gs, t)), direct, 1e-12)


@pytest.mark.criterion(3, "phase invariants: r(t*) = alpha, t_2star = 2 t_star, d-invariant boundaries")
def test_phase_invariants(capsys):
    rng = np.random.default_rng(SEED + 3)
    for _ in range(100):
        s = random_scenario(rng)
        assert rel_close(float(share_at(s, t_star(s.phi))), s.alpha, 1e-12)
        tl = phase_timeline(s)
        assert tl.t_2star == 2 * tl.t_star

        other = Scenario(s.alpha, s.price0, s.growth_g, rng.uniform(0.05, 2.0), s.delta)
        tl2 = phase_timeline(other)
        assert (tl.t_star, tl.t_2star) == (tl2.t_star, tl2.t_2star)

    # same check through the CLI report for the reference-table pairs that differ only in d
    for g in (0.5, 1.5):
        for delta in (0.05, 0.15):
            reports = []
            for d in (0.5, 1.5):
                assert main(["phases", "--g", str(g), "--d", str(d), "--delta", str(delta)]) == 0
                reports.append(json.loads(capsys.readouterr().out))
            assert reports[0]["t_star"] == reports[1]["t_star"]
            assert reports[0]["t_2star"] == reports[1]["t_2star"]


@pytest.mark.criterion(4, "generalized timeline: k=0.5 squares the time, bisection agrees to 1e-10")
def test_generalized_timeline():
    base = dict(alpha=0.001, price0=0.5, decay_d=0.5, phi=0.1, sigma0=0.0)
    assert t_star_general(GenScenario(**base, k=0.5)) == pytest.approx(100.0, rel=1e-14)
    assert t_star_general(GenScenario(**base, k=1.0)) == pytest.approx(10.0, rel=1e-15)
    assert t_star_general(GenScenario(**{**base, "sigma0": 1.2})) is ALREADY_CROSSED

    rng = np.random.default_rng(SEED + 4)
    checked = 0
    while checked < 100:
        gs = random_gen_scenario(rng, sigma0_max=0.99)
        closed = t_star_general(gs)
        hi = 1.0
        while sigma_pl(gs, hi) < 1.0:
            hi *= 2.0
        lo = 0.0
        for _ in range(2000):
            mid = 0.5 * (lo + hi)
            if sigma_pl(gs, mid) < 1.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        assert rel_close(0.5 * (lo + hi), closed, 1e-10)
        checked += 1


@pytest.mark.criterion(5, "calibration round trip: noiseless to 1e-9, noisy within 5%")
def test_calibration_round_trip():
    times = np.linspace(0.0, 30.0, 20)
    rng = np.random.default_rng(SEED + 5)
    for g, d, delta in TABLE1_TRIPLES:
        s = Scenario(TABLE1_ALPHA, TABLE1_PRICE0, g, d, delta)
        logits = np.array(
            [math.log(s.alpha / (1 - s.alpha)) + (1 - s.phi * t) * (math.log(s.price0) - s.decay_d * t) for t in times]
        )
        clean = fit_scenario([Observation(float(t), 0.5, float(v)) for t, v in zip(times, logits)], s.price0)
        assert clean.feasible
        for got, want in ((clean.alpha_hat, s.alpha), (clean.d_hat, s.decay_d), (clean.phi_hat, s.phi)):
            assert rel_close(got, want, 1e-9)

        noisy = logits + rng.normal(0.0, 0.01, times.size)
        fit = fit_scenario([Observation(float(t), 0.5, float(v)) for t, v in zip(times, noisy)], s.price0)
        assert fit.feasible
        for got, want in ((fit.alpha_hat, s.alpha), (fit.d_hat, s.decay_d), (fit.phi_hat, s.phi)):
            assert abs(got / want - 1) < 0.05


@pytest.mark.criterion(6, "Monte Carlo moments within 4 SE of analytic at n=1e5, runtime < 10 s")
def test_moment_propagation():
    gs = GenScenario(alpha=0.001, price0=0.5, decay_d=0.5, phi=0.075)
    grid = [0.0, 5.0, 10.0, 20.0, 30.0]
    n = 10**5
    sigma0 = DistributionSpec.exponential(10.0)
    start = time.perf_counter()
    res = propagate(gs, sigma0, DistributionSpec.point(0.075), grid, n=n, seed=SEED)
    assert time.perf_counter() - start < 10.0
    for i, t in enumerate(grid):
        m = mean_x(gs, t, sigma0.mean(), 0.075)
        v = var_x(gs, t, sigma0.var())
        assert abs(res.x_mean[i] - m) < 4 * math.sqrt(v / n)
        # SE of a sample variance is v*sqrt((kurtosis - 1)/n); exponential kurtosis is 9
        assert abs(res.x_var[i] - v) < 4 * v * math.sqrt(8 / n)


@pytest.mark.criterion(7, "differencing identity to 1e-12, bitwise free of alpha and phi")
def test_differencing_identity():
    rng = np.random.default_rng(SEED + 7)
    for _ in range(1000):
        gs = random_gen_scenario(rng)
        t = rng.uniform(0.0, 100.0)
        s1, s2 = rng.uniform(0.0, 3.0, 2)
        task1 = GenScenario(gs.alpha, gs.price0, gs.decay_d, gs.phi, s1, gs.k, gs.xi)
        task2 = GenScenario(gs.alpha, gs.price0, gs.decay_d, gs.phi, s2, gs.k, gs.xi)
        sub = affine_x(task1, t).value - affine_x(task2, t).value
        ax = affine_x(gs, t)
        scale = max(1.0, abs(ax.theta), 3 * abs(ax.upsilon), abs(ax.xi_weight * gs.phi))
        dx = delta_x(gs, t, s1, s2)
        assert abs(dx - sub) <= 1e-12 * scale

        perturbed = GenScenario(rng.uniform(0.001, 0.999), gs.price0, gs.decay_d, rng.uniform(0.005, 0.5), gs.sigma0, gs.k, gs.xi)
        assert delta_x(perturbed, t, s1, s2) == dx


@pytest.mark.criterion(8, "stability to 1e4 years: finite fields, unclamped shares in (0, 1]")
def test_long_horizon_stability(tmp_path, capsys):
    for g, d, delta in TABLE1_TRIPLES:
        s = Scenario(TABLE1_ALPHA, TABLE1_PRICE0, g, d, delta)
        tr = trajectory(s, 1e4, 10_001)
        for field in (tr.times, tr.sigma, tr.price, tr.exponent, tr.share, tr.logit_share):
            assert np.all(np.isfinite(field))
        assert np.all(tr.share > 0) and np.all(tr.share <= 1)
        # a share of exactly 1.0 is only allowed where the true value rounds there
        at_one = tr.share == 1.0
        assert np.all(tr.logit_share[at_one] > -math.log(2.0**-53))
        # spot-check the computed value against a high-precision oracle
        for i in range(0, 10_001, 500):
            with mpmath.workdps(60):
                x = mpmath.log((1 - mpmath.mpf(s.alpha)) / s.alpha) + (mpmath.mpf(s.phi) * tr.times[i] - 1) * mpmath.log(tr.price[i])
                exact = 1 / (1 + mpmath.exp(x))
            assert rel_close(float(tr.share[i]), float(exact), 1e-12)

        gs = GenScenario(s.alpha, s.price0, s.decay_d, s.phi)
        share = share_pl(gs, tr.times)
        assert np.all(np.isfinite(share)) and np.all((share > 0) & (share <= 1))

        out = tmp_path / f"sim_{g}_{d}_{delta}.csv"
        argv = ["simulate", "--g", str(g), "--d", str(d), "--delta", str(delta), "--t-end", "1e4", "--steps", "10001"]
        assert main(argv + ["--out", str(out)]) == 0
        values = np.loadtxt(out, delimiter=",", skiprows=1)
        assert values.shape == (10_001, 5) and np.all(np.isfinite(values))

        assert main(["phases", "--g", str(g), "--d", str(d), "--delta", str(delta), "--t-end", "1e4", "--steps", "10001"]) == 0
        report = json.loads(capsys.readouterr().out)
        for key in ("t_star", "t_2star", "t_end", "epsilon"):
            assert math.isfinite(report[key])
        assert all(math.isfinite(b["t_enter"]) for b in report["phase_boundaries"])

        res = propagate(gs, DistributionSpec.exponential(10.0), DistributionSpec.point(s.phi), tr.times[::100], n=2000, seed=1)
        for field in (res.share_mean, res.share_quantiles, res.x_mean, res.x_var):
            assert np.all(np.isfinite(field))


@pytest.mark.criterion(9, "montecarlo CSV byte-identical across runs and worker counts")
def test_reproducibility(tmp_path):
    cfg = tmp_path / "mc.json"
    cfg.write_text(
        json.dumps(
            {
                "command": "montecarlo",
                "n": 50_000,
                "seed": 7,
                "sigma0_dist": {"family": "lognormal", "mu": -2.0, "s": 1.0},
                "phi_dist": {"family": "truncated-normal", "mean": 0.1, "sd": 0.05},
                "k": 0.8,
            }
        )
    )
    outputs = []
    for i, workers in enumerate(("1", "1", "4")):
        out = tmp_path / f"run{i}.csv"
        assert main(["montecarlo", "--config", str(cfg), "--workers", workers, "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
