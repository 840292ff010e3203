"""Command-line interface.

Usage::

    vesmarket table1
    vesmarket simulate --g 1.5 --d 0.5 --delta 0.15 --format svg --out fig.svg
    vesmarket phases --config run.json --epsilon 1e-6
    vesmarket sweep --g 0.5 1.5 --d 0.5 1.5 --delta 0.05 0.15 --out sweep.csv
    vesmarket montecarlo --sigma0-dist '{"family": "exponential", "rate": 10}' --seed 1
    vesmarket fit --observations obs.csv --price0 0.5

Every option can also come from a JSON document given with ``--config``; flags
win over the file. Exit status: 0 ok (including infeasible fits), 2 invalid
configuration or input data, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from vesmarket import __version__
from vesmarket.calibration import Observation, RankDeficientError, fit_scenario
from vesmarket.dynamics import (
    DEFAULT_EPSILON,
    Phase,
    Scenario,
    first_saturation_time,
    phase_at,
    phase_boundaries,
    share_at,
    t_star,
    time_grid,
    trajectory,
)
from vesmarket.montecarlo import RNG_SCHEME, DistributionSpec, propagate
from vesmarket.powerlaw import (
    Crossing,
    GenScenario,
    mean_x,
    phase_at_pl,
    share_pl,
    t_sigma_level,
)
from vesmarket.svg import Series, render

MODEL_VERSION = "1.0"
EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

TABLE1_ALPHA = 0.001
TABLE1_PRICE0 = 0.5
TABLE1_G = (0.5, 1.5)
TABLE1_D = (0.5, 1.5)
TABLE1_DELTA = (0.05, 0.15)

TRAJECTORY_COLUMNS = ("t", "sigma", "price", "share", "logit_share")
EPSILON_NOTE = "saturation threshold share >= 1 - epsilon is an implementation choice"

DEFAULTS: dict[str, Any] = {
    "out": None,
    "format": None,
    "alpha": TABLE1_ALPHA,
    "price0": TABLE1_PRICE0,
    "g": 1.5,
    "d": 0.5,
    "delta": 0.15,
    "phi": None,
    "sigma0": None,
    "k": None,
    "xi": None,
    "t_end": 30.0,
    "steps": 301,
    "epsilon": DEFAULT_EPSILON,
    "seed": 0,
    "n": 10_000,
    "workers": 1,
    "quantiles": [0.05, 0.5, 0.95],
    "sigma0_dist": {"family": "exponential", "rate": 10.0},
    "phi_dist": None,
    "observations": None,
}
SWEEP_DEFAULTS = {"g": list(TABLE1_G), "d": list(TABLE1_D), "delta": list(TABLE1_DELTA)}
FORMATS = {
    "table1": ("csv", "json"),
    "simulate": ("csv", "json", "svg"),
    "sweep": ("csv", "json", "svg"),
    "phases": ("json",),
    "montecarlo": ("csv", "json"),
    "fit": ("json",),
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- formatting


def fmt_float(x: float) -> str:
    """Shortest round-trip representation, locale independent."""
    return repr(float(x))


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _json_time(value: float | Crossing | None) -> float | str | None:
    if isinstance(value, Crossing):
        return value.value
    return None if value is None else float(value)


# ---------------------------------------------------------------- config


def _load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}


def resolve_config(command: str, flags: dict[str, Any]) -> dict[str, Any]:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if command == "sweep":
        cfg.update(SWEEP_DEFAULTS)
    file_cfg = _load_config(flags.pop("config", None))
    file_command = file_cfg.pop("command", command)
    if file_command != command:
        raise ConfigError(f"config is for command {file_command!r}, not {command!r}")
    unknown = sorted(set(file_cfg) - set(cfg))
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
    cfg.update(file_cfg)
    cfg.update(flags)
    cfg["command"] = command
    if cfg["format"] is None:
        cfg["format"] = FORMATS[command][0]
    if cfg["format"] not in FORMATS[command]:
        raise ConfigError(f"{command} supports formats {', '.join(FORMATS[command])}, not {cfg['format']!r}")
    return cfg


def _number(cfg: dict[str, Any], key: str, kind: Callable = float) -> Any:
    value = cfg[key]
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number")
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None
    if kind is float and not math.isfinite(out):
        raise ConfigError(f"{key} must be finite")
    if kind is int and out != value:
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return out


def _grid(cfg: dict[str, Any]) -> np.ndarray:
    try:
        return time_grid(_number(cfg, "t_end"), _number(cfg, "steps", int))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _epsilon(cfg: dict[str, Any]) -> float:
    eps = _number(cfg, "epsilon")
    if not 0.0 < eps < 0.5:
        raise ConfigError(f"epsilon must lie in (0, 0.5), got {eps!r}")
    return eps


def _scenario(cfg: dict[str, Any]) -> Scenario:
    try:
        return Scenario(
            alpha=_number(cfg, "alpha"),
            price0=_number(cfg, "price0"),
            growth_g=_number(cfg, "g"),
            decay_d=_number(cfg, "d"),
            delta=_number(cfg, "delta"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _is_generalized(cfg: dict[str, Any]) -> bool:
    return any(cfg[key] is not None for key in ("sigma0", "k", "xi"))


def _gen_scenario(cfg: dict[str, Any]) -> GenScenario:
    phi = cfg["phi"]
    if phi is None:
        phi = _number(cfg, "g") * _number(cfg, "delta")
    else:
        phi = _number(cfg, "phi")
    try:
        return GenScenario(
            alpha=_number(cfg, "alpha"),
            price0=_number(cfg, "price0"),
            decay_d=_number(cfg, "d"),
            phi=phi,
            sigma0=0.0 if cfg["sigma0"] is None else _number(cfg, "sigma0"),
            k=1.0 if cfg["k"] is None else _number(cfg, "k"),
            xi=1.0 if cfg["xi"] is None else _number(cfg, "xi"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _distribution(value: Any, key: str) -> DistributionSpec:
    if isinstance(value, str):
        try:
            value = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{key} is not valid JSON: {exc}") from exc
    if not isinstance(value, dict):
        raise ConfigError(f"{key} must be a JSON object with a 'family' field")
    try:
        return DistributionSpec.from_dict(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _scenario_dict(s: Scenario) -> dict[str, float]:
    return {"alpha": s.alpha, "price0": s.price0, "g": s.growth_g, "d": s.decay_d, "delta": s.delta, "phi": s.phi}


def _gen_scenario_dict(gs: GenScenario) -> dict[str, float]:
    return {
        "alpha": gs.alpha,
        "price0": gs.price0,
        "d": gs.decay_d,
        "phi": gs.phi,
        "sigma0": gs.sigma0,
        "k": gs.k,
        "xi": gs.xi,
    }


# ---------------------------------------------------------------- commands


def table1_rows() -> list[dict[str, float]]:
    rows = []
    for g, d, delta in itertools.product(TABLE1_G, TABLE1_D, TABLE1_DELTA):
        s = Scenario(TABLE1_ALPHA, TABLE1_PRICE0, g, d, delta)
        rows.append(
            {
                "g": g,
                "d": d,
                "delta": delta,
                "phi": s.phi,
                "t_star": t_star(s.phi),
                "r_A_10": float(share_at(s, 10.0)),
                "r_A_30": float(share_at(s, 30.0)),
            }
        )
    return rows


def format_table1_csv(rows: Sequence[dict[str, float]]) -> str:
    body = [
        [
            f"{r['g']:.1f}",
            f"{r['d']:.1f}",
            f"{r['delta']:.2f}",
            f"{r['phi']:.3f}",
            f"{r['t_star']:.3f}",
            f"{r['r_A_10']:.6f}",
            f"{r['r_A_30']:.6f}",
        ]
        for r in rows
    ]
    return _csv_text(["g", "d", "delta", "phi", "t_star", "r_A_10", "r_A_30"], body)


def cmd_table1(cfg: dict[str, Any]) -> int:
    rows = table1_rows()
    if cfg["format"] == "json":
        text = _json_text(
            {"model_version": MODEL_VERSION, "alpha": TABLE1_ALPHA, "price0": TABLE1_PRICE0, "rows": rows}
        )
    else:
        text = format_table1_csv(rows)
    _write(text, cfg["out"])
    return EXIT_OK


def trajectory_csv(traj) -> str:
    rows = [
        [fmt_float(v) for v in row]
        for row in zip(traj.times, traj.sigma, traj.price, traj.share, traj.logit_share)
    ]
    return _csv_text(TRAJECTORY_COLUMNS, rows)


def _series(label: str, s: Scenario, times: np.ndarray, share: np.ndarray) -> Series:
    ts = t_star(s.phi)
    return Series(
        label=label,
        times=times,
        share=share,
        t_star=ts,
        share_at_t_star=float(share_at(s, ts)),
        t_2star=2.0 * ts,
        share_at_t_2star=float(share_at(s, 2.0 * ts)),
    )


def _label(s: Scenario) -> str:
    return f"g={s.growth_g:g}, d={s.decay_d:g}, delta={s.delta:g}"


def cmd_simulate(cfg: dict[str, Any]) -> int:
    s = _scenario(cfg)
    grid = _grid(cfg)
    traj = trajectory(s, float(grid[-1]), len(grid))
    if cfg["format"] == "svg":
        text = render([_series(_label(s), s, traj.times, traj.share)])
    elif cfg["format"] == "json":
        text = _json_text(
            {
                "model_version": MODEL_VERSION,
                "scenario": _scenario_dict(s),
                "t_star": t_star(s.phi),
                "t_2star": 2.0 * t_star(s.phi),
                "trajectory": {
                    "t": [float(v) for v in traj.times],
                    **{name: [float(v) for v in getattr(traj, name)] for name in TRAJECTORY_COLUMNS[1:]},
                },
            }
        )
    else:
        text = trajectory_csv(traj)
    _write(text, cfg["out"])
    return EXIT_OK


def _list(cfg: dict[str, Any], key: str) -> list[float]:
    value = cfg[key]
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ConfigError(f"{key} list is empty")
    return [_number({key: v}, key) for v in values]


def cmd_sweep(cfg: dict[str, Any]) -> int:
    grid = _grid(cfg)
    scenarios = []
    for g, d, delta in itertools.product(_list(cfg, "g"), _list(cfg, "d"), _list(cfg, "delta")):
        scenarios.append(_scenario({**cfg, "g": g, "d": d, "delta": delta}))
    trajs = [trajectory(s, float(grid[-1]), len(grid)) for s in scenarios]

    if cfg["format"] == "svg":
        text = render([_series(_label(s), s, tr.times, tr.share) for s, tr in zip(scenarios, trajs)])
    elif cfg["format"] == "json":
        text = _json_text(
            {
                "model_version": MODEL_VERSION,
                "scenarios": [
                    {
                        **_scenario_dict(s),
                        "t_star": t_star(s.phi),
                        "t": [float(v) for v in tr.times],
                        "share": [float(v) for v in tr.share],
                        "logit_share": [float(v) for v in tr.logit_share],
                    }
                    for s, tr in zip(scenarios, trajs)
                ],
            }
        )
    else:
        rows = []
        for s, tr in zip(scenarios, trajs):
            key = [fmt_float(s.growth_g), fmt_float(s.decay_d), fmt_float(s.delta), fmt_float(s.phi)]
            for vals in zip(tr.times, tr.sigma, tr.price, tr.share, tr.logit_share):
                rows.append(key + [fmt_float(v) for v in vals])
        text = _csv_text(["g", "d", "delta", "phi", *TRAJECTORY_COLUMNS], rows)
    _write(text, cfg["out"])
    return EXIT_OK


def phase_report(cfg: dict[str, Any]) -> dict[str, Any]:
    eps = _epsilon(cfg)
    grid = _grid(cfg)
    t_end = float(grid[-1])
    if _is_generalized(cfg):
        gs = _gen_scenario(cfg)
        t1 = t_sigma_level(gs, 1.0)
        t2 = t_sigma_level(gs, 2.0)
        shares = share_pl(gs, grid)

        def phase_of(t: float) -> Phase:
            return phase_at_pl(gs, t, eps)

        model, params = "power-law", _gen_scenario_dict(gs)
    else:
        s = _scenario(cfg)
        t1 = t_star(s.phi)
        t2 = 2.0 * t1
        shares = share_at(s, grid)

        def phase_of(t: float) -> Phase:
            return phase_at(s, t, eps)

        model, params = "exponential", _scenario_dict(s)

    t_sat = first_saturation_time(grid, shares, eps)
    boundaries = phase_boundaries(
        phase_of,
        None if isinstance(t1, Crossing) else t1,
        None if isinstance(t2, Crossing) else t2,
        t_sat,
        t_end,
    )
    return {
        "model_version": MODEL_VERSION,
        "model": model,
        "scenario": params,
        "t_end": t_end,
        "t_star": _json_time(t1),
        "t_2star": _json_time(t2),
        "t_saturation": t_sat,
        "t_saturation_status": "reached" if t_sat is not None else "not reached within horizon",
        "epsilon": eps,
        "epsilon_note": EPSILON_NOTE,
        "phase_boundaries": [
            {"phase": int(phase), "name": phase.name.lower(), "t_enter": t} for phase, t in boundaries
        ],
    }


def cmd_phases(cfg: dict[str, Any]) -> int:
    _write(_json_text(phase_report(cfg)), cfg["out"])
    return EXIT_OK


def _mc_inputs(cfg: dict[str, Any]):
    gs = _gen_scenario(cfg)
    sigma0_spec = _distribution(cfg["sigma0_dist"], "sigma0_dist")
    phi_raw = cfg["phi_dist"]
    phi_spec = DistributionSpec.point(gs.phi) if phi_raw is None else _distribution(phi_raw, "phi_dist")
    n = _number(cfg, "n", int)
    seed = _number(cfg, "seed", int)
    workers = _number(cfg, "workers", int)
    if n < 1 or seed < 0 or workers < 1:
        raise ConfigError("n and workers must be >= 1 and seed >= 0")
    quantiles = cfg["quantiles"]
    if not isinstance(quantiles, list) or not quantiles:
        raise ConfigError("quantiles must be a nonempty list")
    quantiles = [_number({"q": q}, "q") for q in quantiles]
    if any(not 0.0 <= q <= 1.0 for q in quantiles) or quantiles != sorted(quantiles):
        raise ConfigError("quantiles must be increasing probabilities in [0, 1]")
    return gs, sigma0_spec, phi_spec, n, seed, workers, quantiles


def cmd_montecarlo(cfg: dict[str, Any]) -> int:
    gs, sigma0_spec, phi_spec, n, seed, workers, quantiles = _mc_inputs(cfg)
    grid = _grid(cfg)
    res = propagate(gs, sigma0_spec, phi_spec, grid, n, seed, quantiles, workers=workers)
    x_analytic = mean_x(gs, grid, sigma0_spec.mean(), phi_spec.mean())

    q_names = [f"share_q{q:g}" for q in res.quantile_probs]
    summary = {
        "model_version": MODEL_VERSION,
        "rng": RNG_SCHEME,
        "seed": seed,
        "n": n,
        "scenario": {k: v for k, v in _gen_scenario_dict(gs).items() if k not in ("sigma0", "phi")},
        "sigma0_dist": sigma0_spec.to_dict(),
        "phi_dist": phi_spec.to_dict(),
        "dependence": "independent",
        "quantile_method": "nearest-rank",
        "tstar": {
            "finite": int(res.tstar.samples.size),
            "already_crossed": res.tstar.already_crossed,
            "never": res.tstar.never,
            "median": res.tstar.median,
            "iqr": res.tstar.iqr,
        },
    }
    if cfg["format"] == "json":
        summary["fan"] = {
            "t": [float(v) for v in res.times],
            "share_mean": [float(v) for v in res.share_mean],
            **{name: [float(v) for v in row] for name, row in zip(q_names, res.share_quantiles)},
            "x_mean": [float(v) for v in res.x_mean],
            "x_var": [float(v) for v in res.x_var],
            "x_mean_analytic": [float(v) for v in x_analytic],
        }
        _write(_json_text(summary), cfg["out"])
        return EXIT_OK

    cols = [res.times, res.share_mean, *res.share_quantiles, res.x_mean, res.x_var, x_analytic]
    rows = [[fmt_float(v) for v in row] for row in zip(*cols)]
    text = _csv_text(["t", "share_mean", *q_names, "x_mean", "x_var", "x_mean_analytic"], rows)
    _write(text, cfg["out"])
    if cfg["out"] is not None:
        _write(_json_text(summary), str(Path(cfg["out"]).with_suffix(".summary.json")))
    return EXIT_OK


def read_observations(path: str) -> list[Observation]:
    """Parse a ``t,share`` CSV; an optional ``logit_share`` column takes precedence."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "t" not in fields or "share" not in fields:
            raise ConfigError(f"{path}: header must contain columns t and share")
        use_logit = "logit_share" in fields
        out = []
        for row in reader:
            line = reader.line_num
            try:
                t = float(row["t"])
                share = float(row["share"])
                lg = float(row["logit_share"]) if use_logit and row["logit_share"] not in ("", None) else None
                out.append(Observation(t, share, lg))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}:{line}: {exc}") from None
    return out


def cmd_fit(cfg: dict[str, Any]) -> int:
    path = cfg["observations"]
    if path is None:
        raise ConfigError("fit needs --observations PATH")
    price0 = _number(cfg, "price0")
    if not 0.0 < price0 < 1.0:
        raise ConfigError(f"price0 must lie in (0, 1), got {price0!r}")
    observations = read_observations(path)
    try:
        result = fit_scenario(observations, price0)
    except (RankDeficientError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not result.feasible:
        print(f"warning: structural recovery infeasible: {result.reason}", file=sys.stderr)
    payload = {"model_version": MODEL_VERSION, "price0": price0, **result.to_dict()}
    _write(_json_text(payload), cfg["out"])
    return EXIT_OK


COMMANDS: dict[str, Callable[[dict[str, Any]], int]] = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "table1": cmd_table1,
    "phases": cmd_phases,
    "montecarlo": cmd_montecarlo,
    "fit": cmd_fit,
}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=S, help="JSON config file; flags override its fields")
    common.add_argument("--out", default=S, help="output path (default: stdout)")
    common.add_argument("--format", default=S, help="output format")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--t-end", dest="t_end", type=float, default=S)
    grid.add_argument("--steps", type=int, default=S)

    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--alpha", type=float, default=S)
    scen.add_argument("--price0", type=float, default=S)
    scen.add_argument("--g", type=float, default=S, help="compute growth rate per year")
    scen.add_argument("--d", type=float, default=S, help="price decay rate per year")
    scen.add_argument("--delta", type=float, default=S, help="scaling-law sensitivity")

    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument("--phi", type=float, default=S, help="quality growth coefficient (default g*delta)")
    gen.add_argument("--sigma0", type=float, default=S)
    gen.add_argument("--k", type=float, default=S)
    gen.add_argument("--xi", type=float, default=S)

    eps = argparse.ArgumentParser(add_help=False)
    eps.add_argument("--epsilon", type=float, default=S, help="saturation tolerance")

    parser = argparse.ArgumentParser(prog="vesmarket", description="AI market penetration under rising elasticity")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("table1", parents=[common], help="scenario table at alpha=0.001, p0=0.5")
    sub.add_parser("simulate", parents=[common, grid, scen], help="one trajectory")
    sub.add_parser("phases", parents=[common, grid, scen, gen, eps], help="phase boundary report")

    sweep = sub.add_parser("sweep", parents=[common, grid], help="cross-product of scenario parameters")
    sweep.add_argument("--alpha", type=float, default=S)
    sweep.add_argument("--price0", type=float, default=S)
    sweep.add_argument("--g", type=float, nargs="+", default=S)
    sweep.add_argument("--d", type=float, nargs="+", default=S)
    sweep.add_argument("--delta", type=float, nargs="+", default=S)

    mc = sub.add_parser("montecarlo", parents=[common, grid, scen, gen], help="random sigma0/phi fan chart")
    mc.add_argument("--seed", type=int, default=S)
    mc.add_argument("--n", type=int, default=S)
    mc.add_argument("--workers", type=int, default=S, help="threads; results do not depend on it")
    mc.add_argument("--quantiles", type=float, nargs="+", default=S)
    mc.add_argument("--sigma0-dist", dest="sigma0_dist", default=S, help="JSON distribution spec")
    mc.add_argument("--phi-dist", dest="phi_dist", default=S, help="JSON distribution spec")

    fit = sub.add_parser("fit", parents=[common], help="calibrate from observed shares")
    fit.add_argument("--observations", default=S, help="CSV with columns t,share[,logit_share]")
    fit.add_argument("--price0", type=float, default=S, help="known initial AI price")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    try:
        cfg = resolve_config(command, args)
        return COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
