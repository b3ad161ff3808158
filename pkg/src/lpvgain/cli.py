"""Command-line pipeline: config ingestion, orchestration, report emission.

Subcommands
    frozen       best gain over frozen parameter values on a grid
    pltv-norm    exact norm bracket for one scheduling trajectory
    lower-bound  trajectory optimization (with or without an upper bound)
    wc-input     near-worst-case input synthesis at a given trajectory
    full         frozen -> lower bound -> worst-case input, one report

Config files are JSON.  A model is either a built-in name ("harald",
"scaled-lti", "rotated", "twopar") or an inline definition with matrix
entries given as expression strings in the variables r1..rm:

    {
      "model": {"m": 1, "A": [["-1", "r1"], ["0", "-2"]],
                "B": [["1"], ["0"]], "C": [["1", "0"]], "D": [["0"]],
                "range": [[0.0, 1.0]], "rate": [[-1.0, 1.0]]},
      "schedule": {"patterns": [[1, 0, -1, 0, 1, 0]],
                   "h_min": 1.0, "h_max": 5.0},
      "grid": [50],
      "gamma_ub": 3.0,            // number, path to a JSON file, or "skip"
      "options": {"max_evals": 400},
      "K": 60,
      "seed": 0
    }

An upper-bound file must contain {"gamma_ub": <float>, ...}.  Reports are
JSON with the keys gamma_lb_frozen, gamma_lb, gamma_ub, h_star, c_star,
eigenvalue, achieved_ratio, timings, termination always present.  Signal
tables are CSV with header t,rho_1..rho_m,w_1..w_p,z_1..z_q.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 invalid upper bound.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import lbopt, lpv, pltv, registry, wcinput
from .errors import ConfigError, InvalidUpperBound, LpvGainError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_BAD_UB = 4


# ---------------------------------------------------------------- config


def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as ex:
        raise ConfigError(f"cannot read config {path}: {ex}") from ex


def _build_model(cfg: dict):
    """Return (model, schedule_or_None, grid_counts) from the config."""
    src = cfg.get("model")
    if src is None:
        raise ConfigError("config must declare a model")
    if isinstance(src, str):
        kwargs = {}
        if src == "scaled-lti" and "mu_bar" in cfg:
            kwargs["mu_bar"] = float(cfg["mu_bar"])
        try:
            ex = registry.get(src, **kwargs)
        except KeyError:
            raise ConfigError(
                f"unknown built-in model {src!r}; choices: {registry.names()}"
            ) from None
        model, schedule, grid = ex.model, ex.schedule, ex.grid_counts
        if ex.c0 is not None:
            cfg.setdefault("c0", list(ex.c0))
    elif isinstance(src, dict):
        try:
            model = lpv.model_from_entries(
                m=int(src["m"]),
                A=src["A"], B=src["B"], C=src["C"], D=src["D"],
                range_bounds=src["range"], rate_bounds=src["rate"],
                name=src.get("name", "inline"),
            )
        except (KeyError, ValueError, LpvGainError) as ex:
            raise ConfigError(f"bad inline model: {ex}") from ex
        schedule, grid = None, tuple([20] * model.m)
    else:
        raise ConfigError("model must be a built-in name or an inline object")

    if "schedule" in cfg:
        s = cfg["schedule"]
        try:
            schedule = lpv.ScheduleSpec(
                patterns=tuple(np.asarray(p, float) for p in s["patterns"]),
                h_min=float(s["h_min"]), h_max=float(s["h_max"]),
            )
        except (KeyError, ValueError) as ex:
            raise ConfigError(f"bad schedule: {ex}") from ex
    if "grid" in cfg:
        grid = tuple(int(k) for k in cfg["grid"])
    return model, schedule, grid


def _build_options(cfg: dict, threads: int) -> lbopt.OptOptions:
    fields = {f.name for f in dataclasses.fields(lbopt.OptOptions)}
    raw = dict(cfg.get("options", {}))
    unknown = set(raw) - fields
    if unknown:
        raise ConfigError(f"unknown option keys: {sorted(unknown)}")
    if threads > 1:
        raw.setdefault("parallel", True)
        raw.setdefault("threads", threads)
    try:
        return lbopt.OptOptions(**raw)
    except (TypeError, ValueError) as ex:
        raise ConfigError(f"bad options: {ex}") from ex


def _resolve_gamma_ub(cfg: dict, override: str | None):
    """Returns a float, or None for 'skip'."""
    src = override if override is not None else cfg.get("gamma_ub", "skip")
    if isinstance(src, str):
        if src == "skip":
            return None
        try:
            return float(src)
        except ValueError:
            pass
        data = _load_json(src)
        if "gamma_ub" not in data:
            raise ConfigError(f"upper-bound file {src} lacks a gamma_ub field")
        src = data["gamma_ub"]
    try:
        g = float(src)
    except (TypeError, ValueError):
        raise ConfigError(f"gamma_ub must be numeric, a path, or 'skip': {src!r}")
    if g <= 0:
        raise ConfigError(f"gamma_ub must be positive, got {g}")
    return g


# ---------------------------------------------------------------- output


def _empty_report() -> dict:
    return {
        "gamma_lb_frozen": None, "gamma_lb": None, "gamma_ub": None,
        "h_star": None, "c_star": None, "eigenvalue": None,
        "achieved_ratio": None, "timings": {}, "termination": None,
    }


def _write_report(report: dict, out_dir: Path, name: str = "report.json"):
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _write_signals(sig: wcinput.WorstCaseSignals, out_dir: Path,
                   name: str = "wc_signals.csv"):
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    m = sig.rho.shape[1]
    p = sig.w.shape[1]
    q = sig.z.shape[1]
    header = (
        ["t"]
        + [f"rho_{i + 1}" for i in range(m)]
        + [f"w_{i + 1}" for i in range(p)]
        + [f"z_{i + 1}" for i in range(q)]
    )
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for k in range(len(sig.t)):
            row = np.concatenate(([sig.t[k]], sig.rho[k], sig.w[k], sig.z[k]))
            f.write(",".join(f"{x:.12g}" for x in row) + "\n")
    return path


def _jsonify(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


# ---------------------------------------------------------------- stages


def _frozen_stage(model, grid_counts, report):
    t0 = time.perf_counter()
    grid = lpv.default_grid(model, grid_counts)
    best, arg = lpv.frozen_lower_bound(model, grid)
    report["gamma_lb_frozen"] = float(best)
    report["rho_star_frozen"] = _jsonify(np.atleast_1d(arg))
    report["timings"]["frozen"] = time.perf_counter() - t0
    return best


def _lower_bound_stage(model, schedule, gamma_ub, cfg, opts, report):
    if schedule is None:
        raise ConfigError("lower-bound stages need a schedule")
    c0 = np.asarray(cfg["c0"], float) if "c0" in cfg else None
    t0 = time.perf_counter()
    if gamma_ub is None:
        res = lbopt.algorithm_one(model, schedule, c0=c0, opts=opts)
    else:
        res = lbopt.algorithm_two(model, schedule, gamma_ub, c0=c0, opts=opts)
    report["gamma_lb"] = float(res.gamma_lb)
    report["gamma_ub"] = gamma_ub
    report["h_star"] = float(res.h_star)
    report["c_star"] = _jsonify(res.c_star)
    report["termination"] = res.termination
    report["nu_evals"] = res.nu_evals
    report["bracket"] = [float(res.bracket.lower), float(res.bracket.upper)]
    report["timings"]["lower_bound"] = time.perf_counter() - t0
    return res


def _wc_stage(model, schedule, c, gamma, K, report, out_dir):
    t0 = time.perf_counter()
    traj = lpv.trajectory(schedule, model, np.asarray(c, float))
    sys = lpv.evaluate_along(model, traj)
    plant = pltv.lifted_plant(sys, gamma)
    mp = wcinput.reconstruct_monodromy(plant)
    lam, v = wcinput.unit_eigenpair(mp, unit_tol=1e-3)
    sig = wcinput.synthesize(sys, gamma, (lam, v), K=K, rho_of_t=traj.rho)
    report["eigenvalue"] = _jsonify(lam)
    report["achieved_ratio"] = sig.achieved_ratio
    report["period_identity_residual"] = sig.period_identity_residual
    report["timings"]["wc_input"] = time.perf_counter() - t0
    csv_path = _write_signals(sig, out_dir)
    report["signals_csv"] = str(csv_path)
    return sig


def _frozen_comparable(schedule) -> bool:
    # a constant trajectory needs a zero-rate segment in every pattern
    return all(np.any(np.asarray(p) == 0.0) for p in schedule.patterns)


# ---------------------------------------------------------------- commands


def _cmd_frozen(model, schedule, grid, cfg, opts, args, report, out_dir):
    _frozen_stage(model, grid, report)
    report["termination"] = "frozen-only"


def _cmd_pltv_norm(model, schedule, grid, cfg, opts, args, report, out_dir):
    if schedule is None:
        raise ConfigError("pltv-norm needs a schedule")
    c = np.asarray(cfg["c0"], float) if "c0" in cfg else lbopt.default_start(
        schedule, model)
    traj = lpv.trajectory(schedule, model, c)
    sys = lpv.evaluate_along(model, traj)
    t0 = time.perf_counter()
    hint = float(cfg.get("gamma", 1.0))
    bracket = pltv.norm_bisect(sys, 0.5 * hint, 2.0 * hint)
    report["gamma_lb"] = float(bracket.lower)
    report["bracket"] = [float(bracket.lower), float(bracket.upper)]
    report["h_star"] = float(traj.h)
    report["c_star"] = _jsonify(c)
    report["termination"] = "norm-bisection"
    report["timings"]["pltv_norm"] = time.perf_counter() - t0


def _cmd_lower_bound(model, schedule, grid, cfg, opts, args, report, out_dir):
    gamma_ub = _resolve_gamma_ub(cfg, args.gamma_ub)
    _lower_bound_stage(model, schedule, gamma_ub, cfg, opts, report)


def _cmd_wc_input(model, schedule, grid, cfg, opts, args, report, out_dir):
    if "c0" not in cfg or "gamma" not in cfg:
        raise ConfigError("wc-input needs 'c0' and 'gamma' in the config")
    K = int(cfg.get("K", wcinput.DEFAULT_K))
    _wc_stage(model, schedule, cfg["c0"], float(cfg["gamma"]), K, report,
              out_dir)
    report["gamma_lb"] = float(cfg["gamma"])
    report["termination"] = "wc-input-only"


def _cmd_full(model, schedule, grid, cfg, opts, args, report, out_dir):
    frozen = _frozen_stage(model, grid, report)
    gamma_ub = _resolve_gamma_ub(cfg, args.gamma_ub)
    res = _lower_bound_stage(model, schedule, gamma_ub, cfg, opts, report)
    K = int(cfg.get("K", wcinput.DEFAULT_K))
    _wc_stage(model, schedule, res.c_star, res.gamma_lb, K, report, out_dir)
    report["frozen_comparable"] = _frozen_comparable(schedule)
    if report["frozen_comparable"] and frozen > res.gamma_lb + 1e-9:
        report["warning"] = "frozen bound exceeds the trajectory bound"


_COMMANDS = {
    "frozen": _cmd_frozen,
    "pltv-norm": _cmd_pltv_norm,
    "lower-bound": _cmd_lower_bound,
    "wc-input": _cmd_wc_input,
    "full": _cmd_full,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lpvgain",
        description="Lower bounds on the induced L2 gain of gridded LPV systems",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--example", choices=registry.names(),
                        help="built-in example name")
        sp.add_argument("--gamma-ub",
                        help="upper bound: number, JSON file path, or 'skip'")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.config is None and args.example is None:
            raise ConfigError("give --config PATH or --example NAME")
        cfg = _load_json(args.config) if args.config else {}
        if args.example is not None:
            if "model" in cfg and cfg["model"] != args.example:
                raise ConfigError("--example conflicts with the config model")
            cfg["model"] = args.example
        model, schedule, grid = _build_model(cfg)
        opts = _build_options(cfg, args.threads)
        np.random.seed(int(cfg.get("seed", args.seed)))

        out_dir = Path(cfg.get("out", args.out))
        report = _empty_report()
        report["model"] = model.name or "inline"
        report["seed"] = int(cfg.get("seed", args.seed))
        t0 = time.perf_counter()
        _COMMANDS[args.command](model, schedule, grid, cfg, opts, args,
                                report, out_dir)
        report["timings"]["total"] = time.perf_counter() - t0
        path = _write_report(report, out_dir)
        print(f"report written to {path}")
        for key in ("gamma_lb_frozen", "gamma_lb", "gamma_ub", "h_star",
                    "achieved_ratio"):
            if report.get(key) is not None:
                print(f"  {key}: {report[key]}")
        return EXIT_OK
    except InvalidUpperBound as ex:
        print(f"invalid upper bound: {ex}", file=sys.stderr)
        return EXIT_BAD_UB
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except LpvGainError as ex:
        print(f"numeric failure: {type(ex).__name__}: {ex}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
