"""Command-line harness: ``fit``, ``solve``, ``sweep`` and ``gen-channels``.

Exit codes: 0 success, 2 usage or input error, 3 infeasible, 4 solver failure.
``SEMCOEX_THREADS`` sets the worker-thread count for sweeps and depth search.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import channel
from .ksearch import SOLVERS, solve_fixed_k, solve_p1
from .model import ChannelSet, ConfigError, SolverOptions, SystemConfig, dumps, validate_config
from .semrate import FitError, SemanticRateModel, default_model, fit, read_samples_csv

log = logging.getLogger("semcoex")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4
THREADS_ENV = "SEMCOEX_THREADS"
SWEEP_COLUMNS = ["axis_value", "solver", "trial", "objective", "feasible", "wall_time", "k_opt"]


class UsageError(Exception):
    pass


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be >= 1")
    return n


def _read_json(path: str, what: str):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} {path} is not valid JSON: {exc}") from None


def load_config(path: str | None, seed: int | None = None) -> SystemConfig:
    cfg = SystemConfig() if path is None else SystemConfig.from_dict(_read_json(path, "config"))
    if seed is not None:
        cfg = cfg.replace(seed=seed)
    return validate_config(cfg)


def load_model(path: str | None) -> SemanticRateModel:
    if path is None:
        return default_model()
    try:
        return SemanticRateModel.from_dict(_read_json(path, "model"))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed model {path}: {exc}") from None


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w") as f:
            f.write(text + "\n")


def _parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected comma-separated numbers") from None
    if not grid:
        raise UsageError("grid must not be empty")
    return grid


def _solver_names(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    for n in names:
        if n not in SOLVERS:
            raise UsageError(f"unknown solver {n!r}; expected one of {', '.join(SOLVERS)}")
    return names


def _solve(H: ChannelSet, cfg: SystemConfig, model, solver: str, depth: int | None, opts, workers=1):
    if depth is None:
        return solve_p1(H, cfg, model, solver, opts, workers=workers)
    if not cfg.k_min <= depth <= cfg.k_max:
        raise UsageError(f"depth {depth} outside [{cfg.k_min}, {cfg.k_max}]")
    return solve_fixed_k(H, cfg, model, solver, depth, opts)


# --- subcommands -------------------------------------------------------------

def cmd_fit(args) -> int:
    try:
        rows = read_samples_csv(args.samples)
        model = fit(rows, max_rms=args.max_rms)
    except OSError as exc:
        raise UsageError(f"cannot read {args.samples}: {exc.strerror}") from None
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = model.to_dict()
    for k, rms in model.residual_rms.items():
        out[str(k)]["rms"] = rms
    _write(json.dumps(out, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def cmd_gen_channels(args) -> int:
    cfg = load_config(args.config, args.seed)
    sets = [channel.trial_channels(cfg, t).to_dict() for t in range(args.trials)]
    _write(json.dumps({"seed": cfg.seed, "channels": sets}), args.out)
    return EXIT_OK


def _load_channel(path: str, trial: int) -> ChannelSet:
    d = _read_json(path, "channel file")
    sets = d["channels"] if isinstance(d, dict) and "channels" in d else [d]
    if not 0 <= trial < len(sets):
        raise UsageError(f"trial {trial} not in channel file ({len(sets)} sets)")
    try:
        return ChannelSet.from_dict(sets[trial])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed channel file {path}: {exc}") from None


def cmd_solve(args) -> int:
    cfg = load_config(args.config, args.seed)
    model = load_model(args.model)
    if not model.covers(cfg.k_min, cfg.k_max):
        raise UsageError(f"model covers depths [{model.k_min}, {model.k_max}], config needs [{cfg.k_min}, {cfg.k_max}]")
    if args.channels:
        H = _load_channel(args.channels, args.trial)
        if (H.n_t, H.n_bit, H.n_sem) != (cfg.n_t, cfg.n_bit, cfg.n_sem):
            raise UsageError("channel file dimensions do not match the config")
    else:
        H = channel.trial_channels(cfg, args.trial)
    report = _solve(H, cfg, model, args.solver, args.depth, SolverOptions(), thread_count())
    _write(dumps(report), args.out)
    if not report.feasible:
        print(f"infeasible: {report.info.get('status', 'qos')}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _sweep_cell(cfg, model, solvers, depth, opts, axis_value, trial):
    # every solver sees the same channel realization
    H = channel.trial_channels(cfg, trial)
    rows = []
    for name in solvers:
        t0 = time.perf_counter()
        try:
            r = _solve(H, cfg, model, name, depth, opts)
            feasible = bool(r.feasible)
            obj = r.objective if feasible else 0.0
            k_opt = r.depth if feasible else ""
            wall = r.wall_time
        except (ValueError, np.linalg.LinAlgError) as exc:
            log.warning("cell %s/%s/%d failed: %s", axis_value, name, trial, exc)
            feasible, obj, k_opt, wall = False, 0.0, "", time.perf_counter() - t0
        rows.append([axis_value, name, trial, obj, int(feasible), wall, k_opt])
    return rows


def cmd_sweep(args) -> int:
    base = load_config(args.config, args.seed)
    model = load_model(args.model)
    grid = _parse_grid(args.grid)
    solvers = _solver_names(args.solver)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    cfgs = []
    for v in grid:
        if args.axis == "qos":
            if v < 0:
                raise UsageError("QoS targets must be non-negative")
            cfgs.append(base.replace(qos=(v,) * base.n_bit))
        else:
            cfgs.append(base.with_snr_db(v))
    opts = SolverOptions()
    cells = [(i, t) for i in range(len(grid)) for t in range(args.trials)]

    def run(cell):
        i, t = cell
        return _sweep_cell(cfgs[i], model, solvers, args.depth, opts, grid[i], t)

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]

    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        out.write(f"# axis={args.axis} trials={args.trials} seed={base.seed} "
                  f"depth={'search' if args.depth is None else args.depth}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        rows = [row for cell in results for row in cell]
        for row in rows:
            w.writerow(row)
        for v in grid:
            for name in solvers:
                sel = [r for r in rows if r[0] == v and r[1] == name]
                obj = np.array([r[3] for r in sel])
                feas = np.array([r[4] for r in sel])
                wall = np.array([r[5] for r in sel])
                w.writerow([v, name, "mean", obj.mean(), feas.mean(), wall.mean(), ""])
                w.writerow([v, name, "std", obj.std(), feas.std(), wall.std(), ""])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semcoex", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit semantic-rate curves from a sample CSV (k,snr_db,score)")
    f.add_argument("samples")
    f.add_argument("--out", default=None)
    f.add_argument("--max-rms", type=float, default=0.05)
    f.set_defaults(func=cmd_fit)

    def common(sp):
        sp.add_argument("--config", default=None, help="SystemConfig JSON (defaults if omitted)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default=None)

    g = sub.add_parser("gen-channels", help="dump seeded channel realizations as JSON")
    common(g)
    g.add_argument("--trials", type=int, default=1)
    g.set_defaults(func=cmd_gen_channels)

    s = sub.add_parser("solve", help="solve one channel realization")
    common(s)
    s.add_argument("--model", default=None, help="rate-model JSON (synthetic table if omitted)")
    s.add_argument("--solver", choices=list(SOLVERS), default="mmfp")
    s.add_argument("--channels", default=None, help="replay a gen-channels file")
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("--depth", type=int, default=None, help="fixed depth (searched if omitted)")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="Monte-Carlo sweep over QoS or SNR")
    common(w)
    w.add_argument("--model", default=None)
    w.add_argument("--axis", choices=["qos", "snr"], required=True)
    w.add_argument("--grid", required=True, help="comma-separated axis values")
    w.add_argument("--trials", type=int, default=100)
    w.add_argument("--solver", default=",".join(SOLVERS), help="comma-separated solver names")
    w.add_argument("--depth", type=int, default=None)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
