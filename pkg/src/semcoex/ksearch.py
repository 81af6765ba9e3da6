"""Joint beamforming and downsampling-depth selection by exhaustive search."""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .baselines import solve_baseline
from .lpmmfp import solve_lp
from .mmfp import solve_p2
from .model import ChannelSet, SolveReport, SolverOptions, SystemConfig
from .semrate import SemanticRateModel

Solver = Callable[[ChannelSet, SystemConfig, SemanticRateModel, int, SolverOptions], SolveReport]

SOLVERS: dict[str, Solver] = {
    "mmfp": solve_p2,
    "lp-mmfp": solve_lp,
    "zf-pc": lambda H, cfg, model, k, opts: solve_baseline("zf-pc", H, cfg, model, k, opts),
    "mrt-pc": lambda H, cfg, model, k, opts: solve_baseline("mrt-pc", H, cfg, model, k, opts),
    "wmmse-pc": lambda H, cfg, model, k, opts: solve_baseline("wmmse-pc", H, cfg, model, k, opts),
}


def get_solver(name: str) -> Solver:
    try:
        return SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; expected one of {', '.join(SOLVERS)}") from None


def solve_fixed_k(H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, solver: str, k: int,
                  opts: SolverOptions | None = None) -> SolveReport:
    return get_solver(solver)(H, cfg, model, k, opts or SolverOptions())


def solve_p1(H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, solver: str = "mmfp",
             opts: SolverOptions | None = None, workers: int = 1) -> SolveReport:
    """Best depth in ``[cfg.k_min, cfg.k_max]`` and its beamformer.

    Infeasible depths are skipped; ties go to the smaller depth. When no
    depth is feasible the smallest depth's (infeasible) report is returned.
    """
    if not model.covers(cfg.k_min, cfg.k_max):
        raise ValueError(f"rate model covers [{model.k_min}, {model.k_max}], "
                         f"config needs [{cfg.k_min}, {cfg.k_max}]")
    fn = get_solver(solver)
    opts = opts or SolverOptions()
    depths = list(cfg.depths)
    if workers > 1 and len(depths) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda k: fn(H, cfg, model, k, opts), depths))
    else:
        reports = [fn(H, cfg, model, k, opts) for k in depths]
    best = None
    for r in reports:
        if r.feasible and (best is None or r.objective > best.objective):
            best = r
    per_k = {str(r.depth): (r.objective if r.feasible else None) for r in reports}
    chosen = best if best is not None else reports[0]
    info = dict(chosen.info, k_objectives=per_k, k_opt=chosen.depth if best is not None else None)
    return dataclasses.replace(chosen, info=info, wall_time=sum(r.wall_time for r in reports))


def solve_random_k(H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, solver: str,
                   rng: np.random.Generator, opts: SolverOptions | None = None) -> SolveReport:
    """Depth drawn uniformly from ``[cfg.k_min, cfg.k_max]``."""
    k = int(rng.integers(cfg.k_min, cfg.k_max + 1))
    return solve_fixed_k(H, cfg, model, solver, k, opts)
