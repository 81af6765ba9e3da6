"""Low-complexity variant: one-shot directions, then power allocation.

Directions come from a single evaluation of the semi-closed-form beamformer
with a uniform multiplier and MRT-derived auxiliaries. Powers on fixed
directions are then optimized by the same MM-FP loop run over scalar
amplitudes.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .mmfp import DiagonalSpace, Problem, make_report
from .model import ChannelSet, SolveReport, SolverOptions, SystemConfig
from .semrate import SemanticRateModel, symbols_for_depth


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Unit-norm beamforming directions, one column per user, bit-users first."""

    vectors: np.ndarray
    n_bit: int

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.complex128)
        norms = np.linalg.norm(v, axis=0)
        if np.any(norms == 0) or not np.all(np.isfinite(norms)):
            raise ValueError("directions must be finite and non-zero")
        v /= norms
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def n_users(self) -> int:
        return self.vectors.shape[1]

    def aligned(self, H: np.ndarray) -> "DirectionSet":
        """Same directions with phases rotated so that ``h_u^H v_u`` is real and non-negative."""
        own = np.sum(H.conj() * self.vectors, axis=0)
        phase = np.where(np.abs(own) > 0, np.exp(-1j * np.angle(own)), 1.0)
        return DirectionSet(self.vectors * phase, self.n_bit)


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    p_bit: np.ndarray
    p_sem: np.ndarray
    feasible: bool = True
    info: dict = field(default_factory=dict)

    @property
    def powers(self) -> np.ndarray:
        return np.concatenate([self.p_bit, self.p_sem])


def lp_directions(H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, k: int,
                  lambda0: float = 0.01) -> DirectionSet:
    if lambda0 < 0:
        raise ValueError("lambda0 must be non-negative")
    prob = Problem.from_channels(H, cfg, model, k)
    Hm = H.matrix
    # auxiliaries are evaluated at unit-norm MRT vectors and never refreshed
    V = Hm / np.linalg.norm(Hm, axis=0)
    st = prob.update_sinr_aux(V)
    st = prob.update_ratio_aux(V, st)
    lam = np.where(prob.active, lambda0, 0.0)
    a0, w_a, w_c, omega, _ = prob._weights(lam, st)
    dirs, _ = prob.space.solve(a0, w_a, w_c, omega, cfg.n_bit)
    return DirectionSet(dirs, cfg.n_bit)


def bit_power_control(gains: np.ndarray, noise: np.ndarray, targets: np.ndarray, n_bit: int) -> np.ndarray | None:
    """Minimum bit-user powers meeting SINR ``targets`` with sem-users silent.

    ``gains[u, j] = |h_u^H v_j|^2`` over bit-users. Returns None when the
    targets cannot be met at any power.
    """
    if n_bit == 0:
        return np.zeros(0)
    G = gains[:n_bit, :n_bit]
    own = np.diag(G)
    if np.any(own <= 0):
        return None if np.any(targets > 0) else np.zeros(n_bit)
    D = targets / own
    F = G - np.diag(own)
    M = np.eye(n_bit) - D[:, None] * F
    if np.max(np.abs(np.linalg.eigvals(D[:, None] * F))) >= 1:
        return None
    p = np.linalg.solve(M, D * noise[:n_bit])
    return p if np.all(p >= -1e-12) else None


def allocate_power(directions: DirectionSet, H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel,
                   k: int, opts: SolverOptions | None = None) -> PowerAllocation:
    """Sum semantic rate over powers on fixed directions, subject to QoS and the budget."""
    opts = opts or SolverOptions()
    Hm = H.matrix
    dirs = directions.aligned(Hm)
    cross = Hm.conj().T @ dirs.vectors
    m_k = symbols_for_depth(k, cfg.filters, cfg.image_size)
    prob = Problem(DiagonalSpace(cross), cfg.noise, cfg.n_bit, cfg.p_total, cfg.beta,
                   m_k, cfg.frame_len, model, k, opts)
    prob.warm_start = True
    prob.root_search = True
    nb = cfg.n_bit
    # with sem-users silent both periods see the same SINR, so the QoS
    # target is a plain SINR target; this decides feasibility exactly
    floor = bit_power_control(np.abs(cross) ** 2, cfg.noise, 2.0 ** cfg.beta - 1, nb)
    if floor is None or floor.sum() > cfg.p_total * (1 + opts.tol_pow_rel):
        return PowerAllocation(np.zeros(nb), np.zeros(cfg.n_sem), False, {"status": "qos_infeasible"})
    q0 = np.full(prob.space.n_users, math.sqrt(cfg.p_total / prob.space.n_users), dtype=complex)
    q, info = prob.run(q0)
    if not info["feasible"]:
        # the minimum-power bit allocation is feasible by construction, and
        # scaling it up with sem-users silent only raises every SINR
        p = np.concatenate([floor, np.zeros(cfg.n_sem)])
        if p.sum() == 0:
            p[:nb] = 1.0
        info["status"] = "fallback_bit_only"
        info["feasible"] = True
    else:
        p = np.abs(q) ** 2
    p *= cfg.p_total / p.sum()
    return PowerAllocation(p[:nb], p[nb:], True, info)


def beamformer_from_powers(directions: DirectionSet, alloc: PowerAllocation) -> np.ndarray:
    return directions.vectors * np.sqrt(alloc.powers)


def solve_with_directions(directions: DirectionSet, H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel,
                          k: int, opts: SolverOptions, solver: str, t0: float) -> SolveReport:
    alloc = allocate_power(directions, H, cfg, model, k, opts)
    dirs = directions.aligned(H.matrix)
    if alloc.feasible:
        V = beamformer_from_powers(dirs, alloc)
    else:
        # report at equal power so the metrics are still meaningful
        V = dirs.vectors * math.sqrt(cfg.p_total / dirs.n_users)
    wall = time.perf_counter() - t0
    info = dict(alloc.info)
    trace = info.pop("trace", ())
    return make_report(V, H, cfg, model, k, opts, solver=solver, wall_time=wall,
                       iterations=(info.get("outer", 0), info.get("inner", 0)),
                       converged=info.get("converged", False), feasible_hint=alloc.feasible,
                       trace=trace, info=info)


def solve_lp(H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, k: int,
             opts: SolverOptions | None = None) -> SolveReport:
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    dirs = lp_directions(H, cfg, model, k, opts.lambda0)
    return solve_with_directions(dirs, H, cfg, model, k, opts, "lp-mmfp", t0)


__all__ = [
    "DirectionSet",
    "PowerAllocation",
    "allocate_power",
    "bit_power_control",
    "lp_directions",
    "solve_lp",
]
