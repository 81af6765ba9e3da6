"""Classical precoding directions followed by the same power re-allocation."""
from __future__ import annotations

import time

import numpy as np

from .lpmmfp import DirectionSet, solve_with_directions
from .model import ChannelSet, SolveReport, SolverOptions, SystemConfig
from .semrate import SemanticRateModel

BASELINES = ("zf-pc", "mrt-pc", "wmmse-pc")


def mrt_directions(H: ChannelSet) -> DirectionSet:
    return DirectionSet(H.matrix, H.n_bit)


def zf_directions(H: ChannelSet) -> DirectionSet:
    """Normalized columns of the right pseudo-inverse of the stacked channels."""
    Hm = H.matrix
    n_t, U = Hm.shape
    if U > n_t:
        raise ValueError(f"zero-forcing needs users <= antennas ({U} > {n_t})")
    if np.linalg.matrix_rank(Hm) < U:
        raise ValueError("zero-forcing needs linearly independent channels")
    return DirectionSet(np.linalg.pinv(Hm.conj().T), H.n_bit)


def sum_rate(Hm: np.ndarray, V: np.ndarray, noise: np.ndarray) -> float:
    P = np.abs(Hm.conj().T @ V) ** 2
    sig = np.diag(P)
    return float(np.sum(np.log2(1 + sig / (P.sum(axis=1) - sig + noise))))


def _power_multiplier(A: np.ndarray, B: np.ndarray, p_total: float) -> float:
    """Smallest ``mu >= 0`` with ``||(A + mu I)^{-1} B||_F^2 <= p_total``."""
    lam, Q = np.linalg.eigh(A)
    lam = np.maximum(lam, 0.0)
    c = np.sum(np.abs(Q.conj().T @ B) ** 2, axis=1)

    def power(mu):
        return float(np.sum(c / (lam + mu) ** 2))

    if lam.min() > 1e-12 * max(lam.max(), 1.0) and power(0.0) <= p_total:
        return 0.0
    lo, hi = 0.0, max(1e-12, np.sqrt(c.sum() / p_total))
    while power(hi) > p_total:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if power(mid) > p_total:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return hi


def wmmse(H: ChannelSet, cfg: SystemConfig, tol: float = 1e-5, max_iter: int = 200):
    """Unit-weight sum-rate WMMSE over all users; returns ``(V, sum_rate_trace)``."""
    Hm = H.matrix
    noise = cfg.noise
    U = Hm.shape[1]
    V = Hm / np.linalg.norm(Hm, axis=0) * np.sqrt(cfg.p_total / U)
    trace = [sum_rate(Hm, V, noise)]
    for _ in range(max_iter):
        X = Hm.conj().T @ V
        total = np.sum(np.abs(X) ** 2, axis=1) + noise
        own = np.diag(X)
        g = own / total  # conjugate of the MMSE receive coefficient
        w = 1.0 / (1.0 - np.abs(own) ** 2 / total)
        A = (Hm * (w * np.abs(g) ** 2)) @ Hm.conj().T
        B = Hm * (w * g)
        mu = _power_multiplier(A, B, cfg.p_total)
        V = np.linalg.solve(A + mu * np.eye(Hm.shape[0]), B)
        trace.append(sum_rate(Hm, V, noise))
        if abs(trace[-1] - trace[-2]) < tol:
            break
    return V, trace


def wmmse_directions(H: ChannelSet, cfg: SystemConfig, tol: float = 1e-5, max_iter: int = 200) -> DirectionSet:
    V, _ = wmmse(H, cfg, tol, max_iter)
    return DirectionSet(V, H.n_bit)


def solve_baseline(name: str, H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, k: int,
                   opts: SolverOptions | None = None) -> SolveReport:
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    if name == "zf-pc":
        dirs = zf_directions(H)
    elif name == "mrt-pc":
        dirs = mrt_directions(H)
    elif name == "wmmse-pc":
        dirs = wmmse_directions(H, cfg, opts.wmmse_tol, opts.wmmse_max_iter)
    else:
        raise ValueError(f"unknown baseline {name!r}; expected one of {', '.join(BASELINES)}")
    return solve_with_directions(dirs, H, cfg, model, k, opts, name, t0)
