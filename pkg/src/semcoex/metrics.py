"""SINRs, bit rates, the sum semantic-rate objective and feasibility checks.

``regularized=True`` selects the scale-invariant form in which each noise
power is multiplied by ``Tr(V V^H) / P_T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Beamformer, ChannelSet, SystemConfig
from .semrate import SemanticRateModel, rate_at, symbols_for_depth


@dataclass(frozen=True, eq=False)
class SinrBundle:
    sem: np.ndarray
    bit_shared: np.ndarray
    bit_exclusive: np.ndarray
    regularized: bool


@dataclass(frozen=True, eq=False)
class Feasibility:
    feasible: bool
    qos_slack: np.ndarray
    power_slack: float
    rates: np.ndarray


def gain_matrix(H: np.ndarray, V: np.ndarray) -> np.ndarray:
    """``P[u, j] = |h_u^H v_j|^2``."""
    return np.abs(H.conj().T @ V) ** 2


def sinr_from_gains(P: np.ndarray, noise: np.ndarray, n_bit: int, scale: float = 1.0):
    """SINRs of all users from a gain matrix.

    Returns ``(sem, bit_shared, bit_exclusive)``; ``scale`` multiplies the noise.
    A user with zero signal and zero denominator gets SINR 0.
    """
    sig = np.diag(P)
    total = P.sum(axis=1)
    bit_total = P[:, :n_bit].sum(axis=1)
    den_all = total - sig + scale * noise
    den_bit = bit_total[:n_bit] - sig[:n_bit] + scale * noise[:n_bit]
    with np.errstate(divide="ignore", invalid="ignore"):
        all_ = np.where(sig > 0, sig / den_all, 0.0)
        excl = np.where(sig[:n_bit] > 0, sig[:n_bit] / den_bit, 0.0)
    return all_[n_bit:], all_[:n_bit], excl


def sinr_all(V: Beamformer, H: ChannelSet, cfg: SystemConfig, regularized: bool = False) -> SinrBundle:
    Vm = V.matrix
    if Vm.shape != (H.n_t, H.n_bit + H.n_sem) or H.n_bit != cfg.n_bit:
        raise ValueError("beamformer, channel and config dimensions disagree")
    scale = V.power / cfg.p_total if regularized else 1.0
    sem, b1, b2 = sinr_from_gains(gain_matrix(H.matrix, Vm), cfg.noise, cfg.n_bit, scale)
    return SinrBundle(sem, b1, b2, regularized)


def mixed_rate(g1, g2, m_k: int, frame_len: int):
    """Frame-normalized bit rate mixing the shared and exclusive periods."""
    w1 = m_k / frame_len
    return w1 * np.log2(1 + np.asarray(g1)) + (1 - w1) * np.log2(1 + np.asarray(g2))


def bit_rate(V: Beamformer, H: ChannelSet, cfg: SystemConfig, k: int, regularized: bool = False) -> np.ndarray:
    m_k = symbols_for_depth(k, cfg.filters, cfg.image_size)
    if m_k > cfg.frame_len:
        raise ValueError("M_K exceeds the frame length")
    s = sinr_all(V, H, cfg, regularized)
    return mixed_rate(s.bit_shared, s.bit_exclusive, m_k, cfg.frame_len)


def objective_p1(V: Beamformer, H: ChannelSet, cfg: SystemConfig, k: int,
                 model: SemanticRateModel, regularized: bool = False) -> float:
    """Sum of semantic scores over sem-users."""
    s = sinr_all(V, H, cfg, regularized)
    return float(np.sum(rate_at(model, k, s.sem)))


def check_feasible(V: Beamformer, H: ChannelSet, cfg: SystemConfig, k: int,
                   tol_qos: float = 1e-3, tol_pow: float | None = None) -> Feasibility:
    if tol_pow is None:
        tol_pow = 1e-6 * cfg.p_total
    rates = bit_rate(V, H, cfg, k)
    slack = rates - cfg.beta
    power_slack = cfg.p_total - V.power
    ok = bool(np.all(slack >= -tol_qos) and power_slack >= -tol_pow)
    return Feasibility(ok, slack, power_slack, rates)
