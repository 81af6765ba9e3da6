"""Clustered Saleh-Valenzuela MISO channels seen from a uniform linear array."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelSet, SystemConfig

DEFAULT_PATHS = 10


@dataclass(frozen=True, eq=False)
class PathRealization:
    gains: np.ndarray
    aods: np.ndarray

    def __post_init__(self):
        if len(self.gains) != len(self.aods) or len(self.gains) < 1:
            raise ValueError("gains and aods must have equal, non-zero length")


def steering_vector(theta: float, n_t: int) -> np.ndarray:
    """ULA response ``[1, e^{-j pi sin(theta)}, ..., e^{-j pi (n_t-1) sin(theta)}]``."""
    if n_t < 1:
        raise ValueError("n_t must be >= 1")
    return np.exp(-1j * np.pi * np.arange(n_t) * np.sin(theta))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator keyed on ``(seed, *stream)``; independent streams per trial."""
    return np.random.default_rng([int(seed), *map(int, stream)])


def sample_paths(rng: np.random.Generator, l_p: int) -> PathRealization:
    # draw order: all gains (re, im interleaved per path), then all angles
    g = rng.normal(scale=np.sqrt(0.5), size=(l_p, 2))
    aods = rng.uniform(0.0, 2 * np.pi, size=l_p)
    return PathRealization(g[:, 0] + 1j * g[:, 1], aods)


def sample_channel(rng: np.random.Generator, n_t: int, l_p: int = DEFAULT_PATHS) -> np.ndarray:
    """One channel ``h = L_p^{-1/2} sum_l delta_l a(theta_l)``.

    A zero vector has probability zero; if it shows up anyway it is redrawn.
    """
    if l_p < 1:
        raise ValueError("l_p must be >= 1")
    while True:
        paths = sample_paths(rng, l_p)
        steer = np.exp(-1j * np.pi * np.outer(np.arange(n_t), np.sin(paths.aods)))
        h = steer @ paths.gains / np.sqrt(l_p)
        if np.any(h != 0):
            return h


def sample_channel_set(rng: np.random.Generator, cfg: SystemConfig, l_p: int = DEFAULT_PATHS) -> ChannelSet:
    hb = [sample_channel(rng, cfg.n_t, l_p) for _ in range(cfg.n_bit)]
    hs = [sample_channel(rng, cfg.n_t, l_p) for _ in range(cfg.n_sem)]
    hb = np.array(hb).T if hb else np.zeros((cfg.n_t, 0), complex)
    return ChannelSet(hb, np.array(hs).T)


def trial_channels(cfg: SystemConfig, trial: int, l_p: int = DEFAULT_PATHS) -> ChannelSet:
    """Channel set of Monte-Carlo trial ``trial`` under ``cfg.seed``."""
    return sample_channel_set(make_rng(cfg.seed, trial), cfg, l_p)
