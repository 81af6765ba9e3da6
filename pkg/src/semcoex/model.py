"""Domain types, configuration validation and JSON serialization."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class ConfigError(ValueError):
    """Raised when a :class:`SystemConfig` violates one of its invariants."""


def _frozen_array(x, dtype) -> np.ndarray:
    a = np.array(x, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def complex_to_pairs(a: np.ndarray) -> list:
    """Encode a complex array as nested ``[re, im]`` pairs of float64."""
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def pairs_to_complex(p) -> np.ndarray:
    a = np.asarray(p, dtype=np.float64)
    if a.size == 0:
        return np.zeros(a.shape[:-1], dtype=np.complex128)
    return a[..., 0] + 1j * a[..., 1]


@dataclass(frozen=True)
class SystemConfig:
    """Static description of one coexisting downlink scenario.

    Noise powers and QoS targets are per user; scalars are broadcast on
    construction. All powers are linear (watts), rates in bits/s/Hz.
    """

    n_t: int = 16
    n_bit: int = 5
    n_sem: int = 3
    p_total: float = 1.0
    sigma2_bit: tuple = ()
    sigma2_sem: tuple = ()
    frame_len: int = 32768
    qos: tuple = ()
    filters: int = 128
    image_size: int = 128
    k_min: int = 2
    k_max: int = 6
    seed: int = 0

    def __post_init__(self):
        def per_user(value, n, default):
            if value is None or (not np.isscalar(value) and len(value) == 0):
                value = default
            if np.isscalar(value):
                return tuple(float(value) for _ in range(n))
            return tuple(float(v) for v in value)

        object.__setattr__(self, "sigma2_bit", per_user(self.sigma2_bit, self.n_bit, 1.0))
        object.__setattr__(self, "sigma2_sem", per_user(self.sigma2_sem, self.n_sem, 1.0))
        object.__setattr__(self, "qos", per_user(self.qos, self.n_bit, 1.0))

    @property
    def n_users(self) -> int:
        return self.n_bit + self.n_sem

    @property
    def noise(self) -> np.ndarray:
        """Noise powers of all users, bit-users first."""
        return np.array(self.sigma2_bit + self.sigma2_sem, dtype=float)

    @property
    def beta(self) -> np.ndarray:
        return np.array(self.qos, dtype=float)

    @property
    def depths(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def with_snr_db(self, snr_db: float) -> "SystemConfig":
        """Common noise power for all users so that ``p_total / sigma2`` hits ``snr_db``."""
        s2 = self.p_total / 10.0 ** (snr_db / 10.0)
        return self.replace(sigma2_bit=(s2,) * self.n_bit, sigma2_sem=(s2,) * self.n_sem)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("sigma2_bit", "sigma2_sem", "qos"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known - {"snr_db"}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**{k: v for k, v in d.items() if k in known})
        if "snr_db" in d:
            cfg = cfg.with_snr_db(float(d["snr_db"]))
        return cfg


def default_config(**changes) -> SystemConfig:
    """N_t=16, B=5, T=3, SNR 0 dB, beta=1, L=32768, C=I=128, K in [2, 6]."""
    return SystemConfig(**changes)


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise ConfigError."""
    from .semrate import symbols_for_depth

    if int(cfg.n_t) != cfg.n_t or cfg.n_t < 1:
        raise ConfigError("n_t must be a positive integer")
    if cfg.n_bit < 0:
        raise ConfigError("n_bit must be non-negative")
    if cfg.n_sem < 1:
        raise ConfigError("n_sem must be at least 1")
    if not (cfg.p_total > 0 and math.isfinite(cfg.p_total)):
        raise ConfigError("p_total must be positive")
    if len(cfg.sigma2_bit) != cfg.n_bit or len(cfg.sigma2_sem) != cfg.n_sem:
        raise ConfigError("noise power lists must match user counts")
    if any(not (s > 0 and math.isfinite(s)) for s in cfg.sigma2_bit + cfg.sigma2_sem):
        raise ConfigError("noise powers must be positive")
    if len(cfg.qos) != cfg.n_bit:
        raise ConfigError("qos list must have one entry per bit-user")
    if any(not (b >= 0 and math.isfinite(b)) for b in cfg.qos):
        raise ConfigError("qos targets must be non-negative")
    if cfg.frame_len < 1:
        raise ConfigError("frame_len must be positive")
    if cfg.k_min > cfg.k_max:
        raise ConfigError("k_min must not exceed k_max")
    for k in cfg.depths:
        try:
            m = symbols_for_depth(k, cfg.filters, cfg.image_size)
        except ValueError as exc:
            raise ConfigError(f"depth {k}: {exc}") from None
        if m > cfg.frame_len:
            raise ConfigError(f"M_{k} = {m} exceeds frame_len = {cfg.frame_len}")
    return cfg


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Channel vectors of one realization, stored as columns: bit-users first."""

    h_bit: np.ndarray
    h_sem: np.ndarray

    def __post_init__(self):
        hb = np.asarray(self.h_bit, dtype=np.complex128)
        hs = np.asarray(self.h_sem, dtype=np.complex128)
        if hb.size == 0 and hs.ndim == 2:
            hb = hb.reshape(hs.shape[0], 0)
        if hb.ndim != 2 or hs.ndim != 2 or hb.shape[0] != hs.shape[0]:
            raise ValueError("channels must be (n_t, users) matrices with equal n_t")
        object.__setattr__(self, "h_bit", _frozen_array(hb, np.complex128))
        object.__setattr__(self, "h_sem", _frozen_array(hs, np.complex128))

    @classmethod
    def from_matrix(cls, H: np.ndarray, n_bit: int) -> "ChannelSet":
        H = np.asarray(H)
        return cls(H[:, :n_bit], H[:, n_bit:])

    @property
    def n_t(self) -> int:
        return self.h_sem.shape[0]

    @property
    def n_bit(self) -> int:
        return self.h_bit.shape[1]

    @property
    def n_sem(self) -> int:
        return self.h_sem.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        """``(n_t, B+T)`` stacked channel matrix."""
        return np.concatenate([self.h_bit, self.h_sem], axis=1)

    def __eq__(self, other):
        if not isinstance(other, ChannelSet):
            return NotImplemented
        return np.array_equal(self.h_bit, other.h_bit) and np.array_equal(self.h_sem, other.h_sem)

    def to_dict(self) -> dict:
        # one (n_t x 2) matrix per user
        return {
            "bit": [complex_to_pairs(h) for h in self.h_bit.T],
            "sem": [complex_to_pairs(h) for h in self.h_sem.T],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelSet":
        sem = np.array([pairs_to_complex(u) for u in d["sem"]]).T
        bit = [pairs_to_complex(u) for u in d["bit"]]
        bit = np.array(bit).T if bit else np.zeros((sem.shape[0], 0), complex)
        return cls(bit, sem)


@dataclass(frozen=True, eq=False)
class Beamformer:
    """Precoding matrix ``V = [V_B, V_T]`` with one column per user."""

    v_bit: np.ndarray
    v_sem: np.ndarray

    def __post_init__(self):
        vs = np.asarray(self.v_sem, dtype=np.complex128)
        vb = np.asarray(self.v_bit, dtype=np.complex128)
        if vb.size == 0:
            vb = vb.reshape(vs.shape[0], 0)
        object.__setattr__(self, "v_bit", _frozen_array(vb, np.complex128))
        object.__setattr__(self, "v_sem", _frozen_array(vs, np.complex128))
        if not np.isfinite(self.power):
            raise ValueError("beamformer power must be finite")

    @classmethod
    def from_matrix(cls, V: np.ndarray, n_bit: int) -> "Beamformer":
        V = np.asarray(V)
        return cls(V[:, :n_bit], V[:, n_bit:])

    @property
    def matrix(self) -> np.ndarray:
        return np.concatenate([self.v_bit, self.v_sem], axis=1)

    @property
    def power(self) -> float:
        """``Tr(V V^H)``."""
        return float(np.sum(np.abs(self.v_bit) ** 2) + np.sum(np.abs(self.v_sem) ** 2))

    def scaled(self, alpha: float) -> "Beamformer":
        return Beamformer(alpha * self.v_bit, alpha * self.v_sem)

    def __eq__(self, other):
        if not isinstance(other, Beamformer):
            return NotImplemented
        return np.array_equal(self.v_bit, other.v_bit) and np.array_equal(self.v_sem, other.v_sem)

    def to_dict(self) -> dict:
        return {
            "bit": [complex_to_pairs(v) for v in self.v_bit.T],
            "sem": [complex_to_pairs(v) for v in self.v_sem.T],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Beamformer":
        sem = np.array([pairs_to_complex(u) for u in d["sem"]]).T
        bit = [pairs_to_complex(u) for u in d["bit"]]
        bit = np.array(bit).T if bit else np.zeros((sem.shape[0], 0), complex)
        return cls(bit, sem)


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and iteration caps shared by all solvers."""

    tol_outer: float = 1e-4
    max_outer: int = 100
    xi: float = 1e-5
    max_inner: int = 200
    damping: bool = True
    lambda_init: float = 0.01
    lambda0: float = 0.01  # uniform multiplier of the low-complexity variant
    tol_qos: float = 1e-3
    tol_pow_rel: float = 1e-6
    wmmse_tol: float = 1e-5
    wmmse_max_iter: int = 200
    lambda_blowup: float = 1e6
    max_recover: int = 10  # re-anchoring attempts while no feasible iterate exists

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverOptions":
        return cls(**d)


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Result of one beamforming solve at a fixed (or searched) depth."""

    beamformer: Beamformer
    depth: int
    objective: float
    per_user_sinr: np.ndarray  # sem-users, then bit-users (shared), then bit-users (exclusive)
    per_user_rate: np.ndarray
    qos_slack: np.ndarray
    iterations: tuple = (0, 0)
    wall_time: float = 0.0
    converged: bool = True
    feasible: bool = True
    solver: str = ""
    trace: tuple = ()
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("per_user_sinr", "per_user_rate", "qos_slack"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), np.float64))
        object.__setattr__(self, "iterations", tuple(int(i) for i in self.iterations))
        object.__setattr__(self, "trace", tuple(float(t) for t in self.trace))

    def __eq__(self, other):
        if not isinstance(other, SolveReport):
            return NotImplemented
        return (
            self.beamformer == other.beamformer
            and self.depth == other.depth
            and self.objective == other.objective
            and np.array_equal(self.per_user_sinr, other.per_user_sinr)
            and np.array_equal(self.per_user_rate, other.per_user_rate)
            and np.array_equal(self.qos_slack, other.qos_slack)
            and self.iterations == other.iterations
            and self.wall_time == other.wall_time
            and self.converged == other.converged
            and self.feasible == other.feasible
            and self.solver == other.solver
            and self.trace == other.trace
            and self.info == other.info
        )

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "depth": int(self.depth),
            "objective": float(self.objective),
            "feasible": bool(self.feasible),
            "converged": bool(self.converged),
            "iterations": list(self.iterations),
            "wall_time": float(self.wall_time),
            "per_user_sinr": self.per_user_sinr.tolist(),
            "per_user_rate": self.per_user_rate.tolist(),
            "qos_slack": self.qos_slack.tolist(),
            "trace": list(self.trace),
            "info": self.info,
            "beamformer": self.beamformer.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        return cls(
            beamformer=Beamformer.from_dict(d["beamformer"]),
            depth=int(d["depth"]),
            objective=float(d["objective"]),
            per_user_sinr=np.array(d["per_user_sinr"], dtype=float),
            per_user_rate=np.array(d["per_user_rate"], dtype=float),
            qos_slack=np.array(d["qos_slack"], dtype=float),
            iterations=tuple(d["iterations"]),
            wall_time=float(d["wall_time"]),
            converged=bool(d["converged"]),
            feasible=bool(d["feasible"]),
            solver=d.get("solver", ""),
            trace=tuple(d.get("trace", ())),
            info=d.get("info", {}),
        )


def dumps(obj: Any) -> str:
    """Deterministic JSON for any domain type exposing ``to_dict``."""
    return json.dumps(obj.to_dict(), sort_keys=True)


def loads(cls, text: str):
    return cls.from_dict(json.loads(text))
