"""Semantic-rate model and its minorizing surrogate.

The score of a sem-user decoded at downsampling depth ``K`` and SINR ``g`` is
the generalized logistic

    eps(K, g) = a_K + d_K / (c_K + g**(-e_K)),

which is S-shaped in dB. ``surrogate_j`` upper-bounds ``g**(-e)`` by a
rational function that is tight at an anchor ``g0``; plugging it in gives a
lower bound ``zeta`` of ``eps`` that reads as ``D + E*g/(F*g + G)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import optimize


class PoleError(ArithmeticError):
    """The e > 1 surrogate was evaluated at or beyond its pole."""


class FitError(ValueError):
    pass


def symbols_for_depth(k: int, filters: int, image_size: int) -> int:
    """Latent symbol count ``M_K = C * (I / 2**(K+1))**2``."""
    if k < 0:
        raise ValueError("depth must be non-negative")
    side, rem = divmod(int(image_size), 2 ** (k + 1))
    if rem:
        raise ValueError(f"image size {image_size} is not divisible by 2**{k + 1}")
    return int(filters) * side * side


@dataclass(frozen=True)
class SemanticRateModel:
    """Per-depth generalized-logistic parameters ``K -> (a, c, d, e)``."""

    params: Mapping[int, tuple]
    residual_rms: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        p = {int(k): tuple(float(x) for x in v) for k, v in self.params.items()}
        if not p:
            raise ValueError("empty rate model")
        ks = sorted(p)
        if ks != list(range(ks[0], ks[-1] + 1)):
            raise ValueError("depth keys must be contiguous")
        for k, (a, c, d, e) in p.items():
            if not (c > 0 and d > 0 and e > 0):
                raise ValueError(f"depth {k}: c, d, e must be positive")
        object.__setattr__(self, "params", dict(sorted(p.items())))
        object.__setattr__(self, "residual_rms", {int(k): float(v) for k, v in self.residual_rms.items()})

    @property
    def k_min(self) -> int:
        return min(self.params)

    @property
    def k_max(self) -> int:
        return max(self.params)

    def covers(self, k_min: int, k_max: int) -> bool:
        return self.k_min <= k_min and k_max <= self.k_max

    def __getitem__(self, k: int) -> tuple:
        try:
            return self.params[int(k)]
        except KeyError:
            raise KeyError(f"depth {k} outside model range [{self.k_min}, {self.k_max}]") from None

    def ceiling(self, k: int) -> float:
        a, c, d, _ = self[k]
        return a + d / c

    def to_dict(self) -> dict:
        return {str(k): dict(zip("acde", v)) for k, v in self.params.items()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SemanticRateModel":
        return cls({int(k): (v["a"], v["c"], v["d"], v["e"]) for k, v in d.items()})

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "SemanticRateModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def logistic(gamma, a, c, d, e):
    gamma = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return a + d / (c + gamma ** (-e))


def rate(model: SemanticRateModel, k: int, gamma):
    """Semantic score at linear SINR ``gamma`` (> 0; arrays accepted)."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g <= 0) or np.any(np.isnan(g)):
        raise ValueError("SINR must be positive")
    out = logistic(g, *model[k])
    return float(out) if out.ndim == 0 else out


def rate_at(model: SemanticRateModel, k: int, gamma):
    """Like :func:`rate` but extended continuously to ``gamma = 0`` (value ``a_K``)."""
    a, c, d, e = model[k]
    g = np.asarray(gamma, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(g > 0, a + d / (c + np.where(g > 0, g, 1.0) ** (-e)), a)
    return float(out) if out.ndim == 0 else out


def surrogate_j(gamma, gamma0, e):
    """Upper bound of ``gamma**(-e)`` tight at ``gamma0``.

    For ``e <= 1`` this is the tangent of the concave ``x**e`` at ``x = 1/gamma0``;
    for ``e > 1`` it is the reciprocal of the tangent of the convex ``gamma**e``,
    which has a pole where ``gamma0 + e*(gamma - gamma0)`` vanishes.
    """
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0) or gamma0 <= 0 or e <= 0:
        raise ValueError("gamma, gamma0 and e must be positive")
    if e <= 1:
        out = (e * gamma0 + (1 - e) * gamma) / (gamma0 ** e * gamma)
    else:
        lin = gamma0 + e * (gamma - gamma0)
        if np.any(lin <= 0):
            raise PoleError("surrogate evaluated beyond its pole; re-anchor first")
        out = 1.0 / (gamma0 ** (e - 1) * lin)
    return float(out) if out.ndim == 0 else out


def surrogate_value(model: SemanticRateModel, k: int, gamma, gamma0):
    """``zeta_K(gamma, gamma0) = a + d / (c + J)``, a lower bound of ``rate``."""
    a, c, d, e = model[k]
    return a + d / (c + surrogate_j(gamma, gamma0, e))


@dataclass(frozen=True)
class SurrogateCoeffs:
    d_coef: float
    e_coef: float
    f_coef: float
    g_coef: float
    anchor: float

    def value(self, gamma):
        return self.d_coef + self.e_coef * gamma / (self.f_coef * gamma + self.g_coef)


def surrogate_coeffs(model: SemanticRateModel, k: int, gamma0: float) -> SurrogateCoeffs:
    """Coefficients with ``zeta = D + E*g / (F*g + G)``.

    For ``e > 1`` the returned ``G`` is non-positive once
    ``c*(e-1)*gamma0**e >= 1``; callers that need ``G > 0`` should cap the
    anchor with :func:`max_positive_anchor`.
    """
    if gamma0 <= 0:
        raise ValueError("anchor must be positive")
    a, c, d, e = model[k]
    if e <= 1:
        return SurrogateCoeffs(a, d, c + (1 - e) * gamma0 ** (-e), e * gamma0 ** (1 - e), gamma0)
    g = c * (1 - e) * gamma0 ** e + 1
    return SurrogateCoeffs(
        a + d * (1 - e) * gamma0 ** e / g,
        d * e * gamma0 ** (e - 1) / g,
        c * e * gamma0 ** (e - 1),
        g,
        gamma0,
    )


def max_positive_anchor(model: SemanticRateModel, k: int, g_floor: float) -> float:
    """Largest anchor whose ``G`` coefficient is at least ``g_floor`` (``inf`` if e <= 1)."""
    _, c, _, e = model[k]
    if e <= 1:
        return math.inf
    return ((1 - g_floor) / (c * (e - 1))) ** (1 / e)


# --- curve fitting ---------------------------------------------------------

MIN_SAMPLES = 8
MIN_SPAN_DB = 20.0


def _curve(theta, snr_db):
    a, lc, ld, le = theta
    c, d, e = np.exp(lc), np.exp(ld), np.exp(le)
    # gamma**(-e) with gamma = 10**(dB/10); overflow just means a flat tail
    with np.errstate(over="ignore"):
        return a + d / (c + np.exp(-e * np.log(10.0) * snr_db / 10.0))


def fit_depth(snr_db, score) -> tuple:
    """Least-squares fit of one depth; returns ``((a, c, d, e), rms)``."""
    x = np.asarray(snr_db, dtype=float)
    y = np.asarray(score, dtype=float)
    lo, hi = float(y.min()), float(y.max())
    theta0 = np.array([lo, 0.0, np.log(max(hi - lo, 1e-6)), 0.0])

    def sse(theta):
        with np.errstate(over="ignore", invalid="ignore"):
            r = _curve(theta, x) - y
        v = float(r @ r)
        return v if np.isfinite(v) else 1e300

    simplex = optimize.minimize(sse, theta0, method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 20000, "maxfev": 40000})
    polish = optimize.least_squares(lambda t: _curve(t, x) - y, simplex.x, method="lm",
                                    xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    theta = polish.x if sse(polish.x) <= simplex.fun else simplex.x
    a, lc, ld, le = theta
    rms = math.sqrt(sse(theta) / len(x))
    return (float(a), float(np.exp(lc)), float(np.exp(ld)), float(np.exp(le))), rms


def fit(samples: Iterable[tuple], max_rms: float = 0.05) -> SemanticRateModel:
    """Fit the generalized logistic per depth from ``(k, snr_db, score)`` rows.

    Raises FitError when a depth has fewer than 8 samples, spans less than
    20 dB, or its residual RMS exceeds ``max_rms``.
    """
    by_k: dict[int, list] = {}
    for k, db, s in samples:
        by_k.setdefault(int(k), []).append((float(db), float(s)))
    if not by_k:
        raise FitError("no samples")
    params, rms = {}, {}
    for k, rows in sorted(by_k.items()):
        if len(rows) < MIN_SAMPLES:
            raise FitError(f"depth {k}: {len(rows)} samples, need at least {MIN_SAMPLES}")
        db, s = map(np.array, zip(*rows))
        if db.max() - db.min() < MIN_SPAN_DB:
            raise FitError(f"depth {k}: samples span {db.max() - db.min():.1f} dB, need {MIN_SPAN_DB:.0f}")
        params[k], rms[k] = fit_depth(db, s)
        if not rms[k] <= max_rms:
            raise FitError(f"depth {k}: fit did not converge (residual RMS {rms[k]:.4g} > {max_rms})")
    return SemanticRateModel(params, rms)


SAMPLE_HEADER = ["k", "snr_db", "score"]


def read_samples_csv(path) -> list:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise FitError("empty sample file")
        if [h.strip() for h in header] != SAMPLE_HEADER:
            raise FitError(f"bad header {header!r}, expected {','.join(SAMPLE_HEADER)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append((int(row[0]), float(row[1]), float(row[2])))
            except (ValueError, IndexError):
                raise FitError(f"line {lineno}: cannot parse {row!r}") from None
    return rows


def write_samples_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(SAMPLE_HEADER)
        for k, db, s in rows:
            w.writerow([int(k), repr(float(db)), repr(float(s))])


def synthetic_samples(params: Mapping[int, tuple], snr_db, noise: float = 0.0, rng=None) -> list:
    """Sample tables drawn from known parameters, optionally with Gaussian noise."""
    rng = rng if rng is not None else np.random.default_rng(0)
    rows = []
    for k, p in sorted(params.items()):
        for db in snr_db:
            s = float(logistic(10.0 ** (db / 10.0), *p))
            if noise:
                s += float(rng.normal(scale=noise))
            rows.append((k, float(db), s))
    return rows


def default_model() -> SemanticRateModel:
    from .defaults import DEFAULT_RATE_TABLE

    return SemanticRateModel(DEFAULT_RATE_TABLE)
