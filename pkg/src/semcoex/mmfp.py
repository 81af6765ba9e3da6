"""MM-FP beamforming for a fixed downsampling depth.

The sum semantic rate is minorized at the current SINRs, the QoS rates are
lower-bounded with the Lagrangian-dual and quadratic transforms, and the
resulting QCQP is solved in semi-closed form

    v_b = rho_b A^{-1} h_b,      v_t = varsigma_t B_t^{-1} h_t,

with the multipliers found by a fixed-point iteration that makes every QoS
constraint tight. Rate transforms work in nats; QoS targets are converted
from bits on the way in.
"""
from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .metrics import check_feasible, sinr_all, sinr_from_gains
from .model import Beamformer, ChannelSet, SolveReport, SolverOptions, SystemConfig
from .semrate import SemanticRateModel, max_positive_anchor, rate_at, symbols_for_depth

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
# smallest G coefficient accepted for an e > 1 anchor before it is capped
G_FLOOR = 1e-2


class DegenerateRegularizer(np.linalg.LinAlgError):
    pass


# --- linear-algebra back ends ---------------------------------------------

class FullSpace:
    """Beamformers are ``(n_t, U)`` complex matrices, channels the columns of ``H``."""

    def __init__(self, H: np.ndarray):
        self.H = np.asarray(H, dtype=np.complex128)
        self.n_t, self.n_users = self.H.shape

    def cross(self, V):
        return self.H.conj().T @ V

    def trace(self, V) -> float:
        return float(np.sum(np.abs(V) ** 2))

    def _factor(self, a0, w):
        M = (self.H * w) @ self.H.conj().T
        M[np.diag_indices_from(M)] += a0
        try:
            return linalg.cho_factor(M, lower=True, check_finite=False)
        except linalg.LinAlgError:
            raise DegenerateRegularizer("degenerate regularizer") from None

    def solve(self, a0, w_a, w_c, omega, n_bit):
        """Columns ``A^{-1} h_b`` and ``B_t^{-1} h_t`` plus ``h_b^H A^{-1} h_b``.

        ``B_t = C - omega_t h_t h_t^H`` is never formed: one Cholesky
        factorization of ``C`` and a rank-one Sherman-Morrison correction per
        sem-user.
        """
        hb, hs = self.H[:, :n_bit], self.H[:, n_bit:]
        out = np.empty_like(self.H)
        quad = np.zeros(n_bit)
        if n_bit:
            fa = self._factor(a0, w_a)
            out[:, :n_bit] = linalg.cho_solve(fa, hb, check_finite=False)
            quad = np.real(np.sum(hb.conj() * out[:, :n_bit], axis=0))
        fc = self._factor(a0, w_c)
        z = linalg.cho_solve(fc, hs, check_finite=False)
        q = np.real(np.sum(hs.conj() * z, axis=0))
        out[:, n_bit:] = z / (1.0 - omega * q)
        return out, quad

    def direct_solve(self, a0, w_a, w_c, omega, n_bit):
        """Reference path that forms every ``B_t`` explicitly (for testing)."""
        hb, hs = self.H[:, :n_bit], self.H[:, n_bit:]
        eye = np.eye(self.n_t)
        A = a0 * eye + (self.H * w_a) @ self.H.conj().T
        C = a0 * eye + (self.H * w_c) @ self.H.conj().T
        out = np.empty_like(self.H)
        if n_bit:
            out[:, :n_bit] = np.linalg.solve(A, hb)
        for t in range(hs.shape[1]):
            Bt = C - omega[t] * np.outer(hs[:, t], hs[:, t].conj())
            out[:, n_bit + t] = np.linalg.solve(Bt, hs[:, t])
        quad = np.real(np.sum(hb.conj() * out[:, :n_bit], axis=0))
        return out, quad

    def zeros(self):
        return np.zeros_like(self.H)


class DiagonalSpace:
    """Scalar amplitude ``q_j`` per user on fixed directions.

    ``cross_gain[u, j] = h_u^H v~_j``; the beamformer of user ``j`` is
    ``q_j v~_j``. Every quadratic form is then separable, so the
    semi-closed-form update reduces to scalar divisions.
    """

    def __init__(self, cross_gain: np.ndarray):
        self.a = np.asarray(cross_gain, dtype=np.complex128)
        self.n_users = self.a.shape[0]
        self.g = np.abs(self.a) ** 2

    def cross(self, q):
        return self.a * q[None, :]

    def trace(self, q) -> float:
        return float(np.sum(np.abs(q) ** 2))

    def solve(self, a0, w_a, w_c, omega, n_bit):
        own = np.diag(self.a)
        da = a0 + w_a @ self.g
        dc = a0 + w_c @ self.g
        dc[n_bit:] -= omega * self.g.diagonal()[n_bit:]
        if np.any(da[:n_bit] <= 0) or np.any(dc[n_bit:] <= 0):
            raise DegenerateRegularizer("degenerate regularizer")
        out = np.empty(self.n_users, dtype=np.complex128)
        out[:n_bit] = own[:n_bit].conj() / da[:n_bit]
        out[n_bit:] = own[n_bit:].conj() / dc[n_bit:]
        quad = self.g.diagonal()[:n_bit] / da[:n_bit]
        return out, quad

    def zeros(self):
        return np.zeros(self.n_users, dtype=np.complex128)


# --- auxiliary state -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AuxState:
    """MM-FP auxiliary variables.

    ``gamma0`` holds the sem-user SINR anchors, ``y``/``z`` the dual-transform
    SINRs of bit-users, ``x``/``m``/``n`` the quadratic-transform ratios and
    ``lam`` the QoS multipliers. ``anchor`` is the point at which the
    surrogate coefficients ``coef_*`` were taken (``gamma0`` unless capped).
    """

    gamma0: np.ndarray
    y: np.ndarray
    z: np.ndarray
    x: np.ndarray = None
    m: np.ndarray = None
    n: np.ndarray = None
    lam: np.ndarray = None
    anchor: np.ndarray = None
    coef_d: np.ndarray = None
    coef_e: np.ndarray = None
    coef_f: np.ndarray = None
    coef_g: np.ndarray = None

    def replace(self, **kw) -> "AuxState":
        return dataclasses.replace(self, **kw)


@dataclass
class FixedPointResult:
    lam: np.ndarray
    V: np.ndarray
    iterations: int
    converged: bool
    diverged: bool
    damped: bool


class Problem:
    """Fixed-depth sum-semantic-rate problem over an arbitrary :class:`FullSpace`/:class:`DiagonalSpace`."""

    def __init__(self, space, noise, n_bit, p_total, beta_bits, m_k, frame_len,
                 model: SemanticRateModel, k: int, opts: SolverOptions | None = None):
        self.space = space
        self.noise = np.asarray(noise, dtype=float)
        self.n_bit = int(n_bit)
        self.p_total = float(p_total)
        self.beta = np.asarray(beta_bits, dtype=float)
        self.beta_nat = self.beta * LN2
        self.w1 = m_k / frame_len
        self.w2 = 1.0 - self.w1
        self.model = model
        self.k = k
        self.params = model[k]
        self.opts = opts or SolverOptions()
        # users with a zero target carry a vacuous constraint
        self.active = self.beta > 0
        # reuse the previous outer iteration's multipliers as the next start
        self.warm_start = False
        # locate the multiplier fixed point by root search before plain iteration
        self.root_search = False

    @classmethod
    def from_channels(cls, H: ChannelSet, cfg: SystemConfig, model, k, opts=None):
        m_k = symbols_for_depth(k, cfg.filters, cfg.image_size)
        return cls(FullSpace(H.matrix), cfg.noise, cfg.n_bit, cfg.p_total, cfg.beta,
                   m_k, cfg.frame_len, model, k, opts)

    # -- evaluation -------------------------------------------------------
    def gains(self, V):
        X = self.space.cross(V)
        return X, np.abs(X) ** 2, self.space.trace(V) / self.p_total

    def sinrs(self, V, regularized=True):
        _, P, s = self.gains(V)
        return sinr_from_gains(P, self.noise, self.n_bit, s if regularized else 1.0)

    def objective(self, V) -> float:
        """Sum semantic rate after power normalization (scale invariant)."""
        sem, _, _ = self.sinrs(V)
        return float(np.sum(rate_at(self.model, self.k, sem)))

    def rates(self, V, regularized=True):
        _, b1, b2 = self.sinrs(V, regularized)
        return self.w1 * np.log2(1 + b1) + self.w2 * np.log2(1 + b2)

    # -- auxiliary updates ------------------------------------------------
    def update_sinr_aux(self, V, state: AuxState | None = None) -> AuxState:
        sem, y, z = self.sinrs(V)
        if state is None:
            return AuxState(gamma0=sem, y=y, z=z)
        return state.replace(gamma0=sem, y=y, z=z)

    def coefficients(self, gamma0):
        a, c, d, e = self.params
        g0 = np.asarray(gamma0, dtype=float)
        if np.any(g0 <= 0):
            raise ValueError("surrogate anchors must be positive")
        if e <= 1:
            return g0, np.full_like(g0, a), np.full_like(g0, d), c + (1 - e) * g0 ** (-e), e * g0 ** (1 - e)
        anchor = np.minimum(g0, max_positive_anchor(self.model, self.k, G_FLOOR))
        G = c * (1 - e) * anchor ** e + 1
        D = a + d * (1 - e) * anchor ** e / G
        E = d * e * anchor ** (e - 1) / G
        F = c * e * anchor ** (e - 1)
        return anchor, D, E, F, G

    def update_ratio_aux(self, V, state: AuxState) -> AuxState:
        X, P, s = self.gains(V)
        nb = self.n_bit
        sig = np.diag(P)
        re = np.real(np.diag(X))
        tot = P.sum(axis=1)
        tot_b = P[:, :nb].sum(axis=1)
        noise = s * self.noise
        anchor, D, E, F, G = self.coefficients(state.gamma0)
        interf = tot[nb:] - sig[nb:] + noise[nb:]
        x = re[nb:] / (F * sig[nb:] + G * interf)
        m = np.sqrt(1 + state.y) * re[:nb] / (tot[:nb] + noise[:nb])
        n = np.sqrt(1 + state.z) * re[:nb] / (tot_b[:nb] + noise[:nb])
        return state.replace(x=x, m=m, n=n, anchor=anchor, coef_d=D, coef_e=E, coef_f=F, coef_g=G)

    # -- semi-closed-form beamformers -------------------------------------
    def _weights(self, lam, st: AuxState):
        nb = self.n_bit
        mu = lam * (self.w1 * st.m ** 2 + self.w2 * st.n ** 2)
        nu = st.x ** 2 * st.coef_e * st.coef_g
        a0 = (mu @ self.noise[:nb] + nu @ self.noise[nb:]) / self.p_total
        w_a = np.concatenate([mu, nu])
        w_c = np.concatenate([lam * self.w1 * st.m ** 2, nu])
        omega = nu - st.x ** 2 * st.coef_e * st.coef_f
        kappa = self.w1 * st.m * np.sqrt(1 + st.y) + self.w2 * st.n * np.sqrt(1 + st.z)
        return a0, w_a, w_c, omega, kappa

    def beamformers(self, lam, st: AuxState):
        """Stationary point of the Lagrangian for multipliers ``lam``."""
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < 0):
            raise ValueError("multipliers must be non-negative")
        a0, w_a, w_c, omega, kappa = self._weights(lam, st)
        if not a0 > 0:
            raise DegenerateRegularizer("degenerate regularizer")
        dirs, quad = self.space.solve(a0, w_a, w_c, omega, self.n_bit)
        scale = np.concatenate([lam * kappa, st.x * st.coef_e])
        return dirs * scale, quad, kappa

    def lambda_update(self, V, st: AuxState, quad, kappa):
        nb = self.n_bit
        _, P, s = self.gains(V)
        tot = P[:nb].sum(axis=1)
        tot_b = P[:nb, :nb].sum(axis=1)
        noise = s * self.noise[:nb]
        num = (self.beta_nat
               - self.w1 * (np.log1p(st.y) - st.y - st.m ** 2 * noise)
               - self.w2 * (np.log1p(st.z) - st.z - st.n ** 2 * noise)
               + self.w1 * st.m ** 2 * tot + self.w2 * st.n ** 2 * tot_b)
        den = 2 * kappa ** 2 * quad
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = np.where(den > 0, num / den, np.inf)
        lam = np.where(self.active, np.maximum(lam, 0.0), 0.0)
        return lam

    def lambda_fixed_point(self, st: AuxState, lam0=None, damping: float | None = None) -> FixedPointResult:
        """Multiplier search making every active QoS constraint tight.

        ``damping`` forces ``lam <- damping*new + (1-damping)*old`` from the
        start; otherwise plain iteration switches to 1/2-averaging once the
        steps start alternating in sign while growing.
        """
        o = self.opts
        nb = self.n_bit
        lam = np.where(self.active, o.lambda_init if lam0 is None else lam0, 0.0).astype(float)
        if nb == 0 or not self.active.any():
            V, _, _ = self.beamformers(lam, st)
            return FixedPointResult(lam, V, 1, True, False, False)
        alpha = damping
        prev_step = None
        prev_size = math.inf
        blowups = 0
        it = 0
        for it in range(1, o.max_inner + 1):
            V, quad, kappa = self.beamformers(lam, st)
            new = self.lambda_update(V, st, quad, kappa)
            if not np.all(np.isfinite(new)):
                return FixedPointResult(lam, V, it, False, True, alpha is not None)
            step = new - lam
            size = float(np.abs(step).sum())
            if alpha is None and o.damping and prev_step is not None:
                if np.any(step * prev_step < 0) and size >= prev_size:
                    alpha = 0.5
            if alpha is not None:
                new = lam + alpha * step
            lam = new
            if lam.max() > o.lambda_blowup:
                blowups += 1
                if blowups >= 3:
                    return FixedPointResult(lam, V, it, False, True, alpha is not None)
            else:
                blowups = 0
            if size <= o.xi:
                V, _, _ = self.beamformers(lam, st)
                return FixedPointResult(lam, V, it, True, False, alpha is not None)
            prev_step, prev_size = step, size
        V, _, _ = self.beamformers(lam, st)
        return FixedPointResult(lam, V, it, False, False, alpha is not None)

    def _root_multipliers(self, st: AuxState, lam0) -> FixedPointResult | None:
        """Fixed point of the multiplier update located by a quasi-Newton root search.

        Returns None unless one plain sweep from the root confirms convergence.
        """
        calls = 0

        def residual(lam):
            nonlocal calls
            calls += 1
            lam = np.maximum(lam, 0.0)
            V, quad, kappa = self.beamformers(lam, st)
            new = self.lambda_update(V, st, quad, kappa)
            return np.where(np.isfinite(new), new, 1e300) - lam

        start = np.where(self.active, self.opts.lambda_init if lam0 is None else lam0, 0.0)
        try:
            sol = optimize.root(residual, start, method="hybr", tol=1e-12)
        except (np.linalg.LinAlgError, ValueError):
            return None
        lam = np.where(self.active, np.maximum(sol.x, 0.0), 0.0)
        step = residual(lam)
        if not np.all(np.isfinite(step)) or np.abs(step).sum() > self.opts.xi:
            return None
        lam = np.where(self.active, lam + step, 0.0)
        V, _, _ = self.beamformers(lam, st)
        return FixedPointResult(lam, V, calls, True, False, False)

    def solve_p8(self, st: AuxState, lam0=None) -> FixedPointResult:
        if self.root_search and self.n_bit and self.active.any():
            res = self._root_multipliers(st, lam0)
            if res is not None:
                return res
        res = self.lambda_fixed_point(st, lam0)
        if res.converged:
            return res
        for alpha in (0.5, 0.2):
            retry = self.lambda_fixed_point(st, lam0, damping=alpha)
            if retry.converged:
                return retry
        return res

    # -- outer loop -------------------------------------------------------
    def feasible(self, V) -> bool:
        return bool(np.all(self.rates(V) >= self.beta - self.opts.tol_qos))

    def run(self, V0):
        """MM-FP iterations from ``V0``; returns the best feasible iterate found.

        Returns ``(V, info)`` with ``V`` normalized to the power budget.
        """
        o = self.opts
        V = V0
        obj = self.objective(V)
        trace = [obj]
        best = (obj, V) if self.feasible(V) else None
        lam = None
        recoveries = 0
        inner_total = 0
        converged = False
        status = "max_outer"
        outer = 0
        for outer in range(1, o.max_outer + 1):
            st = self.update_sinr_aux(V)
            if np.any(st.gamma0 <= 0):
                status = "zero_sinr"
                break
            st = self.update_ratio_aux(V, st)
            res = self.solve_p8(st, lam0=lam if self.warm_start else None)
            inner_total += res.iterations
            if not res.converged:
                # the inner bound built at an infeasible point can be empty even
                # when the problem is not; re-anchor at the QoS-heavy iterate
                recoveries += 1
                if best is not None or recoveries > o.max_recover or not np.all(np.isfinite(res.V)):
                    status = "diverged"
                    break
            lam = res.lam
            V_new = res.V
            if self.space.trace(V_new) <= 0:
                status = "zero_beamformer"
                break
            V = V_new
            new_obj = self.objective(V)
            trace.append(new_obj)
            if self.feasible(V) and (best is None or new_obj > best[0]):
                best = (new_obj, V)
            if abs(new_obj - obj) < o.tol_outer:
                converged = True
                status = "converged"
                obj = new_obj
                break
            obj = new_obj
        feasible = best is not None
        V_out = best[1] if feasible else V
        V_out = V_out * math.sqrt(self.p_total / self.space.trace(V_out))
        info = {
            "status": status,
            "outer": outer,
            "inner": inner_total,
            "converged": converged,
            "feasible": feasible,
            "trace": trace,
            "lam": None if lam is None else lam.tolist(),
        }
        return V_out, info


def min_power_bit_beamformers(H_bit: np.ndarray, noise: np.ndarray, targets: np.ndarray,
                              p_max: float = math.inf, tol: float = 1e-10, max_iter: int = 2000):
    """Minimum-power bit-user beamformers meeting SINR ``targets`` (sem-users silent).

    Solved through the dual uplink: the virtual uplink powers grow
    monotonically from zero to the optimum, so exceeding ``p_max`` on the way
    proves the targets unattainable within the budget. Returns ``None`` when
    infeasible, else the ``(n_t, B)`` beamformer matrix.
    """
    n_t, nb = H_bit.shape
    if nb == 0:
        return np.zeros((n_t, 0), complex)
    tau = np.asarray(targets, dtype=float)
    Hn = H_bit / np.sqrt(noise)  # unit-noise equivalent channels
    q = np.zeros(nb)
    eye = np.eye(n_t)
    for _ in range(max_iter):
        M = eye + (Hn * q) @ Hn.conj().T
        s = np.real(np.sum(Hn.conj() * np.linalg.solve(M, Hn), axis=0))
        new = tau / ((1 + tau) * s)
        if new.sum() > p_max * (1 + 1e-9):
            return None
        done = np.abs(new - q).sum() <= tol * max(new.sum(), 1e-300)
        q = new
        if done:
            break
    else:
        return None
    M = eye + (Hn * q) @ Hn.conj().T
    U = np.linalg.solve(M, Hn)
    U /= np.linalg.norm(U, axis=0)
    G = np.abs(Hn.conj().T @ U) ** 2
    own = np.diag(G)
    S = -G
    S[np.diag_indices(nb)] = own / np.where(tau > 0, tau, 1.0)
    p = np.linalg.solve(S, np.ones(nb))
    p = np.where(tau > 0, np.maximum(p, 0.0), 0.0)
    if p.sum() > p_max * (1 + 1e-9):
        return None
    return U * np.sqrt(p)


def qos_start(H: np.ndarray, noise: np.ndarray, n_bit: int, targets: np.ndarray, p_total: float):
    """A QoS-feasible starting beamformer, or ``None`` if none exists.

    Bit-users get their minimum-power beamformers for the shared-period
    targets; sem-users share what remains along MRT directions, with the
    share shrunk until the bit-users still meet their targets.
    """
    Vb = min_power_bit_beamformers(H[:, :n_bit], noise[:n_bit], targets, p_total)
    if Vb is None:
        return None
    Hs = H[:, n_bit:]
    mrt = Hs / np.linalg.norm(Hs, axis=0)
    spare = p_total - float(np.sum(np.abs(Vb) ** 2))
    share = max(spare, 1e-6 * p_total) / Hs.shape[1]
    for _ in range(60):
        V = np.concatenate([Vb, mrt * math.sqrt(share)], axis=1)
        _, b1, _ = sinr_from_gains(np.abs(H.conj().T @ V) ** 2, noise, n_bit)
        if np.all(b1 >= targets * (1 - 1e-9)):
            return V
        share *= 0.5
    return np.concatenate([Vb, mrt * math.sqrt(share)], axis=1)


def mrt_init(H: np.ndarray, p_total: float) -> np.ndarray:
    """Matched-filter columns with equal power summing to ``p_total``."""
    U = H.shape[1]
    return H / np.linalg.norm(H, axis=0) * math.sqrt(p_total / U)


# --- public API ------------------------------------------------------------

def update_sinr_aux(V: Beamformer, H: ChannelSet, cfg: SystemConfig, state: AuxState | None = None,
                    model: SemanticRateModel | None = None, k: int | None = None) -> AuxState:
    """Refresh anchors and dual-transform SINRs at ``V`` (regularized form)."""
    if V.power <= 0:
        raise ValueError("beamformer must be non-zero")
    s = sinr_all(V, H, cfg, regularized=True)
    if state is None:
        return AuxState(gamma0=s.sem, y=s.bit_shared, z=s.bit_exclusive)
    return state.replace(gamma0=s.sem, y=s.bit_shared, z=s.bit_exclusive)


def update_ratio_aux(V: Beamformer, H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel,
                     k: int, state: AuxState) -> AuxState:
    prob = Problem.from_channels(H, cfg, model, k)
    return prob.update_ratio_aux(V.matrix, state)


def beamformers_from_lambda(lam, state: AuxState, H: ChannelSet, cfg: SystemConfig,
                            model: SemanticRateModel, k: int) -> Beamformer:
    prob = Problem.from_channels(H, cfg, model, k)
    V, _, _ = prob.beamformers(np.asarray(lam, dtype=float), state)
    return Beamformer.from_matrix(V, cfg.n_bit)


def lambda_fixed_point(state: AuxState, H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel,
                       k: int, xi: float = 1e-5, max_iter: int = 200):
    """Returns ``(lam, Beamformer, FixedPointResult)``."""
    opts = SolverOptions(xi=xi, max_inner=max_iter)
    prob = Problem.from_channels(H, cfg, model, k, opts)
    res = prob.solve_p8(state)
    return res.lam, Beamformer.from_matrix(res.V, cfg.n_bit), res


def make_report(V: np.ndarray, H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, k: int,
                opts: SolverOptions, *, solver: str, wall_time: float, iterations=(0, 0),
                converged=True, feasible_hint=True, trace=(), info=None) -> SolveReport:
    """Report at a normalized beamformer; feasibility is re-checked on the true rates."""
    bf = Beamformer.from_matrix(V, cfg.n_bit)
    s = sinr_all(bf, H, cfg)
    feas = check_feasible(bf, H, cfg, k, opts.tol_qos, opts.tol_pow_rel * cfg.p_total)
    objective = float(np.sum(rate_at(model, k, s.sem)))
    return SolveReport(
        beamformer=bf,
        depth=int(k),
        objective=objective,
        per_user_sinr=np.concatenate([s.sem, s.bit_shared, s.bit_exclusive]),
        per_user_rate=feas.rates,
        qos_slack=feas.qos_slack,
        iterations=iterations,
        wall_time=wall_time,
        converged=converged,
        feasible=bool(feas.feasible and feasible_hint),
        solver=solver,
        trace=trace,
        info=info or {},
    )


def solve_p2(H: ChannelSet, cfg: SystemConfig, model: SemanticRateModel, k: int,
             opts: SolverOptions | None = None, V0: np.ndarray | None = None) -> SolveReport:
    """MM-FP at depth ``k``: alternate auxiliary updates and the multiplier search."""
    opts = opts or SolverOptions()
    t0 = time.perf_counter()
    prob = Problem.from_channels(H, cfg, model, k, opts)
    Hm = H.matrix
    targets = 2.0 ** cfg.beta - 1
    # sem power only lowers bit SINRs, so bit-only feasibility decides feasibility overall
    start = qos_start(Hm, cfg.noise, cfg.n_bit, targets, cfg.p_total)
    if start is None:
        V = mrt_init(Hm, cfg.p_total) if V0 is None else V0
        V = V * math.sqrt(cfg.p_total / prob.space.trace(V))
        info = {"status": "qos_infeasible", "outer": 0, "inner": 0, "converged": False,
                "feasible": False, "trace": [prob.objective(V)], "lam": None}
    else:
        V, info = prob.run(mrt_init(Hm, cfg.p_total) if V0 is None else V0)
        if not info["feasible"]:
            V, retry = prob.run(start)
            retry["outer"] += info["outer"]
            retry["inner"] += info["inner"]
            retry["trace"] = info["trace"] + retry["trace"]
            retry["restarted"] = True
            info = retry
    wall = time.perf_counter() - t0
    trace = info.pop("trace")
    return make_report(V, H, cfg, model, k, opts, solver="mmfp", wall_time=wall,
                       iterations=(info["outer"], info["inner"]), converged=info["converged"],
                       feasible_hint=info["feasible"], trace=trace, info=info)
