"""Acceptance suite: one PASS/FAIL line per criterion, printed uncaptured.

Run alone with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""
import math
import statistics
import sys
import time

import numpy as np
import pytest

import oracles
from conftest import random_channels
from semcoex.channel import make_rng, trial_channels
from semcoex.ksearch import SOLVERS, solve_fixed_k, solve_p1, solve_random_k
from semcoex.metrics import check_feasible
from semcoex.mmfp import (
    Problem,
    beamformers_from_lambda,
    lambda_fixed_point,
    mrt_init,
    solve_p2,
    update_ratio_aux,
    update_sinr_aux,
)
from semcoex.model import Beamformer, SystemConfig
from semcoex.semrate import (
    SemanticRateModel,
    default_model,
    fit,
    rate,
    surrogate_coeffs,
    surrogate_value,
    symbols_for_depth,
    synthetic_samples,
)

pytestmark = pytest.mark.acceptance

MODEL = default_model()
DEPTH = 3


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
        assert ok, detail

    return emit


def _random_beamformer(rng, cfg):
    V = rng.normal(size=(cfg.n_t, cfg.n_users)) + 1j * rng.normal(size=(cfg.n_t, cfg.n_users))
    return Beamformer.from_matrix(V * math.sqrt(cfg.p_total) / np.linalg.norm(V), cfg.n_bit)


def test_surrogate_lower_bound(verdict):
    rng = np.random.default_rng(2024)
    n = 10_000
    t0 = time.perf_counter()
    a = rng.uniform(-0.5, 0.5, n)
    c = rng.uniform(0.05, 3.0, n)
    d = rng.uniform(0.05, 3.0, n)
    e = 2.0 - rng.uniform(0.0, 2.0, n)  # (0, 2]
    g0 = 10 ** rng.uniform(-2, 2, n)
    g = 10 ** rng.uniform(-2, 2, n)
    # for e > 1 the bound lives on the side of its pole containing the anchor
    beyond = e > 1
    pole = g0 * (1 - 1 / e)
    g = np.where(beyond & (g <= pole), pole + (g0 - pole) * rng.uniform(1e-3, 1, n), g)
    gap = anchor_err = coef_err = 0.0
    for i in range(n):
        m = SemanticRateModel({1: (a[i], c[i], d[i], e[i])})
        true = rate(m, 1, g[i])
        zeta = surrogate_value(m, 1, g[i], g0[i])
        coef = surrogate_coeffs(m, 1, g0[i])
        gap = max(gap, zeta - true)
        anchor_err = max(anchor_err, abs(surrogate_value(m, 1, g0[i], g0[i]) - rate(m, 1, g0[i])))
        if coef.f_coef * g[i] + coef.g_coef > 0:
            coef_err = max(coef_err, abs(coef.value(g[i]) - zeta))
    exact = 0.0
    for i in range(n):
        m = SemanticRateModel({1: (a[i], c[i], d[i], 1.0)})
        exact = max(exact, abs(surrogate_value(m, 1, g[i], g0[i]) - rate(m, 1, g[i])))
    elapsed = time.perf_counter() - t0
    ok = gap <= 1e-9 and anchor_err <= 1e-9 and exact <= 1e-12 and coef_err <= 1e-9 and elapsed < 5.0
    verdict(1, "surrogate is a tight lower bound", ok,
            f"max excess {gap:.1e}, anchor err {anchor_err:.1e}, unit-exponent err {exact:.1e}, "
            f"coefficient-form err {coef_err:.1e}, {elapsed:.2f} s")


def _aligned(V, H):
    """Same SINRs, with every own gain ``h_u^H v_u`` rotated onto the positive reals."""
    own = np.sum(H.matrix.conj() * V.matrix, axis=0)
    return Beamformer.from_matrix(V.matrix * np.exp(-1j * np.angle(own)), V.v_bit.shape[1])


def test_transform_tightness(verdict):
    cfg = SystemConfig()
    rng = np.random.default_rng(7)
    worst_dual = worst_quad = worst_sem = excess = 0.0
    for trial in range(100):
        H = trial_channels(cfg, trial)
        raw = _random_beamformer(rng, cfg)
        # real auxiliaries bound the rate from below at any phase; check that first
        st = update_ratio_aux(raw, H, cfg, MODEL, DEPTH, update_sinr_aux(raw, H, cfg))
        t1, t2 = oracles.true_regularized_rates(raw.matrix, H.matrix, cfg)
        q1, q2 = oracles.quadratic_rates(raw.matrix, H.matrix, cfg, st.y, st.z, st.m, st.n)
        excess = max(excess, float(np.max(np.r_[q1 - t1, q2 - t2])))
        V = _aligned(raw, H)
        st = update_ratio_aux(V, H, cfg, MODEL, DEPTH, update_sinr_aux(V, H, cfg))
        t1, t2 = oracles.true_regularized_rates(V.matrix, H.matrix, cfg)
        d1, d2 = oracles.dual_rates(V.matrix, H.matrix, cfg, st.y, st.z)
        q1, q2 = oracles.quadratic_rates(V.matrix, H.matrix, cfg, st.y, st.z, st.m, st.n)
        sem = oracles.sem_quadratic_terms(V.matrix, H.matrix, cfg, st)
        zeta = np.array([surrogate_value(MODEL, DEPTH, g, a) for g, a in zip(st.gamma0, st.anchor)])
        worst_dual = max(worst_dual, np.max(np.abs(np.r_[d1 - t1, d2 - t2])))
        worst_quad = max(worst_quad, np.max(np.abs(np.r_[q1 - d1, q2 - d2])))
        worst_sem = max(worst_sem, np.max(np.abs(sem - zeta)))
    ok = max(worst_dual, worst_quad, worst_sem) <= 1e-9 and excess <= 1e-12
    verdict(2, "auxiliary updates make both transforms tight", ok,
            f"dual {worst_dual:.1e}, quadratic {worst_quad:.1e}, semantic {worst_sem:.1e} over 100 instances; "
            f"unaligned excess {excess:.1e}")


def test_closed_form_stationarity(verdict):
    cfg = SystemConfig(n_t=8, n_bit=3, n_sem=2)
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        H = random_channels(rng, 8, 3, 2)
        V = _random_beamformer(rng, cfg)
        st = update_ratio_aux(V, H, cfg, MODEL, DEPTH, update_sinr_aux(V, H, cfg))
        lam = rng.uniform(0.0, 2.0, 3)
        Vs = beamformers_from_lambda(lam, st, H, cfg, MODEL, DEPTH).matrix
        ratio = oracles.stationarity_ratio(
            lambda X: oracles.lagrangian(X, H.matrix, cfg, st, lam, DEPTH), Vs)
        worst = max(worst, ratio)
    verdict(3, "closed-form beamformers zero the Lagrangian gradient", worst < 1e-4,
            f"max relative gradient {worst:.1e} over 20 instances")


def test_fixed_point_tightness(verdict):
    cfg = SystemConfig()
    worst, converged, active = 0.0, 0, 0
    for trial in range(50):
        H = trial_channels(cfg, trial)
        prob = Problem.from_channels(H, cfg, MODEL, DEPTH)
        V = prob.run(mrt_init(H.matrix, cfg.p_total))[0]
        st = prob.update_ratio_aux(V, prob.update_sinr_aux(V))
        lam, bf, res = lambda_fixed_point(st, H, cfg, MODEL, DEPTH)
        if not res.converged:
            continue
        converged += 1
        r1, r2 = oracles.quadratic_rates(bf.matrix, H.matrix, cfg, st.y, st.z, st.m, st.n)
        mixed = (prob.w1 * r1 + (1 - prob.w1) * r2) / math.log(2)
        on = lam > 0
        active += int(on.sum())
        if on.any():
            worst = max(worst, float(np.max(np.abs(mixed[on] - cfg.beta[on]))))
    ok = converged > 0 and active > 0 and worst < 1e-3
    verdict(4, "active QoS constraints are tight at the multiplier fixed point", ok,
            f"max gap {worst:.1e} bits over {active} active constraints, {converged}/50 converged")


def test_brute_force_equivalence(verdict):
    cfg = SystemConfig(n_t=2, n_bit=1, n_sem=1, p_total=1.0)
    t0 = time.perf_counter()
    worst, compared, trial, refuted = 0.0, 0, 0, 0
    while compared < 10 and trial < 40:
        H = trial_channels(cfg, trial)
        trial += 1
        r = solve_p2(H, cfg, MODEL, DEPTH)
        if not r.feasible:
            # a short oracle run must not find a feasible point either
            refuted += oracles.brute_force_p2(H.matrix, cfg, MODEL, DEPTH, restarts=5, seed=trial) is not None
            continue
        ref = oracles.brute_force_p2(H.matrix, cfg, MODEL, DEPTH, restarts=50, seed=trial)
        worst = max(worst, abs(r.objective - ref) / abs(ref) if ref is not None else math.inf)
        compared += 1
    elapsed = time.perf_counter() - t0
    ok = compared == 10 and refuted == 0 and worst <= 1e-3 and elapsed < 60
    verdict(5, "matches a 50-restart constrained local-search oracle", ok,
            f"max relative gap {worst:.1e} on {compared} feasible instances, "
            f"{trial - compared} infeasible verdicts unrefuted, {elapsed:.1f} s")


def test_unconstrained_monotone(verdict):
    worst = 0.0
    for seed in range(50):
        cfg = SystemConfig(n_bit=0, seed=seed)
        r = solve_p2(trial_channels(cfg, 0), cfg, MODEL, DEPTH)
        worst = max(worst, float(-np.min(np.diff(r.trace), initial=0.0)))
    verdict(6, "objective trace is non-decreasing without bit-users", worst <= 1e-8,
            f"largest decrease {worst:.1e} over 50 seeds")


@pytest.fixture(scope="module")
def paired_runs():
    """Per SNR, per solver: reports on the same 100 default channels at depth 3."""
    out = {}
    for snr in (0.0, -5.0):
        cfg = SystemConfig().with_snr_db(snr)
        reports = {name: [] for name in SOLVERS}
        for trial in range(100):
            H = trial_channels(cfg, trial)
            for name in SOLVERS:
                reports[name].append((H, solve_fixed_k(H, cfg, MODEL, name, DEPTH)))
        out[snr] = (cfg, reports)
    return out


def test_power_and_feasibility_contracts(verdict, paired_runs):
    power_err, slack_min, checked, disagree = 0.0, math.inf, 0, 0
    for cfg, reports in paired_runs.values():
        for runs in reports.values():
            for H, r in runs:
                if not r.feasible:
                    continue
                checked += 1
                power_err = max(power_err, abs(r.beamformer.power - cfg.p_total) / cfg.p_total)
                slack_min = min(slack_min, float(np.min(r.qos_slack, initial=math.inf)))
                disagree += not check_feasible(r.beamformer, H, cfg, DEPTH).feasible
    ok = checked > 0 and power_err < 1e-9 and slack_min >= -1e-3 and disagree == 0
    verdict(7, "feasible reports meet the power budget and QoS floors", ok,
            f"{checked} reports, max power error {power_err:.1e}, min slack {slack_min:.2e}")


def _means(reports):
    return {name: statistics.fmean(r.objective if r.feasible else 0.0 for _, r in runs)
            for name, runs in reports.items()}


def test_solver_ordering(verdict, paired_runs):
    hi = _means(paired_runs[0.0][1])
    lo = _means(paired_runs[-5.0][1])
    ok = (hi["mmfp"] >= hi["wmmse-pc"] >= max(hi["zf-pc"], hi["mrt-pc"])
          and hi["mmfp"] >= hi["lp-mmfp"] >= hi["zf-pc"]
          and lo["mrt-pc"] >= lo["zf-pc"])
    fmt = ", ".join(f"{k} {v:.4f}" for k, v in hi.items())
    verdict(8, "mean-objective ordering across solvers", ok,
            f"0 dB: {fmt}; -5 dB: mrt-pc {lo['mrt-pc']:.4f}, zf-pc {lo['zf-pc']:.4f}")


def test_runtime_ordering(verdict):
    cfg = SystemConfig()
    times = {name: [] for name in ("lp-mmfp", "mmfp", "wmmse-pc")}
    for trial in range(30):
        H = trial_channels(cfg, trial)
        for name in times:
            times[name].append(solve_fixed_k(H, cfg, MODEL, name, DEPTH).wall_time)
    med = {k: statistics.median(v) for k, v in times.items()}
    ok = med["lp-mmfp"] < med["mmfp"] and med["lp-mmfp"] <= med["wmmse-pc"]
    verdict(9, "low-complexity variant is fastest", ok,
            ", ".join(f"{k} {1e3 * v:.1f} ms" for k, v in med.items()))


def test_symbol_table(verdict):
    got = [symbols_for_depth(k, 128, 128) for k in range(2, 7)]
    verdict(10, "latent symbol counts per depth", got == [32768, 8192, 2048, 512, 128], f"{got}")


def test_depth_search_dominance(verdict):
    cfg = SystemConfig(n_bit=14, n_sem=1, qos=(0.5,) * 14).with_snr_db(10)
    exhaustive, fixed, randomized = [], [], []
    for trial in range(50):
        H = trial_channels(cfg, trial)
        for bucket, r in (
            (exhaustive, solve_p1(H, cfg, MODEL, "mmfp")),
            (fixed, solve_fixed_k(H, cfg, MODEL, "mmfp", 2)),
            (randomized, solve_random_k(H, cfg, MODEL, "mmfp", make_rng(cfg.seed, trial, 1))),
        ):
            bucket.append(r.objective if r.feasible else 0.0)
    e, f, r = (statistics.fmean(x) for x in (exhaustive, fixed, randomized))
    verdict(11, "exhaustive depth search dominates fixed and random depth", e >= f >= r,
            f"exhaustive {e:.4f}, fixed K=2 {f:.4f}, random {r:.4f}")


def test_fit_recovery(verdict):
    grid = np.arange(-10.0, 32.0, 2.0)
    truth = MODEL.params
    m = fit(synthetic_samples(truth, grid))
    rel = max(float(np.max(np.abs(np.subtract(m[k], p)) / np.abs(p))) for k, p in truth.items())
    noisy = fit(synthetic_samples(truth, grid, noise=0.01, rng=np.random.default_rng(12)), max_rms=0.05)
    g = 10 ** (np.linspace(grid[0], grid[-1], 400) / 10)
    rms = max(float(np.sqrt(np.mean((rate(noisy, k, g) - rate(MODEL, k, g)) ** 2))) for k in truth)
    verdict(12, "curve fit recovers generating parameters", rel <= 1e-4 and rms <= 0.02,
            f"noiseless max relative error {rel:.1e}, noisy curve RMS {rms:.4f}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
