"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are collected in
an "acceptance criteria" section at the end of the session.
"""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import brentq

from wncs.estimation import mmse_gain
from wncs.harness import RunConfig
from wncs.harness.results import emit_results
from wncs.harness.simulation import QUEUE_FIELDS, run
from wncs.harness.sweep import capacity, sweep
from wncs.numerics import dare_residual, solve_dare, spectral_radius
from wncs.plant import PENDULUM_A
from wncs.prediction import GprMode, KernelParams, TrainingSet, ingest, posterior
from wncs.scheduler import (
    SchedulerParams,
    VirtualQueues,
    aoi_auxiliary,
    p45_objective,
    power_auxiliary,
    schedule_slot,
    slot_scores,
)
from wncs.stability import expected_lyapunov, expected_next_lyapunov

SEEDS = list(range(10))


# -- 1 ---------------------------------------------------------------------
def test_pendulum_eigenvalues(report):
    moduli = np.sort(np.abs(np.linalg.eigvals(PENDULUM_A)))
    target = np.array([0.42, 0.92, 1.00, 3.85])
    err = np.abs(moduli - target)
    ok = bool(np.all(err <= 0.01))
    report(1, ok, f"moduli {np.round(moduli, 4).tolist()} vs {target.tolist()}, max error {err.max():.4f}")
    assert ok


# -- 2 ---------------------------------------------------------------------
def test_controller_synthesis(report, pendulum):
    res = dare_residual(pendulum.P_ric, pendulum.A, pendulum.B, pendulum.Zs, pendulum.Zu)
    rho = spectral_radius(pendulum.closed_loop)
    p = solve_dare([[2.0]], [[1.0]], [[1.0]], [[1.0]])[0, 0]
    ok = res <= 1e-8 and rho < 1 and abs(p - (2 + math.sqrt(5))) <= 1e-9
    report(2, ok, f"DARE residual {res:.2e}, closed-loop radius {rho:.4f}, scalar p error {abs(p - 2 - math.sqrt(5)):.1e}")
    assert ok


# -- 3 ---------------------------------------------------------------------
def _oracle_posterior(times, vals, k, s2=0.01):
    def cov(a, b):
        lag = a - b
        return math.exp(-lag * lag / 2.0) + math.exp(-2.0 * math.sin(math.pi * lag) ** 2)

    n = len(times)
    R = np.array([[cov(times[i], times[j]) + (s2 if i == j else 0.0) for j in range(n)] for i in range(n)])
    r = np.array([cov(t, k) for t in times])
    Rinv = np.linalg.inv(R)
    return float(r @ Rinv @ vals), cov(k, k) - float(r @ Rinv @ r)


def test_gpr_matches_oracle(report):
    rng = np.random.default_rng(3)
    p = KernelParams()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 21))
        times = sorted(rng.choice(90, size=n, replace=False).tolist())
        vals = rng.standard_normal(n)
        k = int(rng.integers(0, 100))
        ts = TrainingSet(1, GprMode.DIRECT)
        for t, v in zip(times, vals):
            ingest(ts, t, [v])
        m, v = posterior(ts, 0, k, p)
        om, ov = _oracle_posterior(times, vals, k)
        worst = max(worst, abs(m - om), abs(v - max(ov, 0.0)))
    ok = worst <= 1e-8
    report(3, ok, f"50 random training sets, worst mean/variance deviation {worst:.1e}")
    assert ok


# -- 4 ---------------------------------------------------------------------
def test_mmse_monte_carlo(report):
    rng = np.random.default_rng(4)
    F, n, P, N0 = 4, 100_000, 0.8, 0.3
    H = rng.standard_normal((F, F)) / math.sqrt(F)
    G, V = mmse_gain(H, P, N0)
    q = rng.standard_normal((n, F))
    y = math.sqrt(P) * q @ H.T + math.sqrt(N0) * rng.standard_normal((n, F))
    err = y @ G.T - q
    emp = err.T @ err / n
    rel = np.abs(np.diag(emp) - np.diag(V)) / np.diag(V)
    prod = err[:, :, None] * y[:, None, :]
    z = np.abs(prod.mean(axis=0)) / (prod.std(axis=0) / math.sqrt(n))
    ok = bool(rel.max() <= 0.03 and z.max() < 3)
    report(4, ok, f"worst diagonal MSE error {100 * rel.max():.2f}%, worst orthogonality z {z.max():.2f}")
    assert ok


# -- 5 ---------------------------------------------------------------------
def test_lyapunov_monte_carlo(report, pendulum):
    rng = np.random.default_rng(5)
    n = 100_000
    A, B, Phi, Z = pendulum.A, pendulum.B, pendulum.Phi, pendulum.Z
    W = np.diag([1e-3, 2e-3, 1e-3, 3e-3])
    sys = replace(pendulum, W=W)
    x_hat = np.array([0.05, -0.1, 0.08, 0.2])
    L = 0.05 * rng.standard_normal((4, 4))
    J_u = L @ L.T
    L = 0.02 * rng.standard_normal((4, 4))
    V_u = L @ L.T
    J_d, V_d = np.array([[0.02]]), np.array([[0.005]])

    x = x_hat - rng.multivariate_normal(np.zeros(4), J_u, size=n)
    mc = np.mean(np.einsum("ni,ij,nj->n", x, Z, x))
    err1 = abs(mc / expected_lyapunov(sys, x_hat, J_u) - 1)

    errs = {}
    for xi_u, xi_d in itertools.product((0, 1), repeat=2):
        x = x_hat - rng.multivariate_normal(np.zeros(4), J_u, size=n)
        x_c = x + rng.multivariate_normal(np.zeros(4), V_u, size=n) if xi_u else np.broadcast_to(x_hat, (n, 4))
        applied = x_c @ Phi.T + rng.multivariate_normal(np.zeros(1), V_d if xi_d else J_d, size=n)
        x_next = x @ A.T - applied @ B.T + rng.multivariate_normal(np.zeros(4), W, size=n)
        mc = np.mean(np.einsum("ni,ij,nj->n", x_next, Z, x_next))
        errs[(xi_u, xi_d)] = abs(mc / expected_next_lyapunov(sys, x_hat, J_u, J_d, V_u, V_d, xi_u, xi_d) - 1)
    ok = err1 <= 0.02 and max(errs.values()) <= 0.03
    detail = ", ".join(f"{k}: {100 * v:.2f}%" for k, v in errs.items())
    report(5, ok, f"current-value error {100 * err1:.2f}%; next-value errors {detail}")
    assert ok


# -- 6 ---------------------------------------------------------------------
def _numerical_aux(V, w, Q, lo, hi):
    slope = lambda g: Q - V * w / (1.0 + g)
    if slope(lo) >= 0:
        return lo
    if slope(hi) <= 0:
        return hi
    return brentq(slope, lo, hi, xtol=1e-12, rtol=1e-14)


def _enumerated_min(w1, w2, w3, fu, fd):
    M = len(w1)
    best = math.inf
    for ju, jd in itertools.product([None, *range(M)], repeat=2):
        if (ju is not None and not fu[ju]) or (jd is not None and not fd[jd]):
            continue
        au, ad = np.zeros(M), np.zeros(M)
        if ju is not None:
            au[ju] = 1
        if jd is not None:
            ad[jd] = 1
        best = min(best, p45_objective(au, ad, w1, w2, w3))
    return best


def test_closed_form_optimizers(report):
    rng = np.random.default_rng(6)
    aux_err = 0.0
    for _ in range(200):
        V, w, Q = rng.uniform(1, 5000), rng.uniform(0.1, 5), rng.uniform(0.01, 5000)
        cap = rng.uniform(1, 200)
        prm = SchedulerParams(V=V, omega_beta=w, omega_p=w, B_max=cap, P_max_u=cap)
        aux_err = max(aux_err, abs(aoi_auxiliary(Q, prm) - _numerical_aux(V, w, Q, 1.0, cap)),
                      abs(power_auxiliary(Q, prm) - _numerical_aux(V, w, Q, 0.0, cap)))
    mismatches = 0
    for trial in range(1000):
        M = trial % 5 + 1
        queues = [VirtualQueues(*rng.exponential(5.0, 7) * (rng.random(7) < 0.7)) for _ in range(M)]
        w1, w2, w3 = slot_scores(queues, rng.integers(1, 10, M), rng.integers(1, 10, M),
                                 rng.uniform(0, 3, M), rng.uniform(0, 3, M))
        fu, fd = rng.random(M) < 0.8, rng.random(M) < 0.8
        au, ad = schedule_slot(w1, w2, w3, fu, fd)
        legal = au.sum() <= 1 and ad.sum() <= 1 and fu[au == 1].all() and fd[ad == 1].all()
        if not legal or p45_objective(au, ad, w1, w2, w3) != _enumerated_min(w1, w2, w3, fu, fd):
            mismatches += 1
    ok = aux_err <= 1e-6 and mismatches == 0
    report(6, ok, f"auxiliary worst error {aux_err:.1e} over 200 draws; {mismatches}/1000 schedule mismatches")
    assert ok


# -- 7 ---------------------------------------------------------------------
def _tail_ok(summary) -> bool:
    return all(not s.blown_up and s.tail_mean_theta < 0.05 for s in summary.systems)


def test_two_system_trend(report):
    counts = {}
    for name in ("stability_aware", "event_triggered_fdma"):
        res = sweep([RunConfig(M=2, K=90, scheduler=name)], SEEDS, keep_records=False)
        counts[name] = sum(_tail_ok(s) for s in res.summaries)
    ok = all(c >= 8 for c in counts.values())
    detail = ", ".join(f"{k} {v}/10" for k, v in counts.items())
    report(7, ok, f"seeds with both tail means below 0.05: {detail} (need 8/10 each)")
    assert ok


# -- 8, 9 ------------------------------------------------------------------
@pytest.fixture(scope="module")
def twenty_systems():
    names = ("stability_aware", "round_robin", "opportunistic", "event_triggered", "event_triggered_fdma")
    out = {}
    for name in names:
        res = sweep([RunConfig(M=20, K=90, scheduler=name)], SEEDS, keep_records=False)
        out[name] = res.summaries
    return out


def test_twenty_system_capacity(report, twenty_systems):
    served = {k: capacity(v) for k, v in twenty_systems.items()}
    rivals = ("round_robin", "opportunistic", "event_triggered")
    ok = all(served["stability_aware"] > served[r] for r in rivals)
    detail = ", ".join(f"{k} {v}" for k, v in served.items())
    report(8, ok, f"systems served in all 10 seeds: {detail}")
    assert ok


def test_twenty_system_rates(report, twenty_systems):
    prop = np.array([s.rate_u for run_ in twenty_systems["stability_aware"] for s in run_.systems])
    fdma = np.array([s.rate_u for run_ in twenty_systems["event_triggered_fdma"] for s in run_.systems])
    below = float(np.mean(prop < 0.5))
    fdma_high = float(np.mean(fdma >= 0.5))
    ok = below >= 0.8 and fdma.max() >= 0.8 and fdma_high > 0.2
    report(9, ok, f"proposed rates below 0.5: {100 * below:.0f}%; event-triggered FDMA max rate "
                  f"{fdma.max():.2f}, share at or above 0.5: {100 * fdma_high:.0f}%")
    assert ok


# -- 10 --------------------------------------------------------------------
def test_queue_mean_rate_stability(report):
    K = 2000
    worst = 0.0
    diverged = 0
    for seed in range(5):
        summary, records = run(RunConfig(M=2, K=K, seed=seed))
        diverged += sum(s.blown_up for s in summary.systems)
        for i in range(2):
            recs = [r for r in records if r.system == i]
            for q in QUEUE_FIELDS:
                trace = np.array([r.queues[q] for r in recs])
                peak = trace.max()
                if peak > 0:
                    worst = max(worst, trace[-1] / K / peak)
    ok = worst < 0.01
    report(10, ok, f"worst Q_K/(K max Q) {worst:.2e}; {diverged}/10 systems diverged and froze their queues")
    assert ok


# -- 11 --------------------------------------------------------------------
def test_records_are_bit_identical(report, tmp_path):
    cfg = RunConfig(M=2, K=90, seed=0)
    blobs = []
    for tag in ("a", "b"):
        summary, records = run(cfg)
        paths = emit_results(tmp_path / tag, [summary], records)
        blobs.append(paths["records"].read_bytes())
    ok = blobs[0] == blobs[1] and len(blobs[0]) > 0
    report(11, ok, f"two runs wrote {len(blobs[0])} and {len(blobs[1])} bytes, identical: {blobs[0] == blobs[1]}")
    assert ok
