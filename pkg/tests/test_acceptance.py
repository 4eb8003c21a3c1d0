"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line for its criterion; tolerances and time
budgets are part of the check.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from paced_auctions.auction import AuctionFormat, expected_triple
from paced_auctions.auction_bse import (
    AuctionBseProblem,
    auction_bse,
    auction_se,
    dual_opt,
)
from paced_auctions.distributions import (
    DeltaCdfExample,
    DiscreteJoint,
    IndependentUniform,
    candidate_fake_values,
)
from paced_auctions.dual_curves import (
    DualSetting,
    certify,
    dp_oracle,
    lam_bar_bound,
    smooth_and_integrate,
)
from paced_auctions.finite_games import FiniteGame, bse_finite, se_value
from paced_auctions.policies import AffineClipped, Constant, PacingMirror, Zero
from paced_auctions.sim import SimConfig, run
from paced_auctions.strategies import (
    BudgetGuard,
    DrainManipulator,
    PhaseSchedule,
    StaticPolicy,
    switch_time_tau,
)

SP = AuctionFormat.SecondPrice
TWO_POINT = DiscreteJoint(((0.5, 1.0, 1.0 / 3.0), (1.0, 1.0, 2.0 / 3.0)))


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_finite_game_commitment_values():
    t0 = time.perf_counter()
    game = FiniteGame(
        U_O=[[3.0, 0.0], [0.0, 1.0]],
        U_L=[[3.0, 0.0], [0.0, 1.0]],
        P=(np.array([[3.0, 0.0], [0.0, 0.0]]),),
        rho=(0.5,),
    )
    se_half = se_value(game, 0.5)[0]
    bse_half = bse_finite(game, 0.5).value
    worst = 0.0
    for rho in np.linspace(0.0, 3.0, 31):
        got = bse_finite(game, float(rho)).value
        worst = max(worst, abs(got - min(1.0 + 2.0 * rho / 3.0, 3.0)))
    elapsed = time.perf_counter() - t0
    ok = (abs(se_half - 1.0) <= 1e-9 and abs(bse_half - 4.0 / 3.0) <= 1e-9
          and worst <= 1e-9 and elapsed < 1.0)
    _report("criterion 1: finite-game solver", ok,
            f"SE(1/2)={se_half:.12f}, BSE(1/2)={bse_half:.12f}, "
            f"curve err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_two_point_instance_oracle():
    t0 = time.perf_counter()

    def opt_hat(rho):
        if rho <= 0.25:
            return rho / (1.0 - rho)
        return 1.0 - 5.0 / (6.0 * (1.0 + rho))

    worst_single = worst_mixed = 0.0
    for rho in np.arange(0.05, 0.501, 0.05):
        problem = AuctionBseProblem(TWO_POINT, SP, rho_L=1.0, rho_O=float(rho))
        single, lam, _ = auction_se(problem)
        worst_single = max(worst_single, abs(single - opt_hat(rho)))
        if rho < 0.25:
            mixed = auction_bse(problem).value
            worst_mixed = max(worst_mixed, abs(mixed - 4.0 * rho / 3.0))
    _, lam_quarter, _ = auction_se(
        AuctionBseProblem(TWO_POINT, SP, rho_L=1.0, rho_O=0.25))
    lam_err = abs(lam_quarter - 1.5)
    elapsed = time.perf_counter() - t0
    ok = (worst_single <= 1e-3 and worst_mixed <= 1e-3 and lam_err <= 1e-2
          and elapsed < 10.0)
    _report("criterion 2: two-point closed forms", ok,
            f"single err {worst_single:.2e}, mixed err {worst_mixed:.2e}, "
            f"lam err {lam_err:.2e}, {elapsed:.2f}s")


def test_criterion_3_uniform_warmup_quadruple():
    t0 = time.perf_counter()
    problem = AuctionBseProblem(IndependentUniform(), SP, rho_L=1.0, rho_O=1.0)
    opt, mu_star, r_star = dual_opt(problem)
    sol = auction_bse(problem)
    lam_star = max((ph.lam for ph in sol.phases if ph.lam is not None))
    root3 = math.sqrt(3.0)
    opt_ref = (3.0 + 2.0 * root3) / 18.0
    lam_ref = 18.0 / (2.0 + root3)
    mu_ref = (3.0 + 2.0 * root3) / 54.0
    r_ref = (3.0 + 2.0 * root3) / 27.0
    # truthful-declaration pacing equilibrium: optimizer wins the better draw
    u_pe, _, p_l_pe = expected_triple(SP, PacingMirror(), IndependentUniform())
    lam_pe = 1.0 / p_l_pe  # multiplier that lets the learner spend rho_L = 1
    elapsed = time.perf_counter() - t0
    ok = (abs(opt - opt_ref) <= 5e-3 and abs(lam_star - lam_ref) <= 0.05
          and abs(mu_star - mu_ref) <= 5e-3 and abs(r_star - r_ref) <= 5e-3
          and abs(u_pe - 1.0 / 3.0) <= 1e-9 and abs(lam_pe - 6.0) <= 1e-9
          and elapsed < 30.0)
    _report("criterion 3: uniform warm-up", ok,
            f"OPT={opt:.5f} (ref {opt_ref:.5f}), lam*={lam_star:.4f} "
            f"(ref {lam_ref:.4f}), mu*={mu_star:.5f}, R*={r_star:.5f}, "
            f"equilibrium value {u_pe:.6f} at lam {lam_pe:.2f}, {elapsed:.1f}s")


def _random_discrete(rng, lo=0.0):
    n = int(rng.integers(2, 5))
    v_l = np.round(rng.uniform(lo, 1.0, n), 3)
    v_o = np.round(rng.uniform(0.05, 1.0, n), 3)
    p = rng.dirichlet(np.ones(n))
    p = np.round(p, 6)
    p[-1] = 1.0 - p[:-1].sum()
    if p[-1] < 0:
        return _random_discrete(rng, lo)
    return DiscreteJoint(tuple((float(a), float(b), float(c))
                               for a, b, c in zip(v_l, v_o, p)))


def _random_strategy(rng, fmt):
    kind = rng.integers(0, 4)
    if kind == 0:
        return BudgetGuard(StaticPolicy(Constant(float(rng.uniform(0, 2)))), fmt)
    if kind == 1:
        return BudgetGuard(StaticPolicy(AffineClipped(
            float(rng.uniform(0, 2)), float(rng.uniform(-0.5, 0.5)))), fmt)
    if kind == 2:
        return DrainManipulator(mu=float(rng.uniform(0.5, 5.0)),
                                switch_round=int(rng.integers(1, 100_000)))
    q = float(rng.uniform(0.1, 0.9))
    mix = ((q, ((1.0, Constant(float(rng.uniform(0, 2)))),)),
           (1.0 - q, ((1.0, Zero()),)))
    return PhaseSchedule(mix)


def test_criterion_4_learner_safety_fuzz():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240824)
    T = 100_000
    worst_identity = 0.0
    min_lam = np.inf
    for i in range(200):
        dist = _random_discrete(rng)
        fmt = SP if rng.random() < 0.7 else AuctionFormat.FirstPrice
        rho_L = float(rng.uniform(0.05, 1.0))
        eta = float(rng.uniform(1e-4, 0.05))
        lam0 = float(rng.uniform(0.0, rho_L))
        cfg = SimConfig(dist, fmt, T, eta, rho_L, float(rng.uniform(0.01, 0.5)),
                        _random_strategy(rng, fmt), seed=int(rng.integers(1 << 30)),
                        lam_initial=lam0, record_trajectory=True)
        res = run(cfg)
        min_lam = min(min_lam, float(res.lam_trajectory.min()), res.lam_final)
        assert res.learner_budget_violations == 0, f"run {i} overspent"
        assert res.learner_total_spend <= rho_L * T + 1e-6
        identity = rho_L * T + (lam0 - res.lam_final) / eta
        rel = abs(res.learner_total_spend - identity) / max(1.0, abs(identity))
        worst_identity = max(worst_identity, rel)
    elapsed = time.perf_counter() - t0
    ok = min_lam >= 0.0 and worst_identity <= 1e-9 and elapsed < 60.0
    _report("criterion 4: learner safety fuzz", ok,
            f"200 runs, min lam {min_lam:.3g}, worst identity rel err "
            f"{worst_identity:.2e}, {elapsed:.1f}s")


def _separated_instance(rng):
    while True:
        dist = _random_discrete(rng, lo=0.25)
        if dist.eps_sep > 0.25 and dist.mean_optimizer > 0.05:
            return dist


def test_criterion_5_dual_curve_lemmas():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    sigma = 0.1
    for rep in range(10):
        dist = _separated_instance(rng)
        rho_L = float(rng.uniform(0.2, 0.8))
        rho_O = float(rng.uniform(0.05, 0.4))
        setting = DualSetting(AuctionBseProblem(dist, SP, rho_L, rho_O))
        curve = smooth_and_integrate(setting, sigma, step=sigma / 8)
        g = curve.g_star
        assert np.all(np.diff(g) >= -1e-7), f"instance {rep}: g* not monotone"
        anchor = -(dist.mean_optimizer - setting.R_star) / rho_L
        assert abs(g[0] - anchor) <= 1e-6 * max(1.0, abs(anchor)), \
            f"instance {rep}: anchor {g[0]} vs {anchor}"
        bound = lam_bar_bound(setting)
        for lam in (bound, bound * 1.5, bound + 1.0):
            assert setting.g_star(lam) == 0.0, f"instance {rep}: no vanish"
        # window-averaged curve is (1/sigma)|g*(0)|-Lipschitz
        h = curve.lam_grid[1] - curve.lam_grid[0]
        for k in (1, 3, 8):  # offsets up to the window width
            eps = k * h
            diff = np.abs(curve.g_star_sigma[k:] - curve.g_star_sigma[:-k])
            assert np.all(diff <= (eps / sigma) * abs(g[0]) + 1e-9), \
                f"instance {rep}: Lipschitz violated at offset {k}"
        for i in range(0, curve.lam_grid.size, 5):
            f_val = setting.f(float(curve.lam_grid[i]),
                              float(curve.g_star_sigma[i]))
            assert f_val <= setting.R_star + setting.mu * sigma + 1e-8, \
                f"instance {rep}: smoothed dual bound broken at index {i}"
        # nearby-level bound on 10 sampled (lam, eps) pairs per instance
        for _ in range(10):
            lam = float(rng.uniform(0.0, bound))
            eps = float(rng.uniform(-min(lam, 0.3), 0.3))
            g_near = setting.g_star(lam + eps)
            if not np.isfinite(g_near):
                continue
            cap = (setting.R_star + setting.mu * max(eps, 0.0)
                   - g[0] * max(-eps, 0.0) + 1e-8)
            assert setting.f(lam, g_near) <= cap, \
                f"instance {rep}: nearby-level bound broken"
    elapsed = time.perf_counter() - t0
    ok = elapsed < 120.0
    _report("criterion 5: dual-curve lemmas", ok,
            f"10 instances x (monotone, anchor, vanish, Lipschitz, smoothed "
            f"bound, nearby-level), {elapsed:.1f}s")


def test_criterion_6_separation_certificate():
    t0 = time.perf_counter()
    eta = 1e-3
    sigma = math.sqrt(eta)
    setting = DualSetting(AuctionBseProblem(TWO_POINT, SP, rho_L=0.5, rho_O=0.1))
    curve = smooth_and_integrate(setting, sigma, step=sigma / 8)
    table = dp_oracle(setting, eta, curve.lam_grid, tau_max=2000)
    ok_cert, margin = certify(table, curve.lam_grid, curve, eta)
    elapsed = time.perf_counter() - t0
    ok = ok_cert and elapsed < 300.0
    _report("criterion 6: separation certificate", ok,
            f"eta={eta}, sigma={sigma:.4f}, tau_max=2000, worst margin "
            f"{margin:.3g}, {elapsed:.1f}s")


def test_criterion_7_heavy_tail_experiment():
    t0 = time.perf_counter()
    delta = 0.01
    T = 100_000
    dist = DeltaCdfExample(delta)
    rho_O = delta / (8.0 * (1.0 + delta))
    mu = 2.0 * (1.0 + delta) / delta
    eta = float(T) ** (-2.0 / 3.0)
    tau = switch_time_tau(delta, eta, T)
    means = {}
    for which, strategy in ((1, DrainManipulator(mu=mu)),
                            (2, DrainManipulator(mu=mu,
                                                 switch_round=T // 2 - tau))):
        vals = [run(SimConfig(dist, SP, T, eta, 0.5, rho_O, strategy,
                              seed=s)).optimizer_total_value / T
                for s in range(8)]
        means[which] = float(np.mean(vals))
    ratio = means[2] / means[1]
    elapsed = time.perf_counter() - t0
    ok = (0.47 <= means[2] <= 0.50 and 0.25 <= means[1] <= 0.28
          and ratio > 1.7 and elapsed < 300.0)
    _report("criterion 7: heavy-tail drain experiment", ok,
            f"strategy1 {means[1]:.4f} in [0.25,0.28], strategy2 "
            f"{means[2]:.4f} in [0.47,0.50], ratio {ratio:.2f} > 1.7, "
            f"{elapsed:.1f}s")


def test_criterion_8_manipulability_trend():
    t0 = time.perf_counter()
    dist = TWO_POINT
    rho_L, rho_O = 1.0, 0.2
    problem = AuctionBseProblem(dist, SP, rho_L, rho_O)
    opt, mu_star, _ = dual_opt(problem)
    sol = auction_bse(problem)
    phases = tuple((ph.weight, ph.mixture)
                   for ph in sorted(sol.phases, key=lambda p: -p.spend))

    def family(T):
        out = [BudgetGuard(StaticPolicy(Constant(c)), SP)
               for c in candidate_fake_values(dist)]
        out.append(DrainManipulator(mu=mu_star))
        out.append(DrainManipulator(mu=mu_star, switch_round=T // 2))
        out.append(BudgetGuard(PhaseSchedule(phases), SP))
        return out

    scaled = {}
    for T in (10_000, 30_000, 100_000):
        eta = float(T) ** (-2.0 / 3.0)
        best = -np.inf
        for strategy in family(T):
            vals = [run(SimConfig(dist, SP, T, eta, rho_L, rho_O, strategy,
                                  seed=s)).optimizer_total_value
                    for s in range(4)]
            best = max(best, float(np.mean(vals)))
        scaled[T] = (best - opt * T) / T ** (2.0 / 3.0)
    base = scaled[10_000]
    elapsed = time.perf_counter() - t0
    ok = (base > 0 and all(v <= 10.0 * base for v in scaled.values())
          and elapsed < 120.0)
    _report("criterion 8: manipulability trend", ok,
            f"scaled excess {dict((k, round(v, 3)) for k, v in scaled.items())}"
            f", bound 10x base {10 * base:.3f}, {elapsed:.1f}s")
