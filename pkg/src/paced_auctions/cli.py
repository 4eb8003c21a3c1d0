"""Command-line front end: simulate, solve, dual, reproduce.

Exit codes: 0 success, 2 usage or config error, 3 solver infeasible,
4 certification failure.  All file output is CSV written atomically
(temp file + rename) with provenance comments in the header.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile

import numpy as np

from . import scenarios as sc
from .auction import AuctionFormat
from .auction_bse import (
    AuctionBseProblem,
    _upper_hull,
    _envelope_at,
    auction_bse,
    auction_phase_frontier,
    auction_se,
    dual_opt,
)
from .distributions import DeltaCdfExample, as_discrete
from .dual_curves import (
    DualSetting,
    certify,
    dp_oracle,
    lam_bar_bound,
    separation_constant,
    smooth_and_integrate,
)
from .errors import EmptyFrontier, Infeasible, UnboundedPotential
from .finite_games import bse_finite, se_value
from .strategies import DrainManipulator, switch_time_tau

REPRODUCE_IDS = (
    "fig-se-bse",
    "fig-feasible",
    "fig-bse-sppe",
    "fig-dual-warmup",
    "two-point-details",
    "fig-delta-dual",
    "exp-delta-cdf",
)


def _write_lines(path: str, lines: list[str]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, comments: dict, header: list[str],
               rows: list[list]) -> None:
    lines = [f"# {k} = {v}" for k, v in comments.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(
            repr(x) if isinstance(x, float) else str(x) for x in row))
    _write_lines(path, lines)
    print(f"wrote {path}")


def _load_scenario(args) -> sc.Scenario:
    if getattr(args, "config", None):
        return sc.load(args.config)
    if getattr(args, "scenario", None):
        return sc.get(args.scenario)
    raise ValueError("need --scenario or --config")


def _apply_overrides(scenario: sc.Scenario, args) -> sc.Scenario:
    from dataclasses import replace

    over = {}
    if getattr(args, "T", None) is not None:
        over["T"] = int(float(args.T))
    if getattr(args, "delta", None) is not None:
        if not isinstance(scenario.dist, DeltaCdfExample):
            raise ValueError("--delta applies to delta_cdf scenarios only")
        delta = float(args.delta)
        over["dist"] = DeltaCdfExample(delta)
        over["rho_O"] = delta / (8.0 * (1.0 + delta))
        over["strategy"] = DrainManipulator(mu=2.0 * (1.0 + delta) / delta)
    if getattr(args, "rho", None) is not None:
        over["rho_O"] = float(args.rho)
    if getattr(args, "seeds", None):
        over["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    if over:
        scenario = replace(scenario, **over)
    if getattr(args, "strategy", None) is not None:
        scenario = _select_strategy(scenario, int(args.strategy))
    return scenario


def _select_strategy(scenario: sc.Scenario, which: int) -> sc.Scenario:
    """Numbered strategies for drain scenarios: 1 keeps draining, 2 switches
    to the unconstrained-reward declaration near the budget midpoint."""
    from dataclasses import replace

    if not isinstance(scenario.strategy, DrainManipulator):
        raise ValueError("--strategy requires a drain-style scenario")
    mu = scenario.strategy.mu
    if which == 1:
        return replace(scenario, strategy=DrainManipulator(mu=mu))
    if which == 2:
        if not isinstance(scenario.dist, DeltaCdfExample):
            raise ValueError("strategy 2 needs the delta_cdf distribution")
        cfg = replace(scenario, strategy=DrainManipulator(mu=mu)).sim_config()
        tau = switch_time_tau(scenario.dist.delta, cfg.resolved_eta(), scenario.T)
        switch = scenario.T // 2 - tau
        return replace(scenario,
                       strategy=DrainManipulator(mu=mu, switch_round=switch))
    raise ValueError(f"unknown strategy number {which}; use 1 or 2")


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    from .sim import replicate

    scenario = _apply_overrides(_load_scenario(args), args)
    if scenario.strategy is None:
        raise ValueError(f"scenario {scenario.name!r} has no strategy")
    cfg = scenario.sim_config()
    summary = replicate(cfg, list(scenario.seeds))
    per_round = summary["optimizer_total_value"]["mean"] / scenario.T
    print(f"scenario {scenario.name}: T={scenario.T} eta={cfg.resolved_eta():.6g} "
          f"seeds={list(scenario.seeds)}")
    print(f"optimizer per-round reward: {per_round:.6f} "
          f"(stderr {summary['optimizer_total_value']['stderr'] / scenario.T:.2g})")
    if args.out:
        rows = [[int(seed),
                 r.optimizer_total_value, r.optimizer_total_spend,
                 r.learner_total_value, r.learner_total_spend, r.lam_final]
                for seed, r in zip(scenario.seeds, summary["results"])]
        _write_csv(args.out,
                   {"scenario": scenario.name, "T": scenario.T,
                    "eta": cfg.resolved_eta(),
                    "seeds": ",".join(map(str, scenario.seeds))},
                   ["seed", "optimizer_value", "optimizer_spend",
                    "learner_value", "learner_spend", "lam_final"], rows)
    return 0


def cmd_solve(args) -> int:
    scenario = _load_scenario(args)
    if scenario.kind == "finite":
        game = scenario.finite_game()
        rho = (float(args.rho),) if args.rho is not None else game.rho
        se, _, _ = se_value(game, rho)
        sol = bse_finite(game, rho)
        print(f"scenario {scenario.name}: SE = {se:.9g}, BSE = {sol.value:.9g}")
        for ph in sol.phases:
            mix = np.round(ph.leader_mix, 6).tolist()
            print(f"  phase weight {ph.weight:.6f}: leader mix {mix}, "
                  f"follower action {ph.follower_action}")
        return 0
    scenario = _apply_overrides(scenario, args)
    problem = scenario.problem()
    opt, mu_star, r_star = dual_opt(problem)
    sol = auction_bse(problem)
    print(f"scenario {scenario.name}: OPT = {opt:.6f}, mu* = {mu_star:.6f}, "
          f"R* = {r_star:.6f}")
    print(f"two-phase value {sol.value:.6f} at spend {sol.spend:.6f}")
    for ph in sol.phases:
        lam = "null" if ph.lam is None else f"{ph.lam:.4f}"
        mix = ", ".join(f"{w:.4f}*{pol}" for w, pol in ph.mixture)
        print(f"  phase weight {ph.weight:.6f}: lam {lam}, mixture [{mix}]")
    return 0


def cmd_dual(args) -> int:
    scenario = _apply_overrides(_load_scenario(args), args)
    if scenario.kind != "auction":
        raise ValueError("dual analysis needs an auction scenario")
    problem = scenario.problem()
    eta = float(args.eta)
    sigma = float(args.sigma) if args.sigma is not None else math.sqrt(eta)
    setting = DualSetting(problem)
    print(f"scenario {scenario.name}: mu = {setting.mu:.6f}, "
          f"R* = {setting.R_star:.6f}")
    bound = lam_bar_bound(setting)
    if bound is not None:
        print(f"separation bound: g* vanishes past {bound:.4f}")
    try:
        curve = smooth_and_integrate(setting, sigma, step=args.step)
    except UnboundedPotential as err:
        curve = err.curve
        print("verdict: unbounded potential - manipulable regime")
        if args.out:
            rows = [[float(l), float(g)] for l, g in
                    zip(curve.lam_grid, curve.g_star)]
            _write_csv(args.out, {"scenario": scenario.name,
                                  "mu": setting.mu, "R_star": setting.R_star,
                                  "lam_bar": "none"},
                       ["lam", "g_star"], rows)
        return 0
    print(f"lam_bar = {curve.lam_bar:.6f}")
    if args.out:
        rows = [[float(l), float(g), float(gs), float(G)] for l, g, gs, G in
                zip(curve.lam_grid, curve.g_star, curve.g_star_sigma,
                    curve.G_sigma)]
        _write_csv(args.out, {"scenario": scenario.name, "mu": setting.mu,
                              "R_star": setting.R_star, "sigma": sigma,
                              "lam_bar": curve.lam_bar},
                   ["lam", "g_star", "g_star_sigma", "G_sigma"], rows)
    if args.tau_max > 0:
        if as_discrete(problem.dist) is None and setting.atoms is None:
            raise ValueError("certification needs a discrete value distribution")
        table = dp_oracle(setting, eta, curve.lam_grid, args.tau_max)
        ok, margin = certify(table, curve.lam_grid, curve, eta)
        A = separation_constant(curve, eta)
        if not ok:
            print(f"verdict: certification FAILED, worst margin {margin:.3g}")
            return 4
        print(f"verdict: certified, A = {A:.6f}, worst margin {margin:.3g}")
    return 0


# ---------------------------------------------------------------------------
# named reproductions


def _gnuplot(path: str, csv: str, title: str, cols: list[tuple[int, int, str]]):
    lines = ["set datafile separator ','", f"set title '{title}'", "set key left"]
    plots = ", ".join(f"'{os.path.basename(csv)}' using {x}:{y} "
                      f"with lines title '{t}'" for x, y, t in cols)
    lines.append("plot " + plots)
    _write_lines(path, lines)
    print(f"wrote {path}")


def _repro_fig_se_bse(out_dir: str, gnuplot: bool) -> None:
    game = sc.get("finite-example").finite_game()
    rows = []
    for rho in np.linspace(0.0, 3.0, 121):
        se, _, _ = se_value(game, float(rho))
        bse = bse_finite(game, float(rho)).value
        rows.append([float(rho), float(se), float(bse)])
    csv = os.path.join(out_dir, "fig-se-bse.csv")
    _write_csv(csv, {"scenario": "finite-example", "seed": "none (exact LP)"},
               ["rho", "se", "bse"], rows)
    if gnuplot:
        _gnuplot(os.path.join(out_dir, "fig-se-bse.gp"), csv,
                 "single vs mixed commitment value", [(1, 2, "SE"), (1, 3, "BSE")])


def _repro_fig_feasible(out_dir: str, gnuplot: bool) -> None:
    from .finite_games import _br_region_vertices, _best_response_set

    game = sc.get("finite-example").finite_game()
    rows = []
    for b in range(game.n_B):
        for x in _br_region_vertices(game, b):
            if b not in _best_response_set(game, x):
                continue
            val = float(x @ game.U_O[:, b])
            spend = float(x @ game.P[0][:, b])
            rows.append([spend, val, b] + np.round(x, 6).tolist())
    csv = os.path.join(out_dir, "fig-feasible.csv")
    _write_csv(csv, {"scenario": "finite-example", "seed": "none (exact)"},
               ["spend", "value", "follower_action", "x0", "x1"], rows)
    if gnuplot:
        _gnuplot(os.path.join(out_dir, "fig-feasible.gp"), csv,
                 "feasible commitment points", [(1, 2, "commitments")])


def _repro_fig_bse_sppe(out_dir: str, gnuplot: bool) -> None:
    problem = sc.get("warmup-uniform").problem()
    hull = _upper_hull(auction_phase_frontier(problem))
    rows = []
    for rho in np.linspace(0.0, 1.5, 61):
        value, _ = _envelope_at(hull, float(rho))
        rows.append([float(rho), float(value), 1.0 / 3.0])
    csv = os.path.join(out_dir, "fig-bse-sppe.csv")
    _write_csv(csv, {"scenario": "warmup-uniform", "seed": "none (solver)"},
               ["rho_O", "bse_value", "pacing_equilibrium_value"], rows)
    if gnuplot:
        _gnuplot(os.path.join(out_dir, "fig-bse-sppe.gp"), csv,
                 "commitment value vs pacing equilibrium",
                 [(1, 2, "BSE"), (1, 3, "SPPE")])


def _repro_fig_dual_warmup(out_dir: str, gnuplot: bool) -> None:
    problem = sc.get("warmup-uniform").problem()
    setting = DualSetting(problem)
    curve = smooth_and_integrate(setting, sigma=0.1)
    rows = [[float(l), float(g), float(gs), float(G)] for l, g, gs, G in
            zip(curve.lam_grid, curve.g_star, curve.g_star_sigma,
                curve.G_sigma)]
    csv = os.path.join(out_dir, "fig-dual-warmup.csv")
    _write_csv(csv, {"scenario": "warmup-uniform", "seed": "none (solver)",
                     "mu": setting.mu, "R_star": setting.R_star,
                     "lam_bar": curve.lam_bar},
               ["lam", "g_star", "g_star_sigma", "G_sigma"], rows)
    if gnuplot:
        _gnuplot(os.path.join(out_dir, "fig-dual-warmup.gp"), csv,
                 "dual multiplier curves", [(1, 2, "g*"), (1, 3, "g*_sigma")])


def _repro_two_point_details(out_dir: str, gnuplot: bool) -> None:
    from .auction import expected_triple
    from .policies import Constant

    scenario = sc.get("two-point")
    rows = []
    for v_hat in np.linspace(0.0, 2.0, 201):
        u, p_o, p_l = expected_triple(scenario.fmt, Constant(float(v_hat)),
                                      scenario.dist)
        rows.append([float(v_hat), float(u), float(p_o), float(p_l)])
    csv1 = os.path.join(out_dir, "two-point-stage.csv")
    _write_csv(csv1, {"scenario": "two-point", "seed": "none (exact)"},
               ["v_hat", "U_O", "P_O", "P_L"], rows)
    rows = []
    for rho in np.arange(0.02, 0.51, 0.02):
        problem = scenario.problem(rho_O=float(rho))
        se, lam, _ = auction_se(problem)
        bse = auction_bse(problem).value
        rows.append([float(rho), float(se), float(bse), float(lam)])
    csv2 = os.path.join(out_dir, "two-point-values.csv")
    _write_csv(csv2, {"scenario": "two-point", "seed": "none (solver)"},
               ["rho_O", "single_phase_value", "bse_value", "lam"], rows)
    if gnuplot:
        _gnuplot(os.path.join(out_dir, "two-point-values.gp"), csv2,
                 "two-point instance: value vs budget",
                 [(1, 2, "single phase"), (1, 3, "BSE")])


def _repro_fig_delta_dual(out_dir: str, gnuplot: bool) -> None:
    scenario = sc.get("delta-cdf")
    delta = 0.05
    from dataclasses import replace
    scenario = replace(scenario, dist=DeltaCdfExample(delta),
                       rho_O=delta / (8.0 * (1.0 + delta)))
    setting = DualSetting(scenario.problem())
    try:
        curve = smooth_and_integrate(setting, sigma=0.1, lam_max=8.0)
        lam_bar = curve.lam_bar
        verdict = f"lam_bar = {lam_bar}"
    except UnboundedPotential as err:
        curve = err.curve
        verdict = "unbounded potential - manipulable regime"
    rows = [[float(l), float(g)] for l, g in zip(curve.lam_grid, curve.g_star)]
    csv = os.path.join(out_dir, "fig-delta-dual.csv")
    _write_csv(csv, {"scenario": "delta-cdf", "delta": delta,
                     "seed": "none (solver)", "mu": setting.mu,
                     "R_star": setting.R_star, "verdict": verdict},
               ["lam", "g_star"], rows)
    print(f"verdict: {verdict}")
    if gnuplot:
        _gnuplot(os.path.join(out_dir, "fig-delta-dual.gp"), csv,
                 "dual curve, heavy-near-zero instance", [(1, 2, "g*")])


def _repro_exp_delta_cdf(out_dir: str, gnuplot: bool, Ts: list[int]) -> None:
    from .sim import replicate

    base = sc.get("delta-cdf")
    rows = []
    for T in Ts:
        for which in (1, 2):
            scenario = _select_strategy(
                sc.get("delta-cdf", T=int(T)), which)
            summary = replicate(scenario.sim_config(), list(scenario.seeds))
            mean = summary["optimizer_total_value"]["mean"] / T
            err = summary["optimizer_total_value"]["stderr"] / T
            rows.append([int(T), which, float(mean), float(err)])
            print(f"T={T} strategy {which}: per-round reward {mean:.5f} "
                  f"(stderr {err:.2g})")
    csv = os.path.join(out_dir, "exp-delta-cdf.csv")
    _write_csv(csv, {"scenario": "delta-cdf", "delta": base.dist.delta,
                     "seeds": ",".join(map(str, base.seeds))},
               ["T", "strategy", "per_round_reward", "stderr"], rows)
    if gnuplot:
        _gnuplot(os.path.join(out_dir, "exp-delta-cdf.gp"), csv,
                 "drain vs drain-and-switch reward", [(1, 3, "reward")])


def cmd_reproduce(args) -> int:
    if args.id not in REPRODUCE_IDS:
        print(f"unknown reproduction id {args.id!r}; valid ids: "
              f"{', '.join(REPRODUCE_IDS)}", file=sys.stderr)
        return 2
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    if args.id == "fig-se-bse":
        _repro_fig_se_bse(out_dir, args.gnuplot)
    elif args.id == "fig-feasible":
        _repro_fig_feasible(out_dir, args.gnuplot)
    elif args.id == "fig-bse-sppe":
        _repro_fig_bse_sppe(out_dir, args.gnuplot)
    elif args.id == "fig-dual-warmup":
        _repro_fig_dual_warmup(out_dir, args.gnuplot)
    elif args.id == "two-point-details":
        _repro_two_point_details(out_dir, args.gnuplot)
    elif args.id == "fig-delta-dual":
        _repro_fig_delta_dual(out_dir, args.gnuplot)
    elif args.id == "exp-delta-cdf":
        Ts = [int(float(t)) for t in args.Ts.split(",")]
        _repro_exp_delta_cdf(out_dir, args.gnuplot, Ts)
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paced-auctions",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--scenario", help="bundled scenario name")
        q.add_argument("--config", help="path to a scenario TOML file")

    q = sub.add_parser("simulate", help="run seeded simulations")
    common(q)
    q.add_argument("--T", help="horizon override")
    q.add_argument("--delta", type=float, help="delta_cdf shape override")
    q.add_argument("--strategy", type=int, choices=(1, 2),
                   help="numbered drain strategy")
    q.add_argument("--seeds", help="comma-separated seed list")
    q.add_argument("--out", help="CSV output path")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("solve", help="solve for equilibrium commitments")
    common(q)
    q.add_argument("--rho", type=float, help="optimizer budget override")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("dual", help="dual curves and certification")
    common(q)
    q.add_argument("--eta", type=float, default=1e-3)
    q.add_argument("--sigma", type=float, help="smoothing window, default sqrt(eta)")
    q.add_argument("--step", type=float, help="grid step, default sigma/8")
    q.add_argument("--tau-max", type=int, default=0,
                   help="rounds of value iteration to certify (0 skips)")
    q.add_argument("--rho", type=float, help="optimizer budget override")
    q.add_argument("--out", help="CSV output path")
    q.set_defaults(func=cmd_dual)

    q = sub.add_parser("reproduce", help="regenerate a named figure or table")
    q.add_argument("id", help=f"one of: {', '.join(REPRODUCE_IDS)}")
    q.add_argument("--out-dir", default="out")
    q.add_argument("--Ts", default="100000",
                   help="comma-separated horizons for exp-delta-cdf")
    q.add_argument("--gnuplot", action="store_true",
                   help="also emit a gnuplot script")
    q.set_defaults(func=cmd_reproduce)
    return p


def main(argv: list[str] | None = None) -> int:
    threads = os.environ.get("PACED_AUCTIONS_THREADS")
    if threads:
        try:
            import numba

            numba.set_num_threads(int(threads))
        except (ImportError, ValueError):
            pass
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (Infeasible, EmptyFrontier) as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
