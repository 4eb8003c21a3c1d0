"""Compare simulated pacing dynamics against the solver's phase prediction.

Runs the learner against the heaviest phase of the optimal commitment and
reports how close the empirical multiplier and spend come to the balance
point lam * P_L = rho_L that the solver predicts.

Usage: python3 scripts/check_convergence.py --scenario two-point --T 200000
"""

import argparse
import sys

from paced_auctions import scenarios as sc
from paced_auctions.auction import expected_triple_mixed
from paced_auctions.auction_bse import auction_bse
from paced_auctions.sim import SimConfig, run
from paced_auctions.strategies import PhaseSchedule, StaticPolicy


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="two-point")
    ap.add_argument("--T", type=float, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    scenario = sc.get(args.scenario)
    problem = scenario.problem()
    sol = auction_bse(problem)
    phase = max((ph for ph in sol.phases if ph.lam is not None),
                key=lambda ph: ph.weight)
    print(f"solver: value {sol.value:.6f}, main phase lam {phase.lam:.6f} "
          f"(weight {phase.weight:.4f})")

    T = int(args.T)
    cfg = SimConfig(problem.dist, problem.fmt, T, "T^{-2/3}", problem.rho_L,
                    1e9, PhaseSchedule(((1.0, phase.mixture),)), seed=args.seed)
    res = run(cfg)
    _, _, p_l = expected_triple_mixed(problem.fmt, phase.mixture, problem.dist)
    lam_star = problem.rho_L / p_l
    print(f"simulated: lam_final {res.lam_final:.6f} (balance point "
          f"{lam_star:.6f}, rel err {abs(res.lam_final / lam_star - 1):.2e})")
    print(f"learner spend per round {res.learner_total_spend / T:.6f} "
          f"(budget rate {problem.rho_L})")
    print(f"optimizer value per round {res.optimizer_total_value / T:.6f} "
          f"(phase value {phase.value:.6f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
