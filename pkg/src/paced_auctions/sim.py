"""Seeded round-by-round simulation of the repeated auction.

Each round: sample values, ask the optimizer strategy for a fake value,
resolve the auction, and apply the learner's pacing update.  The hot loop is
compiled with numba when available; the pure-Python fallback runs the same
operations in the same order, so results are bit-identical either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .auction import AuctionFormat, expected_triple
from .distributions import ValueDistribution
from .policies import BidPolicy, Constant
from .strategies import (
    BudgetGuard,
    DrainManipulator,
    OptimizerStrategy,
    PhaseSchedule,
    StaticPolicy,
)

ETA_RULE = "T^{-2/3}"


@dataclass(frozen=True)
class SimConfig:
    dist: ValueDistribution
    fmt: AuctionFormat
    T: int
    eta: float | str
    rho_L: float
    rho_O: float
    strategy: OptimizerStrategy
    seed: int = 0
    lam_initial: float = 0.0
    record_trajectory: bool = False
    trajectory_stride: int = 1

    def resolved_eta(self) -> float:
        if isinstance(self.eta, str):
            if self.eta != ETA_RULE:
                raise ValueError(f"unknown eta rule {self.eta!r}")
            return float(self.T) ** (-2.0 / 3.0)
        return float(self.eta)

    def __post_init__(self):
        eta = self.resolved_eta()
        if not (0.0 < eta < 1.0):
            raise ValueError("eta must lie in (0, 1)")
        if self.lam_initial > self.rho_L:
            import warnings
            warnings.warn("lam_initial above rho_L forfeits budget safety")


@dataclass(frozen=True)
class SimResult:
    optimizer_total_value: float
    optimizer_total_spend: float
    learner_total_value: float
    learner_total_spend: float
    lam_final: float
    eta: float
    learner_budget_violations: int
    optimizer_budget_violations: int
    lam_trajectory: np.ndarray | None = None


def _kernel(v_l, v_o, vhat, mode, switch_round, mu, eta, rho_L, lam0,
            budget_o0, budget_l0, first_price, guard, guard_scale, cap,
            stride, traj):
    lam = lam0
    drift = 0.0
    comp_d = 0.0
    spend_l = 0.0
    comp_l = 0.0
    spend_o = 0.0
    comp_o = 0.0
    val_o = 0.0
    val_l = 0.0
    budget_o = budget_o0
    budget_l = budget_l0
    viol_l = 0
    viol_o = 0
    n_traj = traj.size
    for t in range(v_l.size):
        if n_traj > 0 and t % stride == 0 and t // stride < n_traj:
            traj[t // stride] = lam
        if mode == 0:
            vh = vhat[t]
        elif mode == 1:
            vh = 1.0 if budget_o > 0.0 else 0.0
        else:
            if budget_o <= 0.0:
                vh = 0.0
            elif t + 1 > switch_round:
                prod = lam * mu
                vh = cap if prod <= 1e-300 else min(1.0 / prod, cap)
            else:
                vh = 1.0
        if guard and budget_o < lam * guard_scale:
            vh = 0.0
        if vh > v_l[t]:
            pay = lam * vh if first_price else lam * v_l[t]
            y = pay - comp_o
            s = spend_o + y
            comp_o = (s - spend_o) - y
            spend_o = s
            budget_o -= pay
            if budget_o < -1e-9:
                viol_o += 1
            val_o += v_o[t]
            p_l = 0.0
        else:
            p_l = lam * v_l[t] if first_price else lam * vh
            y = p_l - comp_l
            s = spend_l + y
            comp_l = (s - spend_l) - y
            spend_l = s
            budget_l -= p_l
            if budget_l < -1e-9:
                viol_l += 1
            val_l += v_l[t]
        # carry the multiplier as lam0 + eta * (compensated drift sum) so the
        # telescoped spend identity survives float cancellation over long runs
        d = rho_L - p_l
        y = d - comp_d
        s = drift + y
        comp_d = (s - drift) - y
        drift = s
        lam = lam0 + eta * drift
    return val_o, spend_o, val_l, spend_l, lam, viol_l, viol_o


try:
    from numba import njit

    _kernel_jit = njit(cache=True)(_kernel)
except ImportError:  # pragma: no cover
    _kernel_jit = None


def _static_fake_values(strategy, T: int, v_o: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray | None:
    """Per-round fake values for state-independent strategies, or None."""
    if isinstance(strategy, StaticPolicy):
        return np.asarray(strategy.policy(v_o), dtype=float)
    if isinstance(strategy, PhaseSchedule):
        vhat = np.zeros(T)
        bounds = np.cumsum([q for q, _ in strategy.phases])
        starts = [0] + [int(round(b * T)) for b in bounds]
        starts[-1] = T
        for (_, mix), lo, hi in zip(strategy.phases, starts[:-1], starts[1:]):
            if hi <= lo:
                continue
            if len(mix) == 1:
                vhat[lo:hi] = mix[0][1](v_o[lo:hi])
            else:
                w = np.array([wt for wt, _ in mix])
                idx = rng.choice(len(mix), size=hi - lo, p=w / w.sum())
                for k, (_, pol) in enumerate(mix):
                    sel = idx == k
                    if sel.any():
                        vhat[lo:hi][sel] = pol(v_o[lo:hi][sel])
        return vhat
    return None


def _compile(strategy, T, v_o, rng, fmt, default_cap=2.0):
    """Flatten a strategy into kernel arguments."""
    guard = False
    guard_scale = 1.0
    if isinstance(strategy, BudgetGuard):
        guard = True
        guard_scale = strategy.cap if fmt is AuctionFormat.FirstPrice else 1.0
        strategy = strategy.inner
    vhat = _static_fake_values(strategy, T, v_o, rng)
    if vhat is not None:
        return vhat, 0, -1, 0.0, guard, guard_scale, default_cap
    if isinstance(strategy, DrainManipulator):
        mode = 1 if strategy.switch_round is None else 2
        switch = -1 if strategy.switch_round is None else int(strategy.switch_round)
        return np.zeros(1), mode, switch, strategy.mu, guard, guard_scale, strategy.cap
    raise TypeError(f"unsupported strategy {type(strategy).__name__}")


def run(config: SimConfig, use_jit: bool = True) -> SimResult:
    eta = config.resolved_eta()
    T = int(config.T)
    rng = np.random.Generator(np.random.Philox(key=config.seed))
    v_l, v_o = config.dist.sample(T, rng)
    v_l = np.ascontiguousarray(v_l, dtype=float)
    v_o = np.ascontiguousarray(v_o, dtype=float)
    vhat, mode, switch, mu, guard, guard_scale, cap = _compile(
        config.strategy, T, v_o, rng, config.fmt)
    if config.record_trajectory:
        stride = max(1, int(config.trajectory_stride))
        traj = np.zeros(-(-T // stride))
    else:
        stride = 1
        traj = np.zeros(0)
    kern = _kernel_jit if (use_jit and _kernel_jit is not None) else _kernel
    out = kern(v_l, v_o, vhat, mode, switch, mu, eta, config.rho_L,
               config.lam_initial, config.rho_O * T, config.rho_L * T,
               config.fmt is AuctionFormat.FirstPrice, guard, guard_scale,
               cap, stride, traj)
    val_o, spend_o, val_l, spend_l, lam, viol_l, viol_o = out
    return SimResult(
        optimizer_total_value=val_o,
        optimizer_total_spend=spend_o,
        learner_total_value=val_l,
        learner_total_spend=spend_l,
        lam_final=lam,
        eta=eta,
        learner_budget_violations=viol_l,
        optimizer_budget_violations=viol_o,
        lam_trajectory=traj if config.record_trajectory else None,
    )


_METRICS = ("optimizer_total_value", "optimizer_total_spend",
            "learner_total_value", "learner_total_spend", "lam_final")


def replicate(config: SimConfig, seeds: list[int]) -> dict:
    """Independent seeded runs; deterministic index-ordered aggregation."""
    if not seeds:
        raise ValueError("need at least one seed")
    results = []
    for seed in seeds:
        from dataclasses import replace
        results.append(run(replace(config, seed=int(seed))))
    summary = {"n": len(seeds)}
    for name in _METRICS:
        vals = np.array([getattr(r, name) for r in results])
        summary[name] = {
            "mean": float(vals.mean()),
            "stderr": float(vals.std(ddof=1) / math.sqrt(len(vals)))
            if len(vals) > 1 else 0.0,
        }
    summary["results"] = results
    return summary


def _policy_at(strategy, t, lam, fmt, spent, rho_O_total):
    """Round-t policy for strategies with a well-defined expected dynamic."""
    if isinstance(strategy, BudgetGuard):
        inner = _policy_at(strategy.inner, t, lam, fmt, spent, rho_O_total)
        scale = strategy.cap if fmt is AuctionFormat.FirstPrice else 1.0
        if rho_O_total - spent < lam * scale:
            return Constant(0.0, cap=strategy.cap)
        return inner
    if isinstance(strategy, StaticPolicy):
        return strategy.policy
    if isinstance(strategy, DrainManipulator):
        if spent >= rho_O_total:
            return Constant(0.0, cap=strategy.cap)
        if strategy.switch_round is not None and t > strategy.switch_round:
            prod = lam * strategy.mu
            c = strategy.cap if prod <= 1e-300 else min(1.0 / prod, strategy.cap)
            return Constant(c, cap=strategy.cap)
        return Constant(1.0, cap=strategy.cap)
    raise TypeError(f"no expected dynamic for {type(strategy).__name__}")


def expected_trajectory(config: SimConfig) -> np.ndarray:
    """Multiplier path under expectation dynamics: the learner pays exactly
    lam * P_L of the round's policy each round.  Returns lam[0..T]."""
    eta = config.resolved_eta()
    T = int(config.T)
    lam = config.lam_initial
    out = np.zeros(T + 1)
    out[0] = lam
    spent = 0.0
    rho_O_total = config.rho_O * T
    cache: dict[BidPolicy, tuple[float, float, float]] = {}
    for t in range(1, T + 1):
        pol = _policy_at(config.strategy, t, lam, config.fmt, spent, rho_O_total)
        if pol not in cache:
            cache[pol] = expected_triple(config.fmt, pol, config.dist)
        _, p_o, p_l = cache[pol]
        spent += lam * p_o
        lam = lam + eta * (config.rho_L - lam * p_l)
        out[t] = lam
    return out
