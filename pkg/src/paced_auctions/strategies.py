"""Optimizer strategies for the repeated game.

A strategy is an immutable description; `make_cursor` turns it into a per-run
callable (t, lam, v_O, budget_remaining) -> fake value.  Static and phased
strategies precompute their per-round policy assignment up front so simulation
kernels can treat the fake values as data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .auction import AuctionFormat
from .policies import DEFAULT_CAP, BidPolicy, Constant


@dataclass(frozen=True)
class StaticPolicy:
    """Play one fixed fake-value policy every round."""

    policy: BidPolicy


@dataclass(frozen=True)
class PhaseSchedule:
    """Split the horizon into consecutive phases, each a mixture over policies.

    ``phases`` is a tuple of (fraction, mixture) pairs where each mixture is a
    tuple of (weight, policy) atoms.  Within a phase, a mixture with several
    atoms draws a fresh atom each round; single-atom mixtures draw nothing, so
    a one-phase single-atom schedule reproduces StaticPolicy exactly.
    """

    phases: tuple[tuple[float, tuple[tuple[float, BidPolicy], ...]], ...]

    def __post_init__(self):
        fracs = [q for q, _ in self.phases]
        if any(q < 0 for q in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("phase fractions must be nonnegative and sum to 1")
        for _, mix in self.phases:
            ws = [w for w, _ in mix]
            if any(w < 0 for w in ws) or abs(sum(ws) - 1.0) > 1e-9:
                raise ValueError("mixture weights must be nonnegative and sum to 1")


@dataclass(frozen=True)
class DrainManipulator:
    """Mirror the learner's pacing, then optionally undercut late.

    Declares fake value 1 (so the bid equals the learner's multiplier) until
    ``switch_round``; afterwards declares 1/(lam*mu), a bid of exactly 1/mu.
    With ``switch_round=None`` it mirrors for the whole horizon.  Either way
    it declares 0 once its budget is exhausted.
    """

    mu: float
    switch_round: int | None = None
    cap: float = DEFAULT_CAP


@dataclass(frozen=True)
class BudgetGuard:
    """Force a zero declaration once the wrapped strategy could overspend.

    The guard compares remaining budget against the worst-case next payment:
    lam * cap under first price, lam under second price (the learner's value
    is at most 1).
    """

    inner: "OptimizerStrategy"
    fmt: AuctionFormat
    cap: float = DEFAULT_CAP


OptimizerStrategy = StaticPolicy | PhaseSchedule | DrainManipulator | BudgetGuard


def switch_time_tau(delta: float, eta: float, T: int) -> int:
    """Leading-order late-undercut switch offset: round(delta/2 * T^(1-delta) / eta^delta)."""
    if not (0.0 < delta < 1.0 and 0.0 < eta < 1.0):
        raise ValueError("delta and eta must lie in (0, 1)")
    return round(0.5 * delta * T ** (1.0 - delta) / eta ** delta)


def precomputed_policies(strategy: OptimizerStrategy, T: int,
                         rng: np.random.Generator) -> list[BidPolicy] | None:
    """Per-round policy assignment for strategies that do not react to state.

    Returns None for strategies whose fake value depends on lam or budget.
    Mixture atoms are drawn here, in round order, so simulation backends that
    consume this list agree bit for bit.
    """
    if isinstance(strategy, StaticPolicy):
        return [strategy.policy] * T
    if isinstance(strategy, PhaseSchedule):
        out: list[BidPolicy] = []
        bounds = np.cumsum([q for q, _ in strategy.phases])
        starts = [0] + [int(round(b * T)) for b in bounds]
        starts[-1] = T
        for (q, mix), lo, hi in zip(strategy.phases, starts[:-1], starts[1:]):
            n = hi - lo
            if n <= 0:
                continue
            if len(mix) == 1:
                out.extend([mix[0][1]] * n)
            else:
                w = np.array([wt for wt, _ in mix])
                idx = rng.choice(len(mix), size=n, p=w / w.sum())
                out.extend(mix[i][1] for i in idx)
        return out
    return None


def make_cursor(strategy: OptimizerStrategy, T: int, rng: np.random.Generator):
    """Per-run callable (t, lam, v_O, budget_remaining) -> fake value; t is 1-based."""
    plans = precomputed_policies(strategy, T, rng)
    if plans is not None:
        def static_act(t, lam, v_o, budget_remaining):
            return float(plans[t - 1](v_o))
        return static_act

    if isinstance(strategy, DrainManipulator):
        def drain_act(t, lam, v_o, budget_remaining):
            if budget_remaining <= 0:
                return 0.0
            if strategy.switch_round is not None and t > strategy.switch_round:
                if lam <= 0:
                    return strategy.cap
                return min(1.0 / (lam * strategy.mu), strategy.cap)
            return 1.0
        return drain_act

    if isinstance(strategy, BudgetGuard):
        inner_act = make_cursor(strategy.inner, T, rng)
        scale = strategy.cap if strategy.fmt is AuctionFormat.FirstPrice else 1.0

        def guarded_act(t, lam, v_o, budget_remaining):
            if budget_remaining < lam * scale:
                return 0.0
            return inner_act(t, lam, v_o, budget_remaining)
        return guarded_act

    raise TypeError(f"unsupported strategy {type(strategy).__name__}")
