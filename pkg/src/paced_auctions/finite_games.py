"""Stackelberg solvers for finite leader/follower games with leader budgets.

The leader (optimizer) commits first; the follower best-responds, breaking
ties in the leader's favor.  Budgeted equilibria allow the leader to commit to
a distribution over (mixed strategy, follower response) pairs whose expected
spend meets the budgets; a basic LP solution keeps the support at m+1 points
for m budget constraints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import Infeasible

_TOL = 1e-9


@dataclass(frozen=True)
class FiniteGame:
    U_O: np.ndarray
    U_L: np.ndarray
    P: tuple[np.ndarray, ...]
    rho: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "U_O", np.asarray(self.U_O, dtype=float))
        object.__setattr__(self, "U_L", np.asarray(self.U_L, dtype=float))
        object.__setattr__(self, "P", tuple(np.asarray(p, dtype=float) for p in self.P))
        if self.U_O.shape != self.U_L.shape:
            raise ValueError("payoff matrices must share a shape")
        for p in self.P:
            if p.shape != self.U_O.shape:
                raise ValueError("payment matrices must share the payoff shape")
        if len(self.rho) != len(self.P):
            raise ValueError("one budget per payment matrix")

    @property
    def n_A(self) -> int:
        return self.U_O.shape[0]

    @property
    def n_B(self) -> int:
        return self.U_O.shape[1]


@dataclass(frozen=True)
class FinitePhase:
    weight: float
    leader_mix: np.ndarray
    follower_action: int


@dataclass(frozen=True)
class BseSolution:
    phases: tuple
    value: float
    spend: tuple[float, ...]


def _best_response_set(game: FiniteGame, x: np.ndarray) -> list[int]:
    payoffs = x @ game.U_L
    return [b for b in range(game.n_B) if payoffs[b] >= payoffs.max() - _TOL]


def se_value(game: FiniteGame, rho: tuple[float, ...] | float):
    """Best single-commitment Stackelberg value under the budgets.

    For each follower pure action b, maximizes the leader's payoff over mixed
    strategies that keep b a best response and respect every budget; returns
    the best (value, x, b).
    """
    if np.isscalar(rho):
        rho = (float(rho),)
    if len(rho) != len(game.P):
        raise ValueError("need one budget per payment matrix")
    best = None
    for b in range(game.n_B):
        # maximize x @ U_O[:, b]: linprog minimizes, so negate
        c = -game.U_O[:, b]
        a_ub = []
        b_ub = []
        for b2 in range(game.n_B):
            if b2 != b:
                a_ub.append(game.U_L[:, b2] - game.U_L[:, b])
                b_ub.append(0.0)
        for p, r in zip(game.P, rho):
            a_ub.append(p[:, b])
            b_ub.append(r)
        res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                      A_eq=np.ones((1, game.n_A)), b_eq=[1.0],
                      bounds=[(0, None)] * game.n_A, method="highs")
        if res.status == 0:
            val = -res.fun
            if best is None or val > best[0] + _TOL:
                best = (val, res.x, b)
    if best is None:
        raise Infeasible("no commitment satisfies the budgets")
    return best


def _br_region_vertices(game: FiniteGame, b: int) -> list[np.ndarray]:
    """Vertices of the simplex polytope of leader mixes keeping b a best response."""
    n = game.n_A
    rows = []
    rhs = []
    for b2 in range(game.n_B):
        if b2 != b:
            rows.append(game.U_L[:, b2] - game.U_L[:, b])
            rhs.append(0.0)
    for i in range(n):
        e = np.zeros(n)
        e[i] = -1.0
        rows.append(e)
        rhs.append(0.0)
    rows = np.array(rows)
    rhs = np.array(rhs)
    eq = np.ones((1, n))
    verts = []
    for combo in itertools.combinations(range(len(rows)), n - 1):
        a = np.vstack([eq, rows[list(combo)]])
        bb = np.concatenate([[1.0], rhs[list(combo)]])
        if np.linalg.matrix_rank(a) < n:
            continue
        x, *_ = np.linalg.lstsq(a, bb, rcond=None)
        if np.max(np.abs(a @ x - bb)) > 1e-8:
            continue
        if np.any(rows @ x > rhs + 1e-8) or np.any(x < -1e-8):
            continue
        x = np.clip(x, 0.0, None)
        x /= x.sum()
        if not any(np.allclose(x, v, atol=1e-8) for v in verts):
            verts.append(x)
    return verts


def bse_finite(game: FiniteGame, rho: tuple[float, ...] | float | None = None) -> BseSolution:
    """Budgeted Stackelberg equilibrium via the concave closure of commitments.

    Collects the leader payoff and spend of every (best-response-region vertex,
    follower action) pair, then mixes them by LP under the budgets.  The LP's
    basic optimum is supported on at most m+1 points.
    """
    if rho is None:
        rho = game.rho
    if np.isscalar(rho):
        rho = (float(rho),)
    points = []  # (value, spends, x, b)
    for b in range(game.n_B):
        for x in _br_region_vertices(game, b):
            if b not in _best_response_set(game, x):
                continue
            val = float(x @ game.U_O[:, b])
            spends = tuple(float(x @ p[:, b]) for p in game.P)
            points.append((val, spends, x, b))
    if not points:
        raise Infeasible("no best-response region has a vertex")
    c = -np.array([pt[0] for pt in points])
    a_ub = np.array([[pt[1][k] for pt in points] for k in range(len(game.P))])
    res = linprog(c, A_ub=a_ub, b_ub=np.array(rho, dtype=float),
                  A_eq=np.ones((1, len(points))), b_eq=[1.0],
                  bounds=[(0, None)] * len(points), method="highs")
    if res.status != 0:
        raise Infeasible("no mixture of commitments satisfies the budgets")
    z = res.x
    phases = tuple(
        FinitePhase(float(zi), points[i][2], points[i][3])
        for i, zi in enumerate(z) if zi > 1e-12
    )
    spend = tuple(float(a_ub[k] @ z) for k in range(len(game.P)))
    return BseSolution(phases=phases, value=float(-res.fun), spend=spend)
