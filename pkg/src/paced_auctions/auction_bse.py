"""Budgeted Stackelberg solver for the auction setting.

The optimizer (leader) commits to phases of (policy mixture, multiplier)
pairs; within a phase the learner's pacing converges to the multiplier lam
that balances her budget, so a phase is feasible when lam * P_L >= rho_L.
The solver traces the attainable (spend, value) set, takes its upper concave
envelope, and reads off the two-phase optimum at the optimizer budget.  A
Lagrangian dual over the optimizer's budget multiplier mu certifies the value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .auction import AuctionFormat, expected_triple
from .distributions import (
    DeltaCdfExample,
    IndependentUniform,
    ValueDistribution,
    as_discrete,
    candidate_fake_values,
)
from .errors import DegenerateDistribution, EmptyFrontier
from .policies import AffineClipped, BidPolicy, Constant, PiecewiseConstant, Zero

_TOL = 1e-12


@dataclass(frozen=True)
class AuctionBseProblem:
    dist: ValueDistribution
    fmt: AuctionFormat
    rho_L: float
    rho_O: float
    cap: float = 2.0
    n_lam: int = 120

    def __post_init__(self):
        if self.rho_L <= 0 or self.rho_O < 0:
            raise ValueError("rho_L must be positive and rho_O nonnegative")


@dataclass(frozen=True)
class AuctionPhase:
    """One commitment phase; lam None marks the never-win limit (zero declaration)."""

    weight: float
    mixture: tuple[tuple[float, BidPolicy], ...]
    lam: float | None
    spend: float
    value: float


@dataclass(frozen=True)
class AuctionBseSolution:
    phases: tuple[AuctionPhase, ...]
    value: float
    spend: float


@dataclass(frozen=True)
class FrontierPoint:
    spend: float
    value: float
    lam: float | None
    mixture: tuple[tuple[float, BidPolicy], ...]


def _policy_atoms(problem: AuctionBseProblem) -> list[BidPolicy]:
    dist = problem.dist
    if as_discrete(dist) is not None:
        vals = candidate_fake_values(dist, problem.cap)
    elif isinstance(dist, DeltaCdfExample):
        vals = sorted(
            set(np.geomspace(1e-6, 0.5, 40).tolist())
            | set(np.linspace(0.02, 0.5, 25).tolist())
            | {0.5, 0.75, 1.0, 0.5 * (1.0 + problem.cap), problem.cap}
        )
        vals = [v for v in vals if v <= problem.cap]
    else:
        raise TypeError("constant-atom grid needs a discrete or scalar-value distribution")
    return [Constant(v, cap=problem.cap) for v in vals]


def _atom_triples(problem: AuctionBseProblem, atoms: list[BidPolicy]):
    trip = [expected_triple(problem.fmt, a, problem.dist) for a in atoms]
    u = np.array([t[0] for t in trip])
    p_o = np.array([t[1] for t in trip])
    p_l = np.array([t[2] for t in trip])
    return u, p_o, p_l


def _group_tables(problem: AuctionBseProblem, atoms: list[BidPolicy]):
    """Stage tables split by the optimizer's own value.

    Returns (w, U, PO, PL, v_os) where w[k] is the probability of own value
    v_os[k] and U/PO/PL are (n_candidates, n_groups) conditional expectations.
    A scalar own value collapses to a single group of unconditional triples.
    """
    joint = as_discrete(problem.dist)
    cands = np.array([a.c for a in atoms])
    if joint is None:
        u, p_o, p_l = _atom_triples(problem, atoms)
        return np.array([1.0]), u[:, None], p_o[:, None], p_l[:, None], None
    first = problem.fmt is AuctionFormat.FirstPrice
    groups: dict[float, list[tuple[float, float]]] = {}
    for v_l, v_o, p in joint.atoms:
        groups.setdefault(v_o, []).append((v_l, p))
    v_os = sorted(groups)
    n_c, n_k = len(cands), len(v_os)
    w = np.zeros(n_k)
    U = np.zeros((n_c, n_k))
    PO = np.zeros((n_c, n_k))
    PL = np.zeros((n_c, n_k))
    for k, v_o in enumerate(v_os):
        mass = sum(p for _, p in groups[v_o])
        w[k] = mass
        for ci, c in enumerate(cands):
            u = po = pl = 0.0
            for v_l, p in groups[v_o]:
                cond = p / mass
                if c > v_l:
                    u += cond * v_o
                    po += cond * (c if first else v_l)
                else:
                    pl += cond * (v_l if first else c)
            U[ci, k] = u
            PO[ci, k] = po
            PL[ci, k] = pl
    return w, U, PO, PL, tuple(v_os)


def _lam_grid(problem: AuctionBseProblem, p_l: np.ndarray) -> np.ndarray:
    pos = p_l[p_l > _TOL]
    if pos.size == 0:
        raise EmptyFrontier("no candidate policy lets the learner spend her budget")
    lam_cap = problem.rho_L / pos.min()
    return np.geomspace(problem.rho_L, max(lam_cap, problem.rho_L * (1 + 1e-9)),
                        problem.n_lam)


class _DiscreteCloud:
    """Vectorized cloud of budget-binding (spend, value) commitments.

    Raising lam past the point where the learner constraint binds only adds
    spend without changing value, so binding points carry the whole frontier.
    For a fixed lam the attainable set is a polytope whose vertices mix at
    most two atoms, hence the cloud is singles plus dense two-atom mixtures.
    """

    def __init__(self, problem: AuctionBseProblem, n_q: int = 33):
        self.problem = problem
        self.atoms = _policy_atoms(problem)
        self.u, self.p_o, self.p_l = _atom_triples(problem, self.atoms)
        rho_L = problem.rho_L
        if not np.any(self.p_l > _TOL):
            raise EmptyFrontier("no candidate policy lets the learner spend her budget")
        u, p_o, p_l = self.u, self.p_o, self.p_l
        singles = np.nonzero(p_l > _TOL)[0]
        s_parts = [rho_L * p_o[singles] / p_l[singles]]
        v_parts = [u[singles]]
        i_parts = [singles]
        j_parts = [singles]
        q_parts = [np.ones(singles.size)]
        n = len(u)
        if n >= 2:
            iu, ju = np.triu_indices(n, k=1)
            q = np.linspace(0.0, 1.0, n_q)[1:-1]
            pl_mix = q[None, :] * p_l[iu, None] + (1 - q[None, :]) * p_l[ju, None]
            ok = pl_mix > _TOL
            po_mix = q[None, :] * p_o[iu, None] + (1 - q[None, :]) * p_o[ju, None]
            v_mix = q[None, :] * u[iu, None] + (1 - q[None, :]) * u[ju, None]
            s_mix = np.where(ok, rho_L * po_mix / np.where(ok, pl_mix, 1.0), np.inf)
            r, c = np.nonzero(ok)
            s_parts.append(s_mix[r, c])
            v_parts.append(v_mix[r, c])
            i_parts.append(iu[r])
            j_parts.append(ju[r])
            q_parts.append(q[c])
        self.S = np.concatenate(s_parts)
        self.V = np.concatenate(v_parts)
        self.I = np.concatenate(i_parts)
        self.J = np.concatenate(j_parts)
        self.Q = np.concatenate(q_parts)

    def point(self, i: int, j: int, q: float) -> FrontierPoint:
        """Materialize the binding commitment mixing atoms i and j with weight q."""
        pl = q * self.p_l[i] + (1 - q) * self.p_l[j]
        lam = self.problem.rho_L / pl
        spend = lam * (q * self.p_o[i] + (1 - q) * self.p_o[j])
        value = q * self.u[i] + (1 - q) * self.u[j]
        if i == j or q >= 1.0 - 1e-12:
            mixture = ((1.0, self.atoms[i]),)
        elif q <= 1e-12:
            mixture = ((1.0, self.atoms[j]),)
        else:
            mixture = ((float(q), self.atoms[i]), (1.0 - float(q), self.atoms[j]))
        return FrontierPoint(float(spend), float(value), float(lam), mixture)

    def null_point(self) -> FrontierPoint:
        return FrontierPoint(0.0, 0.0, None,
                             ((1.0, Zero(cap=self.problem.cap)),))

    def reward(self, mu: float, polish: int = 3):
        """Max of value - mu*spend over the cloud, with local pair polishing."""
        scores = self.V - mu * self.S
        k_best = int(np.argmax(scores))
        best = max(0.0, float(scores[k_best]))
        arg = None if best == 0.0 else (int(self.I[k_best]), int(self.J[k_best]),
                                        float(self.Q[k_best]))
        if polish > 0 and scores.size:
            top = np.argsort(scores)[-polish:]
            seen = set()
            for k in top:
                i, j = int(self.I[k]), int(self.J[k])
                if i == j or (i, j) in seen:
                    continue
                seen.add((i, j))
                r, q = _pair_best(self.u, self.p_o, self.p_l, i, j, mu,
                                  self.problem.rho_L)
                if r > best:
                    best, arg = float(r), (i, j, float(q))
        return best, arg

    def pareto_points(self) -> list[FrontierPoint]:
        keep = _pareto_indices(self.S, self.V)
        return [self.point(int(self.I[k]), int(self.J[k]), float(self.Q[k]))
                for k in keep]


class _GroupCloud:
    """Commitment frontier when declarations may condition on the own value.

    With several optimizer values the best declaration is a map from own value
    to fake value, so a commitment is an independent per-group mixture over
    candidates rather than one global mixture.  Rewards come from the saddle
    sup over lam of inf over g <= 0 of the doubly relaxed stage reward (exact
    by linear-programming duality at each lam); a linear program at the
    winning lam materializes the phase as a mixture of step policies.
    """

    def __init__(self, problem: AuctionBseProblem):
        self.problem = problem
        self.atoms = _policy_atoms(problem)
        self.cands = np.array([a.c for a in self.atoms])
        self.w, self.U, self.PO, self.PL, self.v_os = _group_tables(problem, self.atoms)
        self.pl_bar = float(self.w @ self.PL.max(axis=0))
        if self.pl_bar <= _TOL:
            raise EmptyFrontier("no candidate policy lets the learner spend her budget")

    def _f(self, lam: float, g: float, mu: float) -> float:
        stage = self.U - mu * lam * self.PO - g * lam * self.PL
        return g * self.problem.rho_L + float(self.w @ stage.max(axis=0))

    def _inner(self, lam: float, mu: float) -> float:
        """inf over g <= 0 of the relaxed reward; -inf when lam is infeasible."""
        rho_L = self.problem.rho_L
        slack = lam * self.pl_bar - rho_L
        if slack <= 1e-12:
            return -np.inf
        # any minimizer g obeys -g * slack <= f(lam, 0), which bounds the search
        g_lo = -(self._f(lam, 0.0, mu) / slack + 1.0)
        res = minimize_scalar(lambda g: self._f(lam, g, mu), bounds=(g_lo, 0.0),
                              method="bounded", options={"xatol": 1e-11})
        return float(res.fun)

    def reward(self, mu: float):
        """Max of value - mu*spend over budget-feasible commitments."""
        rho_L = self.problem.rho_L
        lam_min = rho_L / self.pl_bar
        lams = np.geomspace(lam_min * (1.0 + 1e-6), lam_min * 400.0, 72)
        vals = [self._inner(l, mu) for l in lams]
        k = int(np.argmax(vals))
        lo = lams[max(k - 1, 0)]
        hi = lams[min(k + 1, len(lams) - 1)]
        res = minimize_scalar(lambda l: -self._inner(l, mu), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-10})
        best = max(0.0, -float(res.fun))
        arg = None if best == 0.0 else (float(res.x), float(mu))
        return best, arg

    def point(self, lam: float, mu: float) -> FrontierPoint:
        """Best per-group mixture at this lam via a block-simplex LP."""
        from scipy.optimize import linprog

        rho_L = self.problem.rho_L
        n_c, n_k = self.U.shape
        obj = -(self.w[None, :] * (self.U - mu * lam * self.PO)).ravel(order="F")
        a_budget = -(lam * self.w[None, :] * self.PL).ravel(order="F")
        a_eq = np.kron(np.eye(n_k), np.ones(n_c))
        res = linprog(obj, A_ub=a_budget[None, :], b_ub=[-rho_L],
                      A_eq=a_eq, b_eq=np.ones(n_k),
                      bounds=[(0, None)] * (n_c * n_k), method="highs")
        if res.status != 0:
            raise EmptyFrontier(f"no feasible commitment at lam={lam}")
        x = res.x.reshape(n_k, n_c).T
        value = float(self.w @ (x * self.U).sum(axis=0))
        spend = float(lam * self.w @ (x * self.PO).sum(axis=0))
        mixture = _mixture_from_block(x, self.atoms, self.cands, self.v_os,
                                      self.problem.cap)
        return FrontierPoint(spend, value, float(lam), mixture)

    def null_point(self) -> FrontierPoint:
        return FrontierPoint(0.0, 0.0, None,
                             ((1.0, Zero(cap=self.problem.cap)),))

    def pareto_points(self) -> list[FrontierPoint]:
        """Supporting points of the value-spend envelope over a slope sweep."""
        pts = []
        for kappa in np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 31)]):
            _, arg = self.reward(float(kappa))
            if arg is not None:
                pts.append(self.point(*arg))
        return _pareto(pts)


def _mixture_from_block(x: np.ndarray, atoms: list[BidPolicy],
                        cands: np.ndarray, v_os, cap: float):
    """Turn per-group candidate weights (columns of x summing to 1) into a
    mixture of declaration policies."""
    n_c, n_k = x.shape
    if n_k == 1 or v_os is None:
        return tuple((float(x[ci, 0]), atoms[ci])
                     for ci in range(n_c) if x[ci, 0] > 1e-9)
    breaks = tuple(0.5 * (a + b) for a, b in zip(v_os, v_os[1:]))
    maps: list[tuple[tuple[float, ...], float]] = [((), 1.0)]
    for k in range(n_k):
        support = [(ci, x[ci, k]) for ci in range(n_c) if x[ci, k] > 1e-9]
        total = sum(q for _, q in support)
        maps = [(vals + (float(cands[ci]),), wt * q / total)
                for vals, wt in maps for ci, q in support]
    return tuple((float(wt), PiecewiseConstant(breaks, vals, cap=cap))
                 for vals, wt in maps if wt > 1e-12)


def _make_cloud(problem: AuctionBseProblem):
    """Constant declarations suffice for a scalar own value; otherwise the
    declaration conditions on it and needs the per-group cloud."""
    joint = as_discrete(problem.dist)
    if joint is not None and len({v_o for _, v_o, _ in joint.atoms}) > 1:
        return _GroupCloud(problem)
    return _DiscreteCloud(problem)


def _pareto_indices(S: np.ndarray, V: np.ndarray) -> np.ndarray:
    order = np.lexsort((-V, S))
    keep = []
    best = -np.inf
    for k in order:
        if V[k] > best + 1e-15:
            keep.append(k)
            best = V[k]
    return np.asarray(keep, dtype=int)


def _pareto(points: list[FrontierPoint]) -> list[FrontierPoint]:
    pts = sorted(points, key=lambda p: (p.spend, -p.value))
    out: list[FrontierPoint] = []
    best = -np.inf
    for p in pts:
        if p.value > best + 1e-15:
            out.append(p)
            best = p.value
    return out


def _upper_hull(points: list[FrontierPoint]) -> list[FrontierPoint]:
    """Upper concave hull of Pareto points by spend (monotone chain)."""
    pts = _pareto(points)
    hull: list[FrontierPoint] = []
    for p in pts:
        while len(hull) >= 2:
            (s1, v1), (s2, v2) = (hull[-2].spend, hull[-2].value), (hull[-1].spend, hull[-1].value)
            if (v2 - v1) * (p.spend - s2) <= (p.value - v2) * (s2 - s1) + 1e-15:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _envelope_at(hull: list[FrontierPoint], rho_O: float):
    """Value of the concave envelope at spend rho_O, with the mixing phases."""
    if rho_O >= hull[-1].spend:
        return hull[-1].value, [(1.0, hull[-1])]
    for a, b in zip(hull, hull[1:]):
        if a.spend - 1e-15 <= rho_O <= b.spend + 1e-15:
            span = b.spend - a.spend
            q = 0.0 if span < 1e-15 else (rho_O - a.spend) / span
            return a.value + q * (b.value - a.value), [(1.0 - q, a), (q, b)]
    # rho_O below the smallest hull spend, which is 0 by construction
    return hull[0].value, [(1.0, hull[0])]


def auction_phase_frontier(problem: AuctionBseProblem) -> list[FrontierPoint]:
    """Pareto-efficient (spend, value) commitments, one phase each."""
    if isinstance(problem.dist, IndependentUniform):
        pts = _uniform_efficient_points(problem)
        return _pareto(pts)
    cloud = _make_cloud(problem)
    return _pareto([cloud.null_point()] + cloud.pareto_points())


def auction_bse(problem: AuctionBseProblem) -> AuctionBseSolution:
    """Optimal <=2-phase commitment at the optimizer budget rho_O."""
    if isinstance(problem.dist, IndependentUniform):
        pts = _uniform_efficient_points(problem, polish_for=problem.rho_O)
    else:
        cloud = _make_cloud(problem)
        pts = [cloud.null_point()] + cloud.pareto_points()
        # cutting-plane polish: push the envelope segment at rho_O outward
        for _ in range(4 if isinstance(cloud, _DiscreteCloud) else 8):
            hull = _upper_hull(pts)
            value, weighted = _envelope_at(hull, problem.rho_O)
            if len(weighted) < 2:
                break
            (wa, a), (wb, b) = weighted
            span = b.spend - a.spend
            if span < 1e-14:
                break
            kappa = (b.value - a.value) / span
            r, arg = cloud.reward(kappa)
            line = a.value - kappa * a.spend
            if arg is None or r <= line + 1e-12:
                break
            pts.append(cloud.point(*arg))
    hull = _upper_hull(pts)
    value, weighted = _envelope_at(hull, problem.rho_O)
    phases = tuple(
        AuctionPhase(w, pt.mixture, pt.lam, pt.spend, pt.value)
        for w, pt in weighted if w > 1e-12
    )
    spend = sum(ph.weight * ph.spend for ph in phases)
    return AuctionBseSolution(phases=phases, value=float(value), spend=float(spend))


def auction_se(problem: AuctionBseProblem, rho_O: float | None = None):
    """Best single (mixture, lam) phase with spend at most the budget.

    Unlike the two-phase optimum this cannot time-share with the zero
    declaration, so its value is the restricted one-commitment benchmark.
    Returns (value, lam, mixture weights over the candidate atoms).
    """
    from scipy.optimize import linprog

    if rho_O is None:
        rho_O = problem.rho_O
    atoms = _policy_atoms(problem)
    cloud = _make_cloud(problem)
    if isinstance(cloud, _GroupCloud):
        w_g, U, PO, PL = cloud.w, cloud.U, cloud.PO, cloud.PL
        n_c, n_k = U.shape
        obj = -(w_g[None, :] * U).ravel(order="F")
        a_eq = np.kron(np.eye(n_k), np.ones(n_c))

        def solve(lam):
            a_ub = np.vstack([-(lam * w_g[None, :] * PL).ravel(order="F"),
                              (lam * w_g[None, :] * PO).ravel(order="F")])
            res = linprog(obj, A_ub=a_ub, b_ub=[-problem.rho_L, rho_O],
                          A_eq=a_eq, b_eq=np.ones(n_k),
                          bounds=[(0, None)] * (n_c * n_k), method="highs")
            return (-res.fun, res.x) if res.status == 0 else (-1e3, None)

        lam_min = problem.rho_L / cloud.pl_bar
        lam_values = np.geomspace(lam_min * (1.0 + 1e-9), lam_min * 500.0,
                                  problem.n_lam)
    else:
        u, p_o, p_l = _atom_triples(problem, atoms)
        lam_values = _lam_grid(problem, p_l)

        def solve(lam):
            res = linprog(-u, A_ub=np.vstack([-lam * p_l, lam * p_o]),
                          b_ub=[-problem.rho_L, rho_O],
                          A_eq=np.ones((1, len(u))), b_eq=[1.0],
                          bounds=[(0, None)] * len(u), method="highs")
            # finite sentinel keeps the bracket refinement numerically happy
            return (-res.fun, res.x) if res.status == 0 else (-1e3, None)

    vals = [solve(l)[0] for l in lam_values]
    k = int(np.argmax(vals))
    if vals[k] <= -1e3 + 1:
        raise EmptyFrontier("no single phase satisfies both budgets")
    lo = lam_values[max(k - 1, 0)]
    hi = lam_values[min(k + 1, len(lam_values) - 1)]
    res = minimize_scalar(lambda l: -solve(l)[0], bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-7})
    lam = float(res.x)
    val, w = solve(lam)
    if isinstance(cloud, _GroupCloud):
        x = w.reshape(cloud.U.shape[1], cloud.U.shape[0]).T
        mixture = _mixture_from_block(x, atoms, cloud.cands, cloud.v_os,
                                      problem.cap)
    else:
        mixture = tuple((float(wi), atoms[i]) for i, wi in enumerate(w)
                        if wi > 1e-9)
    return float(val), lam, mixture


def _pair_best(u, p_o, p_l, i, j, mu, rho_L):
    """Best budget-binding mixture of atoms i and j for reward u - mu*spend."""

    def neg(q):
        pl = q * p_l[i] + (1 - q) * p_l[j]
        if pl <= _TOL:
            return 0.0
        spend = rho_L * (q * p_o[i] + (1 - q) * p_o[j]) / pl
        return -(q * u[i] + (1 - q) * u[j] - mu * spend)

    res = minimize_scalar(neg, bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": 1e-10})
    return -res.fun, res.x


def lagrangian_reward(problem: AuctionBseProblem, mu: float,
                      _cloud: "_DiscreteCloud | _GroupCloud | None" = None):
    """Max phase reward U_O - mu * lam * P_O over budget-feasible phases.

    Zero declaration is always available, so the reward is at least 0.
    Returns (reward, phase) where the phase is None when declaring zero wins.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if isinstance(problem.dist, IndependentUniform):
        return _uniform_lagrangian_reward(problem, mu)
    if _cloud is None:
        _cloud = _make_cloud(problem)
    best, arg = _cloud.reward(mu)
    return best, (None if arg is None else _cloud.point(*arg))


def dual_opt(problem: AuctionBseProblem):
    """Strong-duality value: OPT = min_mu R*(mu) + mu * rho_O.

    Returns (OPT, mu_star, R_star_at_mu_star).
    """
    if problem.dist.mean_optimizer <= 0 or problem.dist.mean_learner <= 0:
        raise DegenerateDistribution("both players need positive expected value")
    if isinstance(problem.dist, IndependentUniform):
        reward = lambda mu: _uniform_lagrangian_reward(problem, mu)[0]
    else:
        cloud = _make_cloud(problem)
        reward = lambda mu: cloud.reward(mu)[0]
    mu_hi = problem.dist.mean_optimizer / max(problem.rho_O, 1e-12) + 1.0
    res = minimize_scalar(lambda m: reward(m) + m * problem.rho_O,
                          bounds=(0.0, mu_hi), method="bounded",
                          options={"xatol": 1e-9})
    mu_star = float(res.x)
    r_star = float(reward(mu_star))
    return float(res.fun), mu_star, r_star


# ---------------------------------------------------------------------------
# independent-uniform specialization (second price)


def uniform_dual_f(lam: float, g: float, mu: float, rho_L: float) -> float:
    """Closed-form sup over fake-value maps of the doubly relaxed reward,
    second price, both values independent uniform on [0, 1].

    Per own-value v the inner optimum is v_hat = (v - lam*g) / (lam*(mu - 2g)),
    clipped to [0, 1]; declarations above 1 change nothing.
    """
    if lam <= 0.0:
        return 0.5 + g * rho_L
    denom = 2.0 * lam * (mu - 2.0 * g)
    if denom <= 0.0:
        raise ValueError("need mu > 2g for a concave inner problem")
    c = lam * (mu - g)  # own value where the clip at 1 starts binding

    def interior(v):  # antiderivative of (v - g*lam)^2 / denom
        return (v - g * lam) ** 3 / (3.0 * denom)

    if c >= 1.0:
        val = interior(1.0) - interior(0.0)
    else:
        val = interior(c) - interior(0.0)
        # clipped branch: v_hat = 1, reward v - g*lam - lam*(mu - 2g)/2
        lo, hi = c, 1.0
        val += 0.5 * (hi * hi - lo * lo) - (g * lam + 0.5 * lam * (mu - 2.0 * g)) * (hi - lo)
    return val + g * rho_L


def _uniform_lagrangian_reward(problem: AuctionBseProblem, mu: float):
    """R*(mu) for independent uniforms: sup over lam of inf over g <= 0 of f."""
    if problem.fmt is not AuctionFormat.SecondPrice:
        raise NotImplementedError("uniform dual path covers second price only")
    rho_L = problem.rho_L
    g_lo = -3.0 * (0.5 / rho_L) - 1.0

    def inner(lam):
        res = minimize_scalar(lambda g: uniform_dual_f(lam, g, mu, rho_L),
                              bounds=(g_lo, 0.0), method="bounded",
                              options={"xatol": 1e-11})
        return float(res.fun)

    lams = np.linspace(rho_L, max(60.0 * rho_L, 60.0), 160)
    vals = [inner(l) for l in lams]
    k = int(np.argmax(vals))
    lo = lams[max(k - 1, 0)]
    hi = lams[min(k + 1, len(lams) - 1)]
    res = minimize_scalar(lambda l: -inner(l), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-9})
    best = max(0.0, -res.fun)
    return best, float(res.x)


def _uniform_triple(problem, a, b):
    return expected_triple(problem.fmt, AffineClipped(a, b, cap=problem.cap),
                           problem.dist)


def _uniform_efficient_points(problem: AuctionBseProblem,
                              polish_for: float | None = None):
    """Budget-binding (spend, value) points over the clipped-affine family."""
    rho_L = problem.rho_L
    pts = [FrontierPoint(0.0, 0.0, None, ((1.0, Zero(cap=problem.cap)),))]

    def point(a, b):
        u, p_o, p_l = _uniform_triple(problem, a, b)
        if p_l <= 1e-9:
            return None
        lam = rho_L / p_l
        return FrontierPoint(lam * p_o, u, lam,
                             ((1.0, AffineClipped(a, b, cap=problem.cap)),))

    grid_a = np.linspace(0.0, 2.0, 21)
    grid_b = np.linspace(0.0, 1.0, 21)
    for a in grid_a:
        for b in grid_b:
            p = point(a, b)
            if p is not None:
                pts.append(p)
    if polish_for is not None:
        rho_O = polish_for

        def neg_score(ab):
            a, b = ab
            u, p_o, p_l = _uniform_triple(problem, a, b)
            if p_l <= 1e-9:
                return 0.0
            spend = rho_L * p_o / p_l
            # mixing with the zero declaration scales value down to the budget
            return -(u if spend <= rho_O else u * rho_O / spend)

        order = sorted(pts[1:], key=lambda p: -(p.value if p.spend <= rho_O
                                                else p.value * rho_O / p.spend))
        for seed in order[:3]:
            pol = seed.mixture[0][1]
            res = minimize(neg_score, x0=[pol.a, pol.b], method="Nelder-Mead",
                           options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 400})
            p = point(res.x[0], res.x[1])
            if p is not None:
                pts.append(p)
    return pts
