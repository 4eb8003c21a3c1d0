"""Dual multiplier curves and the drift-potential certificate.

After fixing the optimizer-budget multiplier mu, relaxing the learner's
per-multiplier budget identity with a second multiplier g gives the dual
function f(lam, g).  The curve g*(lam) is the largest nonpositive g keeping
f at or below the top Lagrangian reward R*; averaging it over a window sigma
and integrating its tail yields the potential G_sigma whose affine bound
A*tau + G_sigma(lam)/eta certifies a cap on the value-iteration table R_tau.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .auction import AuctionFormat
from .auction_bse import (
    AuctionBseProblem,
    _group_tables,
    _policy_atoms,
    dual_opt,
    uniform_dual_f,
)
from .distributions import IndependentUniform, as_discrete
from .errors import GridEscape, UnboundedPotential

_F_TOL = 1e-12
_G_MAX_FACTOR = 1e6


@dataclass(frozen=True)
class DualCurve:
    lam_grid: np.ndarray
    g_star: np.ndarray
    sigma: float
    g_star_sigma: np.ndarray
    G_sigma: np.ndarray
    mu: float
    R_star: float
    rho_L: float
    lam_bar: float | None


class DualSetting:
    """A problem with its budget multiplier mu and reward level R* fixed.

    Precomputes, for discrete and scalar-value distributions, the per-own-value
    stage tables over the candidate declaration grid so f evaluations are
    cheap table maximizations.
    """

    def __init__(self, problem: AuctionBseProblem, mu: float | None = None,
                 R_star: float | None = None):
        if mu is None or R_star is None:
            _, mu, R_star = dual_opt(problem)
        self.problem = problem
        self.mu = float(mu)
        self.R_star = float(R_star)
        self.rho_L = problem.rho_L
        self._uniform = isinstance(problem.dist, IndependentUniform)
        if self._uniform:
            if problem.fmt is not AuctionFormat.SecondPrice:
                raise NotImplementedError("uniform dual path covers second price only")
            self.atoms = None
        else:
            self.atoms = _policy_atoms(problem)
            self._build_tables()

    def _build_tables(self):
        self.w, self.U, self.PO, self.PL, _ = _group_tables(self.problem,
                                                            self.atoms)

    def f(self, lam: float, g: float) -> float:
        """sup over declarations of U_O - mu*lam*P_O + g*(rho_L - lam*P_L)."""
        if self._uniform:
            return uniform_dual_f(lam, g, self.mu, self.rho_L)
        stage = self.U - self.mu * lam * self.PO - g * lam * self.PL
        return g * self.rho_L + float(self.w @ stage.max(axis=0))

    def g_star(self, lam: float) -> float:
        """Largest g <= 0 with f(lam, g) <= R*; -inf when none exists."""
        if self.f(lam, 0.0) <= self.R_star + 1e-9:
            return 0.0
        level = self.R_star + _F_TOL
        g_max = _G_MAX_FACTOR * max(1.0, self.problem.dist.mean_optimizer / self.rho_L)
        # f is convex in g, so locate its minimum before bisecting the level set
        from scipy.optimize import minimize_scalar
        res = minimize_scalar(lambda g: self.f(lam, g), bounds=(-g_max, 0.0),
                              method="bounded", options={"xatol": 1e-12})
        if res.fun > level:
            return -math.inf
        lo = float(res.x)  # feasible end
        hi = 0.0  # infeasible end
        anchor = (self.problem.dist.mean_optimizer - self.R_star) / self.rho_L
        tol = 1e-10 * max(1.0, anchor)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.f(lam, mid) <= level:
                lo = mid
            else:
                hi = mid
        return lo


def dual_f(setting: DualSetting, lam: float, g: float) -> float:
    return setting.f(lam, g)


def g_star(setting: DualSetting, lam: float) -> float:
    return setting.g_star(lam)


def lam_bar_bound(setting: DualSetting) -> float | None:
    """Closed-form multiplier beyond which g* must vanish, when separation holds."""
    eps = setting.problem.dist.eps_sep
    if eps is None or eps <= 0 or not np.isfinite(eps) or setting.mu <= 0:
        return None
    return 1.0 / (setting.mu * eps)


def smooth_and_integrate(setting: DualSetting, sigma: float,
                         lam_max: float | None = None,
                         step: float | None = None) -> DualCurve:
    """Sample g*, average it over a sigma window, and integrate the tail.

    Raises UnboundedPotential (with the partial curve attached) if g* never
    reaches zero below ``lam_max``.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    h0 = step if step is not None else min(sigma / 8.0, 0.01)
    m = max(1, math.ceil(sigma / h0))
    h = sigma / m

    if lam_max is None:
        bound = lam_bar_bound(setting)
        lam_max = 2.0 * bound + 1.0 if bound is not None else \
            50.0 * max(1.0, setting.rho_L)

    # coarse upward scan for the first vanishing point of g*
    lam_bar = None
    coarse = 32 * h
    lam = 0.0
    while lam <= lam_max:
        if setting.g_star(lam) == 0.0:
            lo = max(0.0, lam - coarse)
            while lam - lo > h / 2:
                mid = 0.5 * (lo + lam)
                if setting.g_star(mid) == 0.0:
                    lam = mid
                else:
                    lo = mid
            lam_bar = lam
            break
        lam += coarse

    top = (lam_bar if lam_bar is not None else lam_max) + 2.0 * sigma
    n = math.ceil(top / h) + 1
    grid = np.arange(n) * h
    g = np.array([0.0 if (lam_bar is not None and x >= lam_bar - 1e-12)
                  else setting.g_star(x) for x in grid])
    if not np.all(np.isfinite(g)):
        lam_bar = None
    if lam_bar is None:
        curve = DualCurve(grid, g, sigma, np.full_like(g, np.nan),
                          np.full_like(g, np.nan), setting.mu, setting.R_star,
                          setting.rho_L, None)
        err = UnboundedPotential(
            "g* does not vanish on the scanned grid; manipulable regime")
        err.curve = curve
        raise err
    # refresh the exact vanishing point on the fine grid
    nz = np.nonzero(g >= -1e-15)[0]
    lam_bar = float(grid[nz[0]]) if nz.size else lam_bar

    # window average: trapezoid over [lam, lam + sigma] with sigma = m*h
    gp = np.concatenate([g, np.zeros(m + 1)])
    csum = np.cumsum(gp)
    inner = csum[np.arange(n) + m - 1] - np.where(np.arange(n) > 0,
                                                 csum[np.arange(n) - 1], 0.0)
    g_sigma = (h / sigma) * (inner + 0.5 * (gp[np.arange(n) + m] - gp[np.arange(n)]))

    # tail integral, trapezoid from the top of the grid (zero beyond)
    neg = -g_sigma
    G = np.zeros(n)
    G[:-1] = np.cumsum((0.5 * (neg[:-1] + neg[1:]) * h)[::-1])[::-1]
    return DualCurve(grid, g, sigma, g_sigma, G, setting.mu, setting.R_star,
                     setting.rho_L, lam_bar)


def separation_constant(curve: DualCurve, eta: float) -> float:
    """Per-round constant A in the certificate R_tau <= A*tau + G_sigma/eta."""
    if curve.lam_bar is None:
        raise ValueError("separation constant needs a finite vanishing point")
    lam_bar = max(curve.lam_bar, curve.rho_L)
    g0 = curve.g_star[0]
    quad = curve.rho_L ** 2 + ((lam_bar - eta * curve.rho_L) / (1.0 - eta)) ** 2
    return curve.R_star + curve.mu * curve.sigma - eta * (quad / curve.sigma) * g0


def dp_oracle(setting: DualSetting, eta: float, lam_grid: np.ndarray,
              tau_max: int) -> np.ndarray:
    """Value-iteration table R[tau, i] over the requested multiplier grid.

    The working grid is extended upward by tau_max*eta*rho_L so that clamped
    interpolation at the top edge cannot leak into the requested region; a
    GridEscape warning fires if a transition still lands past the edge.
    """
    if setting._uniform:
        raise NotImplementedError("the value-iteration oracle needs a discrete grid")
    joint = as_discrete(setting.problem.dist)
    if joint is None:
        # scalar own value: expected transitions via the stage tables
        return _dp_scalar(setting, eta, lam_grid, tau_max)
    first = setting.problem.fmt is AuctionFormat.FirstPrice
    cands = np.array([a.c for a in setting.atoms])
    lam_grid = np.asarray(lam_grid, dtype=float)
    h = np.diff(lam_grid).min()
    ext = np.arange(lam_grid[-1] + h, lam_grid[-1] + tau_max * eta * setting.rho_L + 2 * h, h)
    full = np.concatenate([lam_grid, ext])
    n_req = lam_grid.size

    groups: dict[float, list[tuple[float, float]]] = {}
    for v_l, v_o, p in joint.atoms:
        groups.setdefault(v_o, []).append((v_l, p))
    v_os = sorted(groups)
    w = np.array([sum(p for _, p in groups[v]) for v in v_os])

    # realized per-(candidate, conditional atom) stage pieces
    per_group = []
    for v_o in v_os:
        mass = sum(p for _, p in groups[v_o])
        rows = []
        for c in cands:
            terms = []
            for v_l, p in groups[v_o]:
                cond = p / mass
                if c > v_l:
                    u_r, po_r, pl_r = v_o, (c if first else v_l), 0.0
                else:
                    u_r, po_r, pl_r = 0.0, 0.0, (v_l if first else c)
                terms.append((cond, u_r, po_r, pl_r))
            rows.append(terms)
        per_group.append(rows)

    table = np.zeros((tau_max + 1, n_req))
    R_prev = np.zeros(full.size)
    warned = False
    top = full[-1]
    for tau in range(1, tau_max + 1):
        R_new = np.zeros(full.size)
        for k in range(len(v_os)):
            best = None
            rows = per_group[k]
            for ci in range(len(cands)):
                acc = np.zeros(full.size)
                for cond, u_r, po_r, pl_r in rows[ci]:
                    nxt = full * (1.0 - eta * pl_r) + eta * setting.rho_L
                    if not warned and nxt[-1] > top + max(h, eta * setting.rho_L) + 1e-12:
                        warnings.warn("transition passed the top of the grid",
                                      GridEscape)
                        warned = True
                    acc += cond * (u_r - setting.mu * full * po_r
                                   + np.interp(nxt, full, R_prev))
                best = acc if best is None else np.maximum(best, acc)
            R_new += w[k] * best
        R_prev = R_new
        table[tau] = R_new[:n_req]
    return table


def _dp_scalar(setting: DualSetting, eta: float, lam_grid: np.ndarray,
               tau_max: int) -> np.ndarray:
    """Expected-transition value iteration for scalar-own-value distributions."""
    lam_grid = np.asarray(lam_grid, dtype=float)
    h = np.diff(lam_grid).min()
    ext = np.arange(lam_grid[-1] + h,
                    lam_grid[-1] + tau_max * eta * setting.rho_L + 2 * h, h)
    full = np.concatenate([lam_grid, ext])
    n_req = lam_grid.size
    u, p_o, p_l = setting.U[:, 0], setting.PO[:, 0], setting.PL[:, 0]
    table = np.zeros((tau_max + 1, n_req))
    R_prev = np.zeros(full.size)
    for tau in range(1, tau_max + 1):
        best = None
        for ci in range(u.size):
            nxt = full * (1.0 - eta * p_l[ci]) + eta * setting.rho_L
            acc = u[ci] - setting.mu * full * p_o[ci] + np.interp(nxt, full, R_prev)
            best = acc if best is None else np.maximum(best, acc)
        R_prev = best
        table[tau] = best[:n_req]
    return table


def interpolation_slack(table: np.ndarray, lam_grid: np.ndarray) -> float:
    """Per-round interpolation tolerance: grid step times the steepest
    per-round slope of the value table (finite differences)."""
    h = float(np.diff(lam_grid).min())
    lip = 0.0
    for tau in range(1, table.shape[0]):
        slopes = np.abs(np.diff(table[tau])) / np.diff(lam_grid)
        lip = max(lip, slopes.max() / tau)
    return lip * h


def certify(table: np.ndarray, lam_grid: np.ndarray, curve: DualCurve,
            eta: float) -> tuple[bool, float]:
    """Check R_tau(lam) <= A*tau + G_sigma(lam)/eta + slack*tau on every cell.

    Returns (ok, worst margin) where positive margins mean the bound holds.
    """
    A = separation_constant(curve, eta)
    slack = interpolation_slack(table, lam_grid)
    G = np.interp(lam_grid, curve.lam_grid, curve.G_sigma)
    worst = np.inf
    for tau in range(table.shape[0]):
        bound = A * tau + G / eta + slack * tau
        worst = min(worst, float(np.min(bound - table[tau])))
    return worst >= -1e-9, worst
