"""One-round auction rules and expected-value engines.

The learner bids lam * v_L and the optimizer bids lam * v_hat(v_O), so who wins
depends only on the declared values; payments scale linearly with lam.  The
expectation routines therefore return lam-free factors (U_O, P_O, P_L) and the
caller multiplies the payment factors by lam.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .distributions import (
    DeltaCdfExample,
    IndependentUniform,
    ValueDistribution,
    as_discrete,
)
from .errors import QuadratureNonConvergence
from .policies import BidPolicy

_QUAD_TOL = 1e-9


class AuctionFormat(enum.Enum):
    FirstPrice = "first-price"
    SecondPrice = "second-price"


class Winner(enum.Enum):
    Learner = "learner"
    Optimizer = "optimizer"


@dataclass(frozen=True)
class RoundOutcome:
    winner: Winner
    u_O: float
    p_O_scaled: float
    p_L_scaled: float


def round_outcome(fmt: AuctionFormat, policy: BidPolicy, lam: float,
                  v_L: float, v_O: float) -> RoundOutcome:
    """Resolve one round at pacing multiplier ``lam``; ties go to the learner."""
    if lam < 0:
        raise ValueError("pacing multiplier must be nonnegative")
    v_hat = policy(v_O)
    if v_hat > v_L:
        pay = v_hat if fmt is AuctionFormat.FirstPrice else v_L
        return RoundOutcome(Winner.Optimizer, v_O, lam * pay, 0.0)
    pay = v_L if fmt is AuctionFormat.FirstPrice else v_hat
    return RoundOutcome(Winner.Learner, 0.0, 0.0, lam * pay)


def _triple_discrete(fmt, policy, joint):
    u = p_o = p_l = 0.0
    for v_l, v_o, p in joint.atoms:
        v_hat = policy(v_o)
        if v_hat > v_l:
            u += p * v_o
            p_o += p * (v_hat if fmt is AuctionFormat.FirstPrice else v_l)
        else:
            p_l += p * (v_l if fmt is AuctionFormat.FirstPrice else v_hat)
    return u, p_o, p_l


def _triple_deltacdf(fmt, policy, dist):
    v_hat = policy(1.0)
    if v_hat <= 0.0:
        u = 0.0
    elif v_hat <= 0.5:
        u = 0.5 * (2.0 * v_hat) ** dist.delta
    elif v_hat <= 1.0:
        u = 0.5
    else:
        u = 1.0
    below = dist.learner_partial_mean(v_hat) + (0.5 if v_hat > 1.0 else 0.0)
    if fmt is AuctionFormat.SecondPrice:
        p_o = below
        p_l = v_hat * (1.0 - u)
    else:
        p_o = v_hat * u
        p_l = dist.mean_learner - below
    return u, p_o, p_l


def _uniform_integrands(fmt, policy):
    """Per-v_O conditional expectations for v_L uniform on [0, 1]."""

    def parts(v_o):
        v_hat = policy(v_o)
        w = min(max(v_hat, 0.0), 1.0)
        u = v_o * w
        if fmt is AuctionFormat.SecondPrice:
            p_o = 0.5 * w * w
            p_l = v_hat * (1.0 - w)
        else:
            p_o = v_hat * w
            p_l = 0.5 * (1.0 - w * w)
        return u, p_o, p_l

    return parts


def _triple_uniform(fmt, policy):
    parts = _uniform_integrands(fmt, policy)
    pts = [b for b in policy.breakpoints() if 0.0 < b < 1.0]
    out = []
    for i in range(3):
        val, err = quad(lambda v: parts(v)[i], 0.0, 1.0,
                        points=pts or None, epsabs=_QUAD_TOL, limit=200)
        if err > 1e-8:
            raise QuadratureNonConvergence(
                f"quadrature error {err:.2e} above tolerance")
        out.append(val)
    return tuple(out)


def expected_triple(fmt: AuctionFormat, policy: BidPolicy,
                    dist: ValueDistribution) -> tuple[float, float, float]:
    """Expected (U_O, P_O, P_L) with payments left unscaled by lam."""
    joint = as_discrete(dist)
    if joint is not None:
        return _triple_discrete(fmt, policy, joint)
    if isinstance(dist, DeltaCdfExample):
        return _triple_deltacdf(fmt, policy, dist)
    if isinstance(dist, IndependentUniform):
        return _triple_uniform(fmt, policy)
    raise TypeError(f"unsupported distribution {type(dist).__name__}")


def expected_triple_mixed(fmt: AuctionFormat,
                          mixture: list[tuple[float, BidPolicy]],
                          dist: ValueDistribution) -> tuple[float, float, float]:
    """Expectation of a weighted mixture over fake-value policies."""
    weights = [w for w, _ in mixture]
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    u = p_o = p_l = 0.0
    for w, pol in mixture:
        if w == 0.0:
            continue
        tu, tpo, tpl = expected_triple(fmt, pol, dist)
        u += w * tu
        p_o += w * tpo
        p_l += w * tpl
    return u, p_o, p_l
