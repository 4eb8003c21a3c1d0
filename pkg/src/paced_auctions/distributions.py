"""Joint value distributions for the learner/optimizer auction game.

All distributions live on [0, 1]^2.  Discrete families support exact
expectations; the two continuous families (independent uniforms and the
heavy-near-zero CDF example) carry closed forms where available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_PROB_TOL = 1e-12


def _check_unit(x: float, name: str) -> None:
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


@dataclass(frozen=True)
class DiscreteJoint:
    """Finite support joint law: atoms of (v_L, v_O, probability)."""

    atoms: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("DiscreteJoint needs at least one atom")
        total = 0.0
        for v_l, v_o, p in self.atoms:
            _check_unit(v_l, "v_L")
            _check_unit(v_o, "v_O")
            if p < 0:
                raise ValueError(f"negative probability {p}")
            total += p
        if abs(total - 1.0) > _PROB_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @property
    def eps_sep(self) -> float:
        """Smallest positive v_L divided by the largest v_O in the support."""
        pos = [v_l for v_l, _, p in self.atoms if v_l > 0 and p > 0]
        vo_max = max(v_o for _, v_o, p in self.atoms if p > 0)
        if not pos:
            return math.inf
        if vo_max == 0:
            return 0.0
        return min(pos) / vo_max

    @property
    def mean_learner(self) -> float:
        return sum(p * v_l for v_l, _, p in self.atoms)

    @property
    def mean_optimizer(self) -> float:
        return sum(p * v_o for _, v_o, p in self.atoms)

    def learner_support(self) -> list[float]:
        return sorted({v_l for v_l, _, p in self.atoms if p > 0})

    def optimizer_support(self) -> list[float]:
        return sorted({v_o for _, v_o, p in self.atoms if p > 0})

    def sample(self, n: int, rng: np.random.Generator):
        cum = np.cumsum([p for _, _, p in self.atoms])
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(n), side="right")
        v_l = np.array([a[0] for a in self.atoms])[idx]
        v_o = np.array([a[1] for a in self.atoms])[idx]
        return v_l, v_o


@dataclass(frozen=True)
class IndependentUniform:
    """v_L and v_O independent uniforms on [0, 1]."""

    @property
    def eps_sep(self) -> float:
        return 0.0

    @property
    def mean_learner(self) -> float:
        return 0.5

    @property
    def mean_optimizer(self) -> float:
        return 0.5

    def sample(self, n: int, rng: np.random.Generator):
        return rng.random(n), rng.random(n)


@dataclass(frozen=True)
class ProductOf:
    """Independent discrete marginals, each a tuple of (value, probability)."""

    marginal_L: tuple[tuple[float, float], ...]
    marginal_O: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for name, marg in (("learner", self.marginal_L), ("optimizer", self.marginal_O)):
            total = 0.0
            for v, p in marg:
                _check_unit(v, f"{name} value")
                if p < 0:
                    raise ValueError("negative probability")
                total += p
            if abs(total - 1.0) > _PROB_TOL:
                raise ValueError(f"{name} marginal sums to {total}, not 1")

    def as_joint(self) -> DiscreteJoint:
        atoms = tuple(
            (v_l, v_o, p_l * p_o)
            for v_l, p_l in self.marginal_L
            for v_o, p_o in self.marginal_O
        )
        return DiscreteJoint(atoms)

    @property
    def eps_sep(self) -> float:
        return self.as_joint().eps_sep

    @property
    def mean_learner(self) -> float:
        return sum(p * v for v, p in self.marginal_L)

    @property
    def mean_optimizer(self) -> float:
        return sum(p * v for v, p in self.marginal_O)

    def sample(self, n: int, rng: np.random.Generator):
        return self.as_joint().sample(n, rng)


@dataclass(frozen=True)
class DeltaCdfExample:
    """Learner CDF F_L(x) = (2x)^delta / 2 on [0, 1/2], flat 1/2 up to an atom
    of mass 1/2 at x = 1; the optimizer's value is identically 1.

    Heavy mass near zero: the separation parameter is 0, so this family sits
    outside the non-manipulability regime.
    """

    delta: float

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")

    @property
    def eps_sep(self) -> float:
        return 0.0

    @property
    def mean_learner(self) -> float:
        d = self.delta
        return d / (4.0 * (1.0 + d)) + 0.5

    @property
    def mean_optimizer(self) -> float:
        return 1.0

    def cdf_learner(self, x: float) -> float:
        if x < 0:
            return 0.0
        if x <= 0.5:
            return 0.5 * (2.0 * x) ** self.delta
        if x < 1.0:
            return 0.5
        return 1.0

    def learner_partial_mean(self, x: float) -> float:
        """E[v_L 1{v_L < x}] in closed form."""
        d = self.delta
        if x <= 0:
            return 0.0
        x = min(x, 0.5)
        contrib = d * x ** (1.0 + d) * 2.0 ** (d - 1.0) / (1.0 + d)
        # the atom at 1 only enters for x > 1, where v_L < x includes it
        return contrib

    def sample(self, n: int, rng: np.random.Generator):
        u = rng.random(n)
        v_l = np.where(u < 0.5, 0.5 * (2.0 * u) ** (1.0 / self.delta), 1.0)
        return v_l, np.ones(n)


ValueDistribution = DiscreteJoint | IndependentUniform | ProductOf | DeltaCdfExample


def as_discrete(dist: ValueDistribution) -> DiscreteJoint | None:
    """Return an exact finite-support representation, if one exists."""
    if isinstance(dist, DiscreteJoint):
        return dist
    if isinstance(dist, ProductOf):
        return dist.as_joint()
    return None


def candidate_fake_values(dist: ValueDistribution, cap: float = 2.0) -> list[float]:
    """Fake-value grid that dominates all threshold bids against ``dist``.

    Learner support points lose ties, so midpoints between consecutive
    support values stand in for "just above" bids; 0 and the cap close the
    grid at both ends.
    """
    joint = as_discrete(dist)
    if joint is None:
        raise ValueError("candidate grid only defined for discrete distributions")
    support = joint.learner_support()
    grid = {0.0, cap}
    grid.update(support)
    pts = sorted(set(support) | {0.0})
    for a, b in zip(pts, pts[1:]):
        grid.add(0.5 * (a + b))
    if pts:
        grid.add(0.5 * (pts[-1] + cap))
    return sorted(v for v in grid if v <= cap)
