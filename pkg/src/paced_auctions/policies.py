"""Fake-value bid policies: maps from the optimizer's value to a declared value.

The optimizer's actual bid is the learner's current pacing multiplier times
the fake value, so policies only describe the declared-value map on [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_CAP = 2.0


@dataclass(frozen=True)
class Constant:
    """Declare the same fake value for every own value."""

    c: float
    cap: float = DEFAULT_CAP

    def __post_init__(self):
        if not (0.0 <= self.c <= self.cap):
            raise ValueError(f"constant {self.c} outside [0, {self.cap}]")

    def __call__(self, v_o):
        return np.clip(np.broadcast_to(self.c, np.shape(v_o)), 0.0, self.cap) \
            if np.ndim(v_o) else min(max(self.c, 0.0), self.cap)

    def breakpoints(self) -> list[float]:
        return []


@dataclass(frozen=True)
class AffineClipped:
    """v̂ = clip(a·v_O + b, lo, hi), further clipped to [0, cap]."""

    a: float
    b: float
    lo: float = 0.0
    hi: float = DEFAULT_CAP
    cap: float = DEFAULT_CAP

    def __call__(self, v_o):
        raw = self.a * np.asarray(v_o, dtype=float) + self.b
        out = np.clip(raw, max(self.lo, 0.0), min(self.hi, self.cap))
        return float(out) if np.ndim(v_o) == 0 else out

    def breakpoints(self) -> list[float]:
        pts = []
        if self.a != 0.0:
            for level in (max(self.lo, 0.0), min(self.hi, self.cap), 0.0, 1.0):
                x = (level - self.b) / self.a
                if 0.0 < x < 1.0:
                    pts.append(x)
        return sorted(set(pts))


@dataclass(frozen=True)
class PiecewiseConstant:
    """Step function on [0, 1]: fake value values[i] on [breaks[i], breaks[i+1]).

    ``breaks`` are the interior breakpoints (strictly increasing, within (0,1));
    ``values`` has one more entry than ``breaks``.
    """

    breaks: tuple[float, ...]
    values: tuple[float, ...]
    cap: float = DEFAULT_CAP

    def __post_init__(self):
        if len(self.values) != len(self.breaks) + 1:
            raise ValueError("need len(values) == len(breaks) + 1")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(not (0.0 < b < 1.0) for b in self.breaks):
            raise ValueError("breakpoints must lie in (0, 1)")
        if any(not (0.0 <= v <= self.cap) for v in self.values):
            raise ValueError("values must lie in [0, cap]")

    def __call__(self, v_o):
        idx = np.searchsorted(np.asarray(self.breaks), np.asarray(v_o, dtype=float),
                              side="right")
        out = np.asarray(self.values, dtype=float)[idx]
        return float(out) if np.ndim(v_o) == 0 else out

    def breakpoints(self) -> list[float]:
        return list(self.breaks)


@dataclass(frozen=True)
class PacingMirror:
    """Declare the true own value: v̂ = v_O."""

    cap: float = DEFAULT_CAP

    def __call__(self, v_o):
        out = np.clip(np.asarray(v_o, dtype=float), 0.0, self.cap)
        return float(out) if np.ndim(v_o) == 0 else out

    def breakpoints(self) -> list[float]:
        return []


@dataclass(frozen=True)
class Zero:
    """Always declare 0: never wins, never pays."""

    cap: float = DEFAULT_CAP

    def __call__(self, v_o):
        out = np.zeros(np.shape(v_o))
        return 0.0 if np.ndim(v_o) == 0 else out

    def breakpoints(self) -> list[float]:
        return []


BidPolicy = Constant | AffineClipped | PiecewiseConstant | PacingMirror | Zero
