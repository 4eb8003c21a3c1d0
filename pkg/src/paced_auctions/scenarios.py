"""Declarative scenario configs: named instances, TOML load/save, builders.

A Scenario bundles a value distribution (or a finite game), the auction
format, budgets, horizon, and an optional optimizer strategy.  Scenarios
round-trip losslessly through TOML so experiment configs can be versioned
and hand-edited.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import tomli

from .auction import AuctionFormat
from .distributions import (
    DeltaCdfExample,
    DiscreteJoint,
    IndependentUniform,
    ValueDistribution,
)
from .finite_games import FiniteGame
from .policies import AffineClipped, Constant, Zero
from .strategies import DrainManipulator, OptimizerStrategy, StaticPolicy

ETA_RULE = "T^{-2/3}"


@dataclass(frozen=True)
class Scenario:
    """A named experiment or solver instance.

    kind "auction" carries a distribution and budgets; kind "finite" carries
    payoff/payment matrices for the matrix-game solvers.  The strategy is
    optional: solver scenarios leave it None.
    """

    name: str
    kind: str = "auction"
    dist: ValueDistribution | None = None
    fmt: AuctionFormat = AuctionFormat.SecondPrice
    rho_L: float = 1.0
    rho_O: float = 0.25
    T: int = 100_000
    eta: float | str = ETA_RULE
    strategy: OptimizerStrategy | None = None
    seeds: tuple[int, ...] = (0,)
    game: tuple | None = None  # (U_O rows, U_L rows, payment matrices, budgets)

    def __post_init__(self):
        if self.kind not in ("auction", "finite"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "auction" and self.dist is None:
            raise ValueError("auction scenarios need a distribution")
        if self.kind == "finite" and self.game is None:
            raise ValueError("finite scenarios need game matrices")

    def finite_game(self) -> FiniteGame:
        if self.game is None:
            raise ValueError(f"scenario {self.name!r} has no finite game")
        u_o, u_l, payments, rho = self.game
        return FiniteGame(u_o, u_l, tuple(payments), tuple(rho))

    def sim_config(self, seed: int | None = None, **overrides):
        from .sim import SimConfig

        if self.strategy is None:
            raise ValueError(f"scenario {self.name!r} has no strategy to simulate")
        kw = dict(dist=self.dist, fmt=self.fmt, T=self.T, eta=self.eta,
                  rho_L=self.rho_L, rho_O=self.rho_O, strategy=self.strategy,
                  seed=self.seeds[0] if seed is None else seed)
        kw.update(overrides)
        return SimConfig(**kw)

    def problem(self, **overrides):
        from .auction_bse import AuctionBseProblem

        kw = dict(dist=self.dist, fmt=self.fmt, rho_L=self.rho_L,
                  rho_O=self.rho_O)
        kw.update(overrides)
        return AuctionBseProblem(**kw)


# ---------------------------------------------------------------------------
# TOML serialization


def _fmt_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        # repr round-trips doubles exactly through the TOML parser
        s = repr(x)
        return s if ("." in s or "e" in s or "inf" in s or "nan" in s) else s + ".0"
    if isinstance(x, str):
        return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt_value(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _emit_table(name: str | None, table: dict) -> list[str]:
    lines = []
    if name is not None:
        lines.append(f"[{name}]")
    for key, val in table.items():
        lines.append(f"{key} = {_fmt_value(val)}")
    return lines


def _dist_to_table(dist: ValueDistribution) -> dict:
    if isinstance(dist, DiscreteJoint):
        return {"kind": "discrete",
                "atoms": [list(a) for a in dist.atoms]}
    if isinstance(dist, IndependentUniform):
        return {"kind": "uniform"}
    if isinstance(dist, DeltaCdfExample):
        return {"kind": "delta_cdf", "delta": dist.delta}
    raise TypeError(f"cannot serialize distribution {type(dist).__name__}")


def _dist_from_table(table: dict) -> ValueDistribution:
    kind = table["kind"]
    if kind == "discrete":
        return DiscreteJoint(tuple(tuple(float(x) for x in a)
                                   for a in table["atoms"]))
    if kind == "uniform":
        return IndependentUniform()
    if kind == "delta_cdf":
        return DeltaCdfExample(float(table["delta"]))
    raise ValueError(f"unknown distribution kind {kind!r}")


def _strategy_to_table(strategy: OptimizerStrategy) -> dict:
    if isinstance(strategy, StaticPolicy):
        pol = strategy.policy
        if isinstance(pol, Zero):
            return {"kind": "zero", "cap": pol.cap}
        if isinstance(pol, Constant):
            return {"kind": "constant", "c": pol.c, "cap": pol.cap}
        if isinstance(pol, AffineClipped):
            return {"kind": "affine", "a": pol.a, "b": pol.b,
                    "lo": pol.lo, "hi": pol.hi, "cap": pol.cap}
        raise TypeError(f"cannot serialize policy {type(pol).__name__}")
    if isinstance(strategy, DrainManipulator):
        out = {"kind": "drain", "mu": strategy.mu, "cap": strategy.cap}
        if strategy.switch_round is not None:
            out["switch_round"] = int(strategy.switch_round)
        return out
    raise TypeError(f"cannot serialize strategy {type(strategy).__name__}")


def _strategy_from_table(table: dict) -> OptimizerStrategy:
    kind = table["kind"]
    cap = float(table.get("cap", 2.0))
    if kind == "zero":
        return StaticPolicy(Zero(cap=cap))
    if kind == "constant":
        return StaticPolicy(Constant(float(table["c"]), cap=cap))
    if kind == "affine":
        return StaticPolicy(AffineClipped(
            float(table["a"]), float(table["b"]),
            lo=float(table.get("lo", 0.0)), hi=float(table.get("hi", 2.0)),
            cap=cap))
    if kind == "drain":
        switch = table.get("switch_round")
        return DrainManipulator(float(table["mu"]),
                                switch_round=None if switch is None else int(switch),
                                cap=cap)
    raise ValueError(f"unknown strategy kind {kind!r}")


def to_toml(scenario: Scenario) -> str:
    top = {"name": scenario.name, "kind": scenario.kind}
    if scenario.kind == "auction":
        top.update(format="first_price" if scenario.fmt is AuctionFormat.FirstPrice
                   else "second_price",
                   rho_L=scenario.rho_L, rho_O=scenario.rho_O,
                   T=scenario.T, eta=scenario.eta,
                   seeds=list(scenario.seeds))
    lines = _emit_table(None, top)
    if scenario.kind == "auction":
        lines.append("")
        lines.extend(_emit_table("distribution", _dist_to_table(scenario.dist)))
        if scenario.strategy is not None:
            lines.append("")
            lines.extend(_emit_table("strategy",
                                     _strategy_to_table(scenario.strategy)))
    else:
        u_o, u_l, payments, rho = scenario.game
        lines.append("")
        lines.extend(_emit_table("game", {
            "u_o": [list(r) for r in u_o],
            "u_l": [list(r) for r in u_l],
            "payments": [[list(r) for r in p] for p in payments],
            "rho": list(rho),
        }))
    return "\n".join(lines) + "\n"


def from_toml(text: str) -> Scenario:
    data = tomli.loads(text)
    name = data["name"]
    kind = data.get("kind", "auction")
    if kind == "finite":
        g = data["game"]
        game = (
            tuple(tuple(float(x) for x in r) for r in g["u_o"]),
            tuple(tuple(float(x) for x in r) for r in g["u_l"]),
            tuple(tuple(tuple(float(x) for x in r) for r in p)
                  for p in g["payments"]),
            tuple(float(x) for x in g["rho"]),
        )
        return Scenario(name=name, kind="finite", game=game)
    fmt = (AuctionFormat.FirstPrice if data.get("format") == "first_price"
           else AuctionFormat.SecondPrice)
    strategy = None
    if "strategy" in data:
        strategy = _strategy_from_table(data["strategy"])
    eta = data.get("eta", ETA_RULE)
    if not isinstance(eta, str):
        eta = float(eta)
    return Scenario(
        name=name, kind="auction",
        dist=_dist_from_table(data["distribution"]),
        fmt=fmt,
        rho_L=float(data.get("rho_L", 1.0)),
        rho_O=float(data.get("rho_O", 0.25)),
        T=int(data.get("T", 100_000)),
        eta=eta,
        strategy=strategy,
        seeds=tuple(int(s) for s in data.get("seeds", [0])),
    )


def load(path: str) -> Scenario:
    with open(path, "rb") as fh:
        return from_toml(fh.read().decode("utf-8"))


def save(scenario: Scenario, path: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    text = to_toml(scenario)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".toml.tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# bundled instances


def _delta_cdf_scenario(delta: float = 0.01, T: int = 100_000) -> Scenario:
    rho_O = delta / (8.0 * (1.0 + delta))
    mu = 2.0 * (1.0 + delta) / delta
    return Scenario(
        name="delta-cdf",
        dist=DeltaCdfExample(delta),
        fmt=AuctionFormat.SecondPrice,
        rho_L=0.5,
        rho_O=rho_O,
        T=T,
        eta=ETA_RULE,
        strategy=DrainManipulator(mu=mu),
        seeds=tuple(range(8)),
    )


def bundled() -> dict[str, Scenario]:
    """Named scenarios shipped with the package."""
    two_point = Scenario(
        name="two-point",
        dist=DiscreteJoint(((0.5, 1.0, 1.0 / 3.0), (1.0, 1.0, 2.0 / 3.0))),
        fmt=AuctionFormat.SecondPrice,
        rho_L=1.0,
        rho_O=0.25,
    )
    warmup = Scenario(
        name="warmup-uniform",
        dist=IndependentUniform(),
        fmt=AuctionFormat.SecondPrice,
        rho_L=1.0,
        rho_O=1.0,
    )
    finite = Scenario(
        name="finite-example",
        kind="finite",
        game=(
            ((3.0, 0.0), (0.0, 1.0)),
            ((3.0, 0.0), (0.0, 1.0)),
            (((3.0, 0.0), (0.0, 0.0)),),
            (0.5,),
        ),
    )
    return {
        "two-point": two_point,
        "warmup-uniform": warmup,
        "finite-example": finite,
        "delta-cdf": _delta_cdf_scenario(),
    }


def get(name: str, **overrides) -> Scenario:
    """Look up a bundled scenario, optionally overriding fields."""
    from dataclasses import replace

    table = bundled()
    if name not in table:
        raise KeyError(
            f"unknown scenario {name!r}; bundled: {', '.join(sorted(table))}")
    s = table[name]
    if overrides:
        s = replace(s, **overrides)
    return s
