"""Budget-paced repeated auctions: simulation, equilibrium solvers, and dual certificates."""

from .auction import (
    AuctionFormat,
    RoundOutcome,
    Winner,
    expected_triple,
    expected_triple_mixed,
    round_outcome,
)
from .distributions import (
    DeltaCdfExample,
    DiscreteJoint,
    IndependentUniform,
    ProductOf,
    as_discrete,
    candidate_fake_values,
)
from .learner import LearnerState, initial_state, learner_bid, learner_update
from .policies import (
    AffineClipped,
    BidPolicy,
    Constant,
    PacingMirror,
    PiecewiseConstant,
    Zero,
)
from .strategies import (
    BudgetGuard,
    DrainManipulator,
    PhaseSchedule,
    StaticPolicy,
    make_cursor,
    switch_time_tau,
)
from .finite_games import BseSolution, FiniteGame, FinitePhase, bse_finite, se_value
from .auction_bse import (
    AuctionBseProblem,
    AuctionBseSolution,
    AuctionPhase,
    auction_bse,
    auction_phase_frontier,
    auction_se,
    dual_opt,
    lagrangian_reward,
)
from .dual_curves import (
    DualCurve,
    DualSetting,
    certify,
    dp_oracle,
    dual_f,
    g_star,
    lam_bar_bound,
    separation_constant,
    smooth_and_integrate,
)
from .sim import SimConfig, SimResult, expected_trajectory, replicate, run
from .scenarios import Scenario

__version__ = "0.1.0"
