"""Proportional-feedback pacing controller for the budgeted learner.

Each round the learner bids lam * v_L, pays p_L, and nudges the multiplier by
eta * (rho_L - p_L).  With lam_initial <= rho_L the controller provably never
overspends the horizon budget rho_L * T, and the multiplier stays nonnegative
whenever payments never exceed the learner's own bid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import PaymentExceedsBid

_PAY_TOL = 1e-12


@dataclass(frozen=True)
class LearnerState:
    lam: float
    eta: float
    rho_L: float
    budget_remaining: float
    round: int = 0
    cumulative_payment: float = 0.0
    payment_comp: float = 0.0  # Kahan compensation for cumulative_payment

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0):
            raise ValueError("eta must lie in (0, 1)")
        if self.rho_L <= 0:
            raise ValueError("rho_L must be positive")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")


def initial_state(eta: float, rho_L: float, horizon: int,
                  lam_initial: float = 0.0) -> LearnerState:
    """Fresh controller with the full horizon budget rho_L * horizon."""
    return LearnerState(lam=lam_initial, eta=eta, rho_L=rho_L,
                        budget_remaining=rho_L * horizon)


def learner_bid(state: LearnerState, v_L: float) -> float:
    if not (0.0 <= v_L <= 1.0):
        raise ValueError("v_L must lie in [0, 1]")
    return state.lam * v_L


def learner_update(state: LearnerState, p_L: float) -> LearnerState:
    """Advance one round after paying ``p_L``.

    Payments above the learner's maximal bid lam * 1 indicate a broken payment
    rule upstream and raise instead of silently corrupting the multiplier.
    """
    if p_L < 0:
        raise ValueError("payment must be nonnegative")
    if p_L > state.lam + _PAY_TOL:
        raise PaymentExceedsBid(
            f"payment {p_L} exceeds maximal bid {state.lam}")
    lam_next = state.lam + state.eta * (state.rho_L - p_L)
    assert lam_next >= -1e-12, f"multiplier went negative: {lam_next}"
    y = p_L - state.payment_comp
    total = state.cumulative_payment + y
    comp = (total - state.cumulative_payment) - y
    return replace(state, lam=lam_next, round=state.round + 1,
                   budget_remaining=state.budget_remaining - p_L,
                   cumulative_payment=total, payment_comp=comp)
