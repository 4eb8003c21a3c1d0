"""Exception types shared across the package."""


class PacedAuctionsError(Exception):
    """Base class for all package errors."""


class QuadratureNonConvergence(PacedAuctionsError):
    """Adaptive quadrature did not reach the requested tolerance."""


class PaymentExceedsBid(PacedAuctionsError):
    """A learner payment larger than her own bid was reported upstream."""


class Infeasible(PacedAuctionsError):
    """No strategy satisfies the budget constraints."""


class EmptyFrontier(PacedAuctionsError):
    """No pacing multiplier makes the learner's budget constraint satisfiable."""


class DegenerateDistribution(PacedAuctionsError):
    """A player has zero expected value, so strong duality is unavailable."""


class UnboundedPotential(PacedAuctionsError):
    """The dual multiplier curve never reaches zero on the scanned grid."""


class GridEscape(UserWarning):
    """Value iteration pushed the pacing multiplier past the grid edge."""
