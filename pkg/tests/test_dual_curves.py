"""Dual curve construction, smoothing, and the value-iteration certificate."""

import math

import numpy as np
import pytest

from paced_auctions.auction import AuctionFormat
from paced_auctions.auction_bse import AuctionBseProblem
from paced_auctions.distributions import DeltaCdfExample, DiscreteJoint
from paced_auctions.dual_curves import (
    DualSetting,
    certify,
    dp_oracle,
    interpolation_slack,
    lam_bar_bound,
    separation_constant,
    smooth_and_integrate,
)
from paced_auctions.errors import UnboundedPotential

SP = AuctionFormat.SecondPrice
TWO_POINT = DiscreteJoint(((0.5, 1.0, 1.0 / 3.0), (1.0, 1.0, 2.0 / 3.0)))


@pytest.fixture(scope="module")
def setting():
    problem = AuctionBseProblem(TWO_POINT, SP, rho_L=0.5, rho_O=0.1)
    return DualSetting(problem)


def test_f_convex_in_g(setting):
    lam = 1.0
    gs = np.linspace(-3.0, 0.0, 41)
    vals = np.array([setting.f(lam, g) for g in gs])
    chords = 0.5 * (vals[:-2] + vals[2:])
    assert np.all(vals[1:-1] <= chords + 1e-12)


def test_g_star_anchor_and_monotonicity(setting):
    anchor = -(setting.problem.dist.mean_optimizer - setting.R_star) / setting.rho_L
    assert setting.g_star(0.0) == pytest.approx(anchor, rel=1e-6)
    lams = np.linspace(0.0, 3.0, 31)
    gs = [setting.g_star(l) for l in lams]
    assert all(b >= a - 1e-7 for a, b in zip(gs, gs[1:]))
    assert all(g <= 0.0 for g in gs)


def test_g_star_level_set(setting):
    for lam in (0.2, 0.8, 1.5):
        g = setting.g_star(lam)
        if g == 0.0:
            assert setting.f(lam, 0.0) <= setting.R_star + 1e-8
        else:
            assert setting.f(lam, g) <= setting.R_star + 1e-8
            # slightly larger g breaks the level constraint
            assert setting.f(lam, g * 0.99) > setting.R_star - 1e-12


def test_vanishing_bound(setting):
    bound = lam_bar_bound(setting)
    assert bound is not None
    assert setting.g_star(bound + 1e-6) == 0.0


def test_smoothing_window_matches_direct_trapezoid(setting):
    sigma = 0.16
    curve = smooth_and_integrate(setting, sigma, step=0.02)
    i = 12
    lam = curve.lam_grid[i]
    m = round(sigma / 0.02)
    window = curve.g_star[i:i + m + 1]
    direct = np.trapezoid(window, dx=0.02) / sigma
    assert curve.g_star_sigma[i] == pytest.approx(direct, abs=1e-12)
    # G is the tail integral of -g_sigma: nonnegative and nonincreasing
    assert np.all(curve.G_sigma >= -1e-12)
    assert np.all(np.diff(curve.G_sigma) <= 1e-12)
    assert curve.G_sigma[-1] == 0.0


def test_smoothed_curve_keeps_dual_bound(setting):
    sigma = 0.1
    curve = smooth_and_integrate(setting, sigma, step=sigma / 10)
    for i in range(0, curve.lam_grid.size, 7):
        f_val = setting.f(float(curve.lam_grid[i]), float(curve.g_star_sigma[i]))
        assert f_val <= setting.R_star + setting.mu * sigma + 1e-8


def test_unseparated_instance_raises():
    delta = 0.05
    problem = AuctionBseProblem(DeltaCdfExample(delta), SP, rho_L=0.5,
                                rho_O=delta / (8.0 * (1.0 + delta)))
    setting = DualSetting(problem)
    with pytest.raises(UnboundedPotential) as err:
        smooth_and_integrate(setting, 0.1, lam_max=4.0)
    assert err.value.curve.lam_bar is None


def test_dp_single_round_equals_dual_at_zero(setting):
    grid = np.linspace(0.0, 2.0, 41)
    table = dp_oracle(setting, eta=0.01, lam_grid=grid, tau_max=1)
    np.testing.assert_allclose(table[0], 0.0)
    want = [setting.f(l, 0.0) for l in grid]
    np.testing.assert_allclose(table[1], want, atol=1e-12)


def test_certificate_holds_on_separated_instance(setting):
    eta = 5e-3
    sigma = math.sqrt(eta)
    curve = smooth_and_integrate(setting, sigma, step=sigma / 8)
    table = dp_oracle(setting, eta, curve.lam_grid, tau_max=300)
    ok, margin = certify(table, curve.lam_grid, curve, eta)
    assert ok, f"worst margin {margin}"
    A = separation_constant(curve, eta)
    assert A >= setting.R_star  # the constant only adds slack to R*
    assert interpolation_slack(table, curve.lam_grid) >= 0.0
