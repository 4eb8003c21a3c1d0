"""Scenario config round-trips and CLI exit-code contracts."""

import os

import numpy as np
import pytest

from paced_auctions import scenarios as sc
from paced_auctions.auction import AuctionFormat
from paced_auctions.cli import main
from paced_auctions.distributions import DiscreteJoint
from paced_auctions.policies import AffineClipped
from paced_auctions.strategies import DrainManipulator, StaticPolicy


def test_bundled_round_trip():
    for name, scenario in sc.bundled().items():
        assert sc.from_toml(sc.to_toml(scenario)) == scenario


def test_custom_scenario_round_trip(tmp_path):
    scenario = sc.Scenario(
        name="custom",
        dist=DiscreteJoint(((0.3, 0.8, 0.25), (0.9, 0.4, 0.75))),
        fmt=AuctionFormat.FirstPrice,
        rho_L=0.37,
        rho_O=0.123456789,
        T=4242,
        eta=0.00123,
        strategy=StaticPolicy(AffineClipped(1.1, -0.2, lo=0.0, hi=1.5, cap=1.8)),
        seeds=(5, 9),
    )
    path = tmp_path / "custom.toml"
    sc.save(scenario, str(path))
    assert sc.load(str(path)) == scenario


def test_drain_strategy_round_trip():
    scenario = sc.get("delta-cdf")
    from dataclasses import replace
    scenario = replace(scenario,
                       strategy=DrainManipulator(mu=202.0, switch_round=49519))
    assert sc.from_toml(sc.to_toml(scenario)) == scenario


def test_get_unknown_scenario():
    with pytest.raises(KeyError):
        sc.get("no-such-scenario")


def test_cli_solve_finite(capsys):
    assert main(["solve", "--scenario", "finite-example"]) == 0
    out = capsys.readouterr().out
    assert "BSE = 1.33333333" in out


def test_cli_unknown_scenario_exit_2(capsys):
    assert main(["solve", "--scenario", "nope"]) == 2


def test_cli_bad_config_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("name = [unclosed\n")
    assert main(["solve", "--config", str(bad)]) == 2


def test_cli_infeasible_exit_3(tmp_path, capsys):
    scenario = sc.Scenario(
        name="starved",
        kind="finite",
        game=(((1.0, 2.0),), ((0.0, 1.0),), (((1.0, 1.0),),), (0.5,)),
    )
    path = tmp_path / "starved.toml"
    sc.save(scenario, str(path))
    assert main(["solve", "--config", str(path)]) == 3


def test_cli_unknown_reproduction_exit_2(capsys):
    assert main(["reproduce", "no-such-figure"]) == 2
    assert "valid ids" in capsys.readouterr().err


def test_cli_simulate_writes_csv(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    code = main(["simulate", "--scenario", "delta-cdf", "--T", "2000",
                 "--seeds", "0,1", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    assert any("seeds = 0,1" in l for l in header)
    data = [l for l in lines if not l.startswith("#")]
    assert data[0].startswith("seed,")
    assert len(data) == 3  # header + one row per seed


def test_cli_dual_reports_unbounded(tmp_path, capsys):
    code = main(["dual", "--scenario", "delta-cdf", "--eta", "0.01",
                 "--out", str(tmp_path / "curve.csv")])
    assert code == 0
    assert "unbounded potential" in capsys.readouterr().out


def test_cli_dual_certifies_two_point(tmp_path, capsys):
    code = main(["dual", "--scenario", "two-point", "--eta", "0.01",
                 "--tau-max", "50", "--out", str(tmp_path / "curve.csv")])
    assert code == 0
    out = capsys.readouterr().out
    assert "certified" in out
    text = (tmp_path / "curve.csv").read_text()
    assert text.splitlines()[-1].count(",") == 3  # lam,g*,g*_sigma,G_sigma
