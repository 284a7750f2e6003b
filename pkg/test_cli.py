#!/usr/bin/env python3
"""
Tests for the dickesim command line.
"""
import json
import os

import pytest

from dickesim.__main__ import main
from dickesim.exceptions import IntegrationError
from dickesim.scenarios.simulate import SimulateRunner

SMALL_RUN = {
    "n_tls": 3,
    "rates": {"collective_emission": 1.0},
    "initial_state": {"kind": "excited"},
    "time": {"t_max": 0.5, "steps": 6},
}


def config_file(tmp_path, document):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def test_successful_run(tmp_path):
    out = tmp_path / "out"
    code = main(["simulate", "--config", config_file(tmp_path, SMALL_RUN), "--out", str(out), "--jobs", "2"])
    assert code == 0
    assert sorted(os.listdir(out)) == ["simulate_expectations.csv", "simulate_metadata.json"]


def test_config_errors_exit_with_2(tmp_path):
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", str(tmp_path / "missing.json"), "--out", out]) == 2
    broken = dict(SMALL_RUN, time={"t_max": -1.0, "steps": 6})
    assert main(["simulate", "--config", config_file(tmp_path, broken), "--out", out]) == 2
    assert main(["usc", "--config", config_file(tmp_path, dict(SMALL_RUN, scenario="simulate")), "--out", out]) == 2


def test_unknown_scenario_is_rejected_by_the_parser(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["lasing", "--config", config_file(tmp_path, SMALL_RUN)])
    assert excinfo.value.code == 2


def test_solver_failure_exits_with_3_and_keeps_metadata(tmp_path, monkeypatch):
    def failing(self):
        raise IntegrationError("step size underflow", 0.25)

    monkeypatch.setattr(SimulateRunner, "simulate", failing)
    out = tmp_path / "out"
    assert main(["simulate", "--config", config_file(tmp_path, SMALL_RUN), "--out", str(out)]) == 3
    assert os.path.exists(out / "simulate_metadata.json")


def test_unexpected_failure_exits_with_1(tmp_path, monkeypatch):
    def failing(self):
        raise KeyError("jz")

    monkeypatch.setattr(SimulateRunner, "simulate", failing)
    assert main(["simulate", "--config", config_file(tmp_path, SMALL_RUN), "--out", str(tmp_path / "out")]) == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
