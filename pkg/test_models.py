#!/usr/bin/env python3
"""
Tests for the config documents, rates and the output helpers.
"""
import json
import os

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from dickesim.exceptions import ConfigError
from dickesim.models.rates import Rates
from dickesim.models.scenario import SimulateConfig, SuperradianceConfig, TimeCrystalConfig, TwoEnsemblesConfig
from dickesim.models.states import InitialStateSpec
from dickesim.utils.io import describe_validation_error, load_config, write_table

PRESETS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")


def write_document(tmp_path, document, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def test_rates_helpers():
    balanced = Rates.detailed_balance(0.5, 2.0, collective_emission=1.0)
    assert balanced.local_emission == pytest.approx(1.5)
    assert balanced.local_pumping == pytest.approx(1.0)
    assert balanced.collective_emission == 1.0
    assert balanced.has_local

    depolarizing = Rates.depolarizing(gamma_collective=0.4)
    assert depolarizing.collective_pumping == pytest.approx(0.2)
    assert depolarizing.collective_dephasing == pytest.approx(0.4)
    assert not depolarizing.has_local
    assert depolarizing.max_rate == pytest.approx(0.4)

    with pytest.raises(ValidationError):
        Rates(local_emission=-0.1)
    with pytest.raises(ValidationError):
        Rates(emission=0.1)


def test_initial_state_specs():
    assert InitialStateSpec(kind="dicke", j2=4, m2=2).label == "dicke_4_2"
    with pytest.raises(ValidationError):
        InitialStateSpec(kind="dicke", j2=4)
    with pytest.raises(ValidationError):
        InitialStateSpec(kind="css")

    for kind in ("excited", "ground", "ghz", "css_plus", "css_minus", "dicke_half", "dark"):
        state = InitialStateSpec(kind=kind).build(5)
        state.check(1e-10)
    dark = InitialStateSpec(kind="dark").build(5)
    assert dark.dim == 12


def test_scenario_config_validation():
    config = SimulateConfig(
        n_tls=4,
        initial_state={"kind": "excited"},
        time={"t_max": 1.0, "steps": 11},
        hamiltonian=[{"axis": "x", "coefficient": 1.0}],
    )
    assert config.time.points()[-1] == 1.0

    with pytest.raises(ValidationError):
        SimulateConfig(n_tls=4, initial_state={"kind": "excited"}, time={"t_max": 1.0, "steps": 11}, observables=["jw"])
    with pytest.raises(ValidationError):
        SimulateConfig(
            n_tls=4,
            initial_state={"kind": "excited"},
            time={"t_max": 1.0, "steps": 11},
            hamiltonian=[{"axis": "x", "coefficient": 1.0}],
            solver={"use_pisolve": True},
        )
    with pytest.raises(ValidationError):
        SuperradianceConfig(local_dephasing_ratios=[-1.0])
    with pytest.raises(ValidationError):
        TimeCrystalConfig(collective_emission=0.1, amplitude_time=19.0)
    with pytest.raises(ValidationError):
        TwoEnsemblesConfig(n2=1)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="Unknown scenario"):
        load_config(str(tmp_path / "missing.json"), "lasing")
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.json"), "superradiance")

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(str(broken), "superradiance")

    with pytest.raises(ConfigError, match="JSON object"):
        load_config(write_document(tmp_path, [1, 2]), "superradiance")
    with pytest.raises(ConfigError, match="is for scenario"):
        load_config(write_document(tmp_path, {"scenario": "usc"}), "superradiance")

    with pytest.raises(ValidationError) as excinfo:
        load_config(write_document(tmp_path, {"n_tls": 1, "time": {"t_max": 1.0, "steps": 1}}), "superradiance")
    message = describe_validation_error(excinfo.value)
    assert "n_tls" in message
    assert "time.steps" in message


def test_load_config_fills_in_the_scenario(tmp_path):
    config = load_config(write_document(tmp_path, {"n_tls": 6}), "superradiance")
    assert config.scenario == "superradiance"
    assert config.n_tls == 6
    assert config.local_dephasing_ratios == [1.0, 0.0]


@pytest.mark.parametrize("scenario, filename", [
    ("simulate", "simulate.json"),
    ("superradiance", "superradiance.json"),
    ("steady-superradiance", "steady_superradiance.json"),
    ("steady-superradiance", "steady_superradiance_grid.json"),
    ("squeezing", "squeezing.json"),
    ("open-dicke", "open_dicke.json"),
    ("time-crystal", "time_crystal.json"),
    ("time-crystal", "time_crystal_literal.json"),
    ("two-ensembles", "two_ensembles.json"),
    ("usc", "usc.json"),
    ("bench", "bench.json"),
])
def test_presets_validate(scenario, filename):
    config = load_config(os.path.join(PRESETS, filename), scenario)
    assert config.scenario == scenario


def test_time_crystal_presets_carry_both_rate_readings():
    weak = load_config(os.path.join(PRESETS, "time_crystal.json"), "time-crystal")
    literal = load_config(os.path.join(PRESETS, "time_crystal_literal.json"), "time-crystal")
    assert weak.collective_emission == pytest.approx(weak.omega_x / (2 * weak.n_tls))
    assert literal.collective_emission == pytest.approx(literal.n_tls * literal.omega_x / 4)
    with open(os.path.join(os.path.dirname(PRESETS), "README.md"), encoding="utf-8") as f:
        assert "time_crystal_literal.json" in f.read()


def test_write_table_is_reproducible(tmp_path):
    frame = pd.DataFrame({"t": np.linspace(0.0, 1.0, 4), "jz": [1.0, 1 / 3, np.pi, -2.5e-13]})
    first = write_table(frame, str(tmp_path / "a"), "table.csv")
    second = write_table(frame, str(tmp_path / "b"), "table.csv")
    with open(first, encoding="utf-8") as f:
        text = f.read()
    with open(second, encoding="utf-8") as f:
        assert f.read() == text
    lines = text.splitlines()
    assert lines[0] == "t,jz"
    assert lines[2] == "0.333333333333,0.333333333333"
    assert lines[3] == "0.666666666667,3.14159265359"
    assert lines[4] == "1,-2.5e-13"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
