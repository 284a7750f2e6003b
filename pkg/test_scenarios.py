#!/usr/bin/env python3
"""
End-to-end runs of every scenario on small systems.
"""
import json
import os

import numpy as np
import pandas as pd
import pytest

from dickesim.exceptions import SteadyStateError
from dickesim.models.scenario import (
    BenchConfig,
    OpenDickeConfig,
    SimulateConfig,
    SqueezingConfig,
    SteadySuperradianceConfig,
    SuperradianceConfig,
    TimeCrystalConfig,
    TwoEnsemblesConfig,
    UscConfig,
)
from dickesim.scenarios import RUNNERS
from dickesim.scenarios.open_dicke import count_lobes
from dickesim.scenarios.squeezing import top_states
from dickesim.scenarios.superradiance import delay_time
from dickesim.scenarios.time_crystal import oscillation_amplitude
from dickesim.scenarios.ultrastrong import spectrum_peaks


def run(config, out):
    runner = RUNNERS[config.scenario](config, output_dir=str(out))
    metadata = runner.process()
    tables = {
        name[len(config.scenario) + 1:-4]: pd.read_csv(os.path.join(str(out), name))
        for name in metadata.files if name.endswith(".csv")
    }
    return metadata, tables


def read_metadata(out, scenario):
    with open(os.path.join(str(out), f"{scenario}_metadata.json"), encoding="utf-8") as f:
        return json.load(f)


def test_helpers():
    assert delay_time(20, 1.0) == pytest.approx(np.log(20) / 20)
    assert top_states(5) == [(5, 5), (3, 3), (1, 1)]
    assert count_lobes(np.array([0.0, 1.0, 0.0, 2.0, 0.0])) == 2
    assert count_lobes(np.array([0.0, 1.0])) == 0
    t = np.linspace(0.0, 10.0, 1001)
    assert oscillation_amplitude(t, 3 * np.sin(t), 5.0, np.pi) == pytest.approx(3.0, abs=1e-3)
    omegas = np.linspace(0.0, 2.0, 201)
    lines = np.exp(-((omegas - 0.7) / 0.05) ** 2) + 0.5 * np.exp(-((omegas - 1.3) / 0.05) ** 2)
    assert spectrum_peaks(omegas, lines) == pytest.approx([0.7, 1.3])


def test_simulate_pisolve_matches_evolve(tmp_path):
    common = dict(
        n_tls=4,
        rates={"collective_emission": 1.0, "local_dephasing": 0.5},
        hamiltonian=[{"axis": "z", "coefficient": 1.0}],
        initial_state={"kind": "excited"},
        time={"t_max": 2.0, "steps": 21},
        observables=["jz", "jpjm"],
    )
    _, fast = run(SimulateConfig(**common, solver={"use_pisolve": True}), tmp_path / "fast")
    metadata, full = run(SimulateConfig(**common), tmp_path / "full")

    assert list(full["expectations"].columns) == ["t", "jz", "jpjm"]
    assert np.allclose(fast["expectations"].to_numpy(), full["expectations"].to_numpy(), atol=1e-6)
    assert full["expectations"]["jz"].iloc[0] == pytest.approx(2.0)

    record = read_metadata(tmp_path / "full", "simulate")
    assert record["files"] == ["simulate_expectations.csv"]
    assert record["settings"]["RTOL"] == pytest.approx(1e-8)
    assert "numpy" in record["versions"]
    assert record["config"]["n_tls"] == 4


def test_superradiance(tmp_path):
    config = SuperradianceConfig(
        n_tls=6,
        local_dephasing_ratios=[0.0],
        initial_states=[{"kind": "excited"}, {"kind": "dark"}],
        time={"t_max": 4.0, "steps": 81},
    )
    metadata, tables = run(config, tmp_path)
    peaks = tables["peaks"].set_index("state")
    assert bool(peaks.loc["excited", "interior_peak"])
    assert peaks.loc["excited", "peak_jpjm"] > 6.0
    assert not bool(peaks.loc["dark", "interior_peak"])

    dark = tables["series"][tables["series"]["state"] == "dark"]
    assert np.abs(dark["jpjm"]).max() < 1e-10
    assert metadata.residuals["t_D"] == pytest.approx(delay_time(6, 1.0))


def test_steady_superradiance(tmp_path):
    config = SteadySuperradianceConfig(
        modes=["pump", "detailed_balance", "grid"],
        n_values=[4, 6],
        pump_ratios=[0.01, 0.1, 1.0, 10.0],
        n_thermal_values=[1.0],
        grid_n_tls=4,
        gamma0_values=[0.1, 1.0],
        n_thermal_grid=[0.5, 2.0],
    )
    metadata, tables = run(config, tmp_path)
    sweep = tables["sweep"]
    assert set(sweep["series"]) == {"pump", "n_T=1", "n_T=inf"}
    assert len(sweep) == 3 * 2 * 4
    assert (sweep["jpjm_ss/N"] > -1e-12).all()
    assert len(tables["peaks"]) == 6
    assert len(tables["grid"]) == 4
    assert metadata.residuals["pump:N=6"] < 1e-9


def test_squeezing(tmp_path):
    config = SqueezingConfig(
        n_tls=4,
        tradeoff_rate=0.2,
        scan_sizes={"local_emission_values": [0.0, 0.2], "n_values": [2, 4]},
        time={"t_max": 0.5, "steps": 51},
    )
    metadata, tables = run(config, tmp_path)
    series = tables["series"]
    assert series["xi2"].iloc[0] == pytest.approx(1.0)

    scan = tables["scan_jj"]
    assert list(scan["j"]) == [2.0, 1.0, 0.0]
    assert scan["t_min"].iloc[0] > 0.0
    assert scan["min_xi2"].iloc[0] < 1.0

    tradeoff = tables["tradeoff"]
    assert sorted(set(tradeoff["channel"])) == ["collective", "local"]
    assert len(tradeoff) == 6
    assert len(tables["scan_sizes"]) == 4
    assert "excited:tau*Lambda" in metadata.residuals


def test_open_dicke(tmp_path):
    config = OpenDickeConfig(
        n_tls=2,
        n_ph=8,
        variants={"b": {"local_emission": 0.1}},
        wigner={"x_max": 4.0, "points": 21},
    )
    metadata, tables = run(config, tmp_path)
    distribution = tables["photon_distribution"]
    assert distribution["P(n)"].sum() == pytest.approx(1.0, abs=1e-8)
    moments = tables["moments"].iloc[0]
    assert -1.0 <= moments["<Jz>/(N/2)"] <= 1.0
    assert moments["<a^dag a>"] >= 0.0
    assert len(tables["wigner"]) == 21 * 21
    assert metadata.residuals["b:steady_state"] < 1e-8


def test_time_crystal_preserves_total_spin_under_collective_channels(tmp_path):
    config = TimeCrystalConfig(
        n_tls=4,
        collective_emission=0.1,
        local_dephasing_values=[0.0],
        collective_dephasing_values=[0.1],
        amplitude_time=4.0,
        time={"t_max": 8.0, "steps": 161},
    )
    _, tables = run(config, tmp_path)
    amplitudes = tables["amplitudes"]
    assert (amplitudes["j2_drift"] < 1e-6).all()
    assert (amplitudes["amplitude/(N/2)"] > 0.05).all()


def test_two_ensembles_exchange_excitation(tmp_path):
    config = TwoEnsemblesConfig(n1=2, n2=3, combinations=[{"label": "joint"}], time={"t_max": 5.0, "steps": 51})
    _, tables = run(config, tmp_path)
    series = tables["series"]
    assert series["jz1/(N1/2)"].iloc[0] == pytest.approx(-1.0)
    assert series["jz2/(N2/2)"].iloc[0] == pytest.approx(1.0)
    assert tables["final"]["max_jz1/(N1/2)"].iloc[0] > -1.0 + 1e-4


def test_usc(tmp_path):
    config = UscConfig(n_tls=2, n_ph=3, time={"t_max": 50.0, "steps": 11}, spectrum={"points": 21})
    metadata, tables = run(config, tmp_path)
    summary = tables["summary"].iloc[0]
    assert 0.0 < summary["n_gs"] < 0.05
    assert summary["ground_fidelity"] > 0.99
    assert summary["exact_lower"] < 1.0 < summary["exact_upper"]
    dynamics = tables["dynamics"]
    assert dynamics["dressed_n-n_gs"].iloc[0] == pytest.approx(dynamics["bare_n-n_gs"].iloc[0])
    assert len(tables["spectrum"]) == 21
    assert "bare:steady_state" in metadata.residuals


def test_bench(tmp_path):
    config = BenchConfig(n_values=[2, 3], steps=20, evolve_max_n=2)
    metadata, tables = run(config, tmp_path)
    assert "bench_report.json" in metadata.files
    timings = tables["timings"]
    assert list(timings["n_tls"]) == [2, 3]
    assert list(timings["n_ds"]) == [4, 6]
    assert np.isnan(timings["evolve_s"].iloc[1])
    with open(tmp_path / "bench_report.json", encoding="utf-8") as f:
        report = json.load(f)
    assert report["steps"] == 20
    assert len(report["entries"]) == 2


def test_metadata_is_written_when_a_run_fails(tmp_path, monkeypatch):
    config = SuperradianceConfig(n_tls=4, time={"t_max": 1.0, "steps": 5})
    runner = RUNNERS["superradiance"](config, output_dir=str(tmp_path))

    def failing():
        raise SteadyStateError("no kernel")

    monkeypatch.setattr(runner, "simulate", failing)
    with pytest.raises(SteadyStateError):
        runner.process()
    record = read_metadata(tmp_path, "superradiance")
    assert record["files"] == []
    assert "total_s" in record["timings"]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
