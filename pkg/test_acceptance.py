#!/usr/bin/env python3
"""
Full-size preset runs checked against reference values, plus the
assembly timings. These take minutes; deselect them with ``-m "not slow"``.
"""
import os
import time

import numpy as np
import pandas as pd
import pytest

from dickesim.config import settings
from dickesim.liouvillian import liouvillian, uncoupled_liouvillian
from dickesim.models.rates import Rates
from dickesim.operators import collective_observable, excited, jspin, uncoupled_collective
from dickesim.scenarios import RUNNERS
from dickesim.scenarios.superradiance import delay_time
from dickesim.solvers import pisolve
from dickesim.utils.io import load_config

PRESETS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")

pytestmark = pytest.mark.slow


def preset(filename, scenario, **update):
    config = load_config(os.path.join(PRESETS, filename), scenario)
    return config.model_copy(update=update)


def run_tables(config, out):
    runner = RUNNERS[config.scenario](config, output_dir=str(out))
    metadata = runner.process()
    return {
        name[len(config.scenario) + 1:-4]: pd.read_csv(os.path.join(str(out), name))
        for name in metadata.files if name.endswith(".csv")
    }


def test_superradiant_burst_with_local_dephasing(tmp_path):
    base = load_config(os.path.join(PRESETS, "superradiance.json"), "superradiance")
    states = [spec for spec in base.initial_states if spec.kind != "dark"]
    config = base.model_copy(update={"local_dephasing_ratios": [1.0], "initial_states": states})
    tables = run_tables(config, tmp_path)
    peaks = tables["peaks"].set_index("state")
    assert peaks.loc["excited", "peak_time/t_D"] == pytest.approx(1.0, abs=0.3)

    series = tables["series"]
    plus = series[series["state"] == "css_plus"]
    minus = series[series["state"] == "css_minus"]
    assert np.abs(plus["jz/(N/2)"].to_numpy() - minus["jz/(N/2)"].to_numpy()).max() < 1e-6
    assert np.abs(plus["jpjm"].to_numpy() - minus["jpjm"].to_numpy()).max() < 1e-6

    ghz, half = peaks.loc["ghz", "peak_jpjm"], peaks.loc["dicke_half", "peak_jpjm"]
    assert abs(ghz - half) > 0.01 * half


def test_steady_emission_peaks_near_the_collective_rate(tmp_path):
    tables = run_tables(preset("steady_superradiance.json", "steady-superradiance"), tmp_path)
    peaks = tables["peaks"]
    pump = peaks[peaks["series"] == "pump"]
    assert sorted(pump["N"]) == [10, 20, 30, 40]
    assert np.all(pump["peak_gamma_up/(N gamma_Down)"] >= 0.5)
    assert np.all(pump["peak_gamma_up/(N gamma_Down)"] <= 2.0)

    hot = peaks[peaks["series"] == "n_T=inf"]
    assert len(hot) == 4
    for _, row in hot.iterrows():
        assert not (row["interior_peak"] and row["peak_over_endpoints"] > 1.05)


def test_only_seven_top_states_squeeze_under_local_decay(tmp_path):
    config = preset("squeezing.json", "squeezing", tradeoff=False, scan_rates=None, scan_sizes=None)
    tables = run_tables(config, tmp_path)
    scan = tables["scan_jj"]
    assert len(scan) == 11
    assert int((scan["min_xi2"] < 1).sum()) == 7


def test_time_crystal_oscillation_survives_without_dephasing(tmp_path):
    config = preset(
        "time_crystal.json", "time-crystal",
        local_dephasing_values=[0.0, 1.0], collective_dephasing_values=[],
    )
    tables = run_tables(config, tmp_path)
    amplitudes = tables["amplitudes"].set_index("rate/omega_x")
    half = 15
    casimir = half * (half + 1)
    assert amplitudes.loc[0.0, "j2_drift"] / casimir < 1e-9
    assert amplitudes.loc[0.0, "amplitude/(N/2)"] > 0.5
    assert amplitudes.loc[1.0, "amplitude"] < 0.5 * amplitudes.loc[0.0, "amplitude"]


def test_joint_decay_leaves_the_small_ensemble_excited(tmp_path):
    base = load_config(os.path.join(PRESETS, "two_ensembles.json"), "two-ensembles")
    keep = [c for c in base.combinations if c.label in ("joint", "joint+local_emission")]
    tables = run_tables(base.model_copy(update={"combinations": keep}), tmp_path)
    final = tables["final"].set_index("combination")
    assert final.loc["joint", "jz1/(N1/2)"] > 0
    relaxed = final.loc["joint+local_emission"]
    assert relaxed["jz1/(N1/2)"] + 1 < 1e-3
    assert relaxed["jz2/(N2/2)"] + 1 < 1e-3


def test_dressed_model_relaxes_to_the_dressed_ground_state(tmp_path):
    tables = run_tables(preset("usc.json", "usc"), tmp_path)
    summary = tables["summary"].iloc[0]
    assert summary["ground_fidelity"] > 1 - 1e-6
    assert summary["dressed_spectrum_max"] < 1e-6 * summary["bare_spectrum_max"]
    step = summary["omega_step"] * (1 + 1e-9)
    assert abs(summary["bare_peak_lower"] - summary["exact_lower"]) <= step
    assert abs(summary["bare_peak_upper"] - summary["exact_upper"]) <= step
    # the counter-rotating terms pull both lines below the rotating-wave values
    assert summary["exact_lower"] < summary["polariton_lower"]


def test_assembly_and_population_timings(monkeypatch):
    all_channels = Rates(
        collective_emission=1.0, collective_dephasing=1.0, collective_pumping=1.0,
        local_emission=1.0, local_dephasing=1.0, local_pumping=1.0,
    )
    for n, budget in ((50, 5.0), (100, 60.0)):
        started = time.perf_counter()
        liouvillian(n, all_channels, jspin(n, "z"))
        assert time.perf_counter() - started < budget

    n = 100
    t_d = delay_time(n, 1.0)
    started = time.perf_counter()
    decay = pisolve(
        n, Rates(collective_emission=1.0), jspin(n, "z"), excited(n),
        np.linspace(0.0, 4 * t_d, 1000), {"jpjm": collective_observable(n, "jpjm")},
    )
    assert time.perf_counter() - started < 30.0
    assert decay.expectations["jpjm"].size == 1000

    # local channels only; the 2^N collective dissipators do not fit in memory at N=10
    n = 10
    local = Rates(local_emission=1.0, local_dephasing=1.0, local_pumping=1.0)
    monkeypatch.setattr(settings, "ORACLE_CAP", n)
    started = time.perf_counter()
    liouvillian(n, local, jspin(n, "z"))
    dicke_time = time.perf_counter() - started
    started = time.perf_counter()
    uncoupled_liouvillian(n, local, uncoupled_collective(n, "z"))
    uncoupled_time = time.perf_counter() - started
    assert uncoupled_time >= 10 * dicke_time


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
