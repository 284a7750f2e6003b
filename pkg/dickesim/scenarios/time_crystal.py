from typing import Dict, Tuple

import numpy as np
import pandas as pd

from dickesim.liouvillian import liouvillian
from dickesim.models.rates import Rates
from dickesim.models.scenario import TimeCrystalConfig
from dickesim.operators import collective_observable, jspin
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.solvers import Trajectory, evolve


def oscillation_amplitude(times: np.ndarray, values: np.ndarray, centre: float, half_width: float) -> float:
    """Half the peak-to-peak swing of ``values`` within ``|t - centre| <= half_width``."""
    window = np.abs(times - centre) <= half_width
    if not np.any(window):
        return float("nan")
    segment = values[window]
    return float((segment.max() - segment.min()) / 2)


class TimeCrystalRunner(ScenarioRunner):
    """Driven collective decay ``H = omega_x Jx`` against local and collective dephasing."""
    name = "time-crystal"
    config: TimeCrystalConfig

    def _rates(self, channel: str, value: float) -> Rates:
        cfg = self.config
        scale = cfg.omega_x
        rates = {
            "collective_emission": cfg.collective_emission * scale,
            "local_emission": cfg.local_emission * scale,
            channel: value * scale,
        }
        return Rates(**rates)

    def _run(self, job: Tuple[str, float]) -> Trajectory:
        channel, value = job
        cfg = self.config
        n = cfg.n_tls
        observables = {"jz": collective_observable(n, "jz"), "j2": collective_observable(n, "j2")}
        return evolve(
            liouvillian(n, self._rates(channel, value), cfg.omega_x * jspin(n, "x")),
            cfg.initial_state.build(n),
            cfg.time.points() / cfg.omega_x,
            observables,
            monitor_positivity=cfg.solver.monitor_positivity,
            **cfg.solver.integrator_kwargs(),
        )

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        half = cfg.n_tls / 2
        casimir = half * (half + 1)
        jobs = [("local_dephasing", v) for v in cfg.local_dephasing_values]
        jobs += [("collective_dephasing", v) for v in cfg.collective_dephasing_values]
        trajectories = self.map(self._run, jobs)

        series, amplitudes = [], []
        for (channel, value), trajectory in zip(jobs, trajectories):
            label = f"{channel}={value:g}"
            self.record_trajectory(label, trajectory)
            t = trajectory.times * cfg.omega_x
            jz = np.real(trajectory.expectations["jz"])
            j2 = np.real(trajectory.expectations["j2"])
            series.append(pd.DataFrame({
                "channel": channel,
                "rate/omega_x": value,
                "t*omega_x": t,
                "jz/(N/2)": jz / half,
                "j2/(N/2(N/2+1))": j2 / casimir,
            }))
            amplitude = oscillation_amplitude(t, jz, cfg.amplitude_time, np.pi)
            amplitudes.append({
                "channel": channel,
                "rate/omega_x": value,
                "amplitude": amplitude,
                "amplitude/(N/2)": amplitude / half,
                "j2_drift": float(np.abs(j2 - j2[0]).max()),
            })
        return {"series": pd.concat(series, ignore_index=True), "amplitudes": pd.DataFrame(amplitudes)}
