from typing import Dict, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp

from dickesim.liouvillian import liouvillian
from dickesim.models.rates import Rates
from dickesim.models.scenario import SuperradianceConfig
from dickesim.models.states import InitialStateSpec
from dickesim.operators import collective_observable, jspin
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.solvers import Trajectory, evolve, pisolve


def delay_time(n_tls: int, gamma: float) -> float:
    """Superradiant delay time ``ln N / (N gamma)``."""
    return float(np.log(n_tls) / (n_tls * gamma))


class SuperradianceRunner(ScenarioRunner):
    """Superradiant decay with local dephasing, for several initial states and dephasing ratios."""
    name = "superradiance"
    config: SuperradianceConfig

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        n, gamma = cfg.n_tls, cfg.collective_emission
        t_d = delay_time(n, gamma)
        times = cfg.time.points() * t_d
        h = cfg.omega0 * jspin(n, "z")
        observables = {"jz": collective_observable(n, "jz"), "jpjm": collective_observable(n, "jpjm")}
        rates = {ratio: Rates(collective_emission=gamma, local_dephasing=ratio * gamma) for ratio in cfg.local_dephasing_ratios}
        generators = {ratio: liouvillian(n, r, h) for ratio, r in rates.items()}
        kwargs = cfg.solver.integrator_kwargs()

        def run(job: Tuple[float, InitialStateSpec]) -> Trajectory:
            ratio, spec = job
            rho0 = spec.build(n)
            if cfg.solver.use_pisolve and sp.triu(rho0.matrix, k=1).count_nonzero() == 0:
                return pisolve(n, rates[ratio], h, rho0, times, observables, **kwargs)
            return evolve(generators[ratio], rho0, times, observables, monitor_positivity=cfg.solver.monitor_positivity, **kwargs)

        jobs = [(ratio, spec) for ratio in cfg.local_dephasing_ratios for spec in cfg.initial_states]
        trajectories = self.map(run, jobs)

        series, peaks = [], []
        for (ratio, spec), trajectory in zip(jobs, trajectories):
            label = f"{spec.label}@{ratio:g}"
            self.record_trajectory(label, trajectory)
            emission = np.real(trajectory.expectations["jpjm"])
            series.append(pd.DataFrame({
                "gamma_phi/gamma_Down": ratio,
                "state": spec.label,
                "t/t_D": trajectory.times / t_d,
                "jz/(N/2)": np.real(trajectory.expectations["jz"]) / (n / 2),
                "jpjm": emission,
            }))
            k = int(np.argmax(emission))
            peaks.append({
                "gamma_phi/gamma_Down": ratio,
                "state": spec.label,
                "peak_time/t_D": trajectory.times[k] / t_d,
                "peak_jpjm": emission[k],
                "interior_peak": 0 < k < emission.size - 1,
            })
        self.metadata.residuals["t_D"] = t_d
        return {"series": pd.concat(series, ignore_index=True), "peaks": pd.DataFrame(peaks)}
