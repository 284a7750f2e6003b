from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp

from dickesim.linalg import Superoperator, as_sparse
from dickesim.liouvillian import liouvillian
from dickesim.models.rates import Rates
from dickesim.models.scenario import SqueezingConfig
from dickesim.operators import collective_observable, dicke_ket_labels, dicke_state, jspin
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.solvers import Trajectory, evolve, squeezing_duration

SQUEEZING_OBSERVABLES = ("jx", "jy", "jz", "jy2")


def twisting_hamiltonian(n_tls: int, twisting: float) -> sp.csr_matrix:
    """Two-axis twisting ``-i Lambda (J+^2 - J-^2)``."""
    jp, jm = jspin(n_tls, "plus"), jspin(n_tls, "minus")
    return as_sparse(-1j * twisting * (jp @ jp - jm @ jm))


def xi2_series(trajectory: Trajectory, n_tls: int) -> np.ndarray:
    """``xi^2`` at every sample; NaN where the mean spin in the z-x plane vanishes."""
    e = {label: np.real(trajectory.expectations[label]) for label in SQUEEZING_OBSERVABLES}
    denominator = e["jz"] ** 2 + e["jx"] ** 2
    variance = e["jy2"] - e["jy"] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > 1e-12, n_tls * variance / denominator, np.nan)


def squeezing_summary(times: np.ndarray, xi2: np.ndarray) -> Dict[str, Optional[float]]:
    """Minimum ``xi^2``, when it is reached and the longest stretch below 1."""
    if np.all(np.isnan(xi2)):
        return {"min_xi2": None, "t_min": None, "tau": 0.0}
    k = int(np.nanargmin(xi2))
    return {"min_xi2": float(xi2[k]), "t_min": float(times[k]), "tau": squeezing_duration(times, xi2)}


def top_states(n_tls: int) -> List[Tuple[int, int]]:
    """``(j2, j2)`` for every ``|j, j>`` state, largest j first."""
    return [(j2, j2) for j2 in range(n_tls, -1, -2)]


class SqueezingRunner(ScenarioRunner):
    """Spin squeezing under two-axis twisting with local and collective emission."""
    name = "squeezing"
    config: SqueezingConfig

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._generators: Dict[Tuple[int, Rates], Superoperator] = {}

    def _generator(self, n_tls: int, rates: Rates) -> Superoperator:
        key = (n_tls, rates)
        if key not in self._generators:
            self._generators[key] = liouvillian(n_tls, rates, twisting_hamiltonian(n_tls, self.config.twisting))
        return self._generators[key]

    def _times(self) -> np.ndarray:
        return self.config.time.points() / self.config.twisting

    def _rates(self, local: float, collective: float) -> Rates:
        """Rates given in units of Lambda."""
        return Rates(local_emission=local * self.config.twisting, collective_emission=collective * self.config.twisting)

    def _xi2(self, n_tls: int, rates: Rates, rho0) -> np.ndarray:
        cfg = self.config
        observables = {label: collective_observable(n_tls, label) for label in SQUEEZING_OBSERVABLES}
        trajectory = evolve(
            self._generator(n_tls, rates), rho0, self._times(), observables,
            monitor_positivity=cfg.solver.monitor_positivity, **cfg.solver.integrator_kwargs(),
        )
        return xi2_series(trajectory, n_tls)

    def _scan(self, n_tls: int, rates: Rates, states: List[Tuple[int, int]], **fields) -> List[Dict]:
        # generators are shared between threads, so build them before fanning out
        self._generator(n_tls, rates)
        series = self.map(lambda jm: self._xi2(n_tls, rates, dicke_state(n_tls, *jm)), states)
        times = self.config.time.points()
        return [
            {**fields, "j": j2 / 2, "m": m2 / 2, **squeezing_summary(times, xi2)}
            for (j2, m2), xi2 in zip(states, series)
        ]

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        n = cfg.n_tls
        rates = self._rates(cfg.local_emission, cfg.collective_emission)
        times = cfg.time.points()
        tables: Dict[str, pd.DataFrame] = {}

        self._generator(n, rates)
        frames = []
        for spec, xi2 in zip(cfg.initial_states, self.map(lambda s: self._xi2(n, rates, s.build(n)), cfg.initial_states)):
            frames.append(pd.DataFrame({"state": spec.label, "t*Lambda": times, "xi2": xi2}))
            summary = squeezing_summary(times, xi2)
            self.metadata.residuals[f"{spec.label}:tau*Lambda"] = summary["tau"]
        tables["series"] = pd.concat(frames, ignore_index=True)

        if cfg.scan_jj:
            tables["scan_jj"] = pd.DataFrame(self._scan(n, rates, top_states(n)))
        if cfg.scan_all:
            j2, m2 = dicke_ket_labels(n)
            tables["scan_all"] = pd.DataFrame(self._scan(n, rates, list(zip(j2.tolist(), m2.tolist()))))
        if cfg.tradeoff:
            rows = []
            for channel, channel_rates in (
                ("local", self._rates(cfg.tradeoff_rate, 0.0)),
                ("collective", self._rates(0.0, cfg.tradeoff_rate)),
            ):
                rows += self._scan(n, channel_rates, top_states(n), channel=channel)
            tables["tradeoff"] = pd.DataFrame(rows)
        if cfg.scan_rates is not None:
            rows = []
            for g_local in cfg.scan_rates.local_emission_values:
                for g_collective in cfg.scan_rates.collective_emission_values:
                    point = self._rates(g_local, g_collective)
                    rows += self._scan(n, point, [(n, n)], **{"gamma_down/Lambda": g_local, "gamma_Down/Lambda": g_collective})
            tables["scan_rates"] = pd.DataFrame(rows)
        if cfg.scan_sizes is not None:
            rows = []
            for g_local in cfg.scan_sizes.local_emission_values:
                for size in cfg.scan_sizes.n_values:
                    point = self._rates(g_local, cfg.scan_sizes.collective_emission)
                    rows += self._scan(size, point, [(size, size)], **{"gamma_down/Lambda": g_local, "N": size})
            tables["scan_sizes"] = pd.DataFrame(rows)
        return tables
