from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from dickesim.models.rates import Rates
from dickesim.models.scenario import SteadySuperradianceConfig
from dickesim.operators import collective_observable
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.solvers import expect, pisteadystate


class SteadySuperradianceRunner(ScenarioRunner):
    """
    Steady-state emission ``<J+J->_ss / N`` under incoherent local pumping.

    Every point is diagonal in the Dicke basis, so the populations of the rate
    matrix are solved directly.
    """
    name = "steady-superradiance"
    config: SteadySuperradianceConfig

    def _emission(self, job: Tuple[int, Rates]) -> Tuple[float, float]:
        n, rates = job
        ss = pisteadystate(n, rates)
        return expect(collective_observable(n, "jpjm"), ss.rho) / n, ss.residual

    def _sweep_rows(self, series: str, jobs: List[Tuple[int, Rates]], extra: List[Dict]) -> List[Dict]:
        results = self.map(self._emission, jobs)
        rows = []
        for (n, _), (emission, residual), fields in zip(jobs, results, extra):
            key = f"{series}:N={n}"
            self.metadata.residuals[key] = max(residual, self.metadata.residuals.get(key, 0.0))
            rows.append({"series": series, "N": n, **fields, "jpjm_ss/N": emission})
        return rows

    def _pump_jobs(self, n_thermal=None):
        cfg = self.config
        gamma = cfg.collective_emission
        jobs, extra = [], []
        for n in cfg.n_values:
            for ratio in cfg.pump_ratios:
                pump = ratio * n * gamma
                if n_thermal is None:
                    rates = Rates(collective_emission=gamma, local_pumping=pump, local_emission=cfg.local_emission_ratio * n * gamma)
                elif n_thermal == np.inf:
                    rates = Rates(collective_emission=gamma, local_pumping=pump, local_emission=pump)
                else:
                    rates = Rates.detailed_balance(pump / n_thermal, n_thermal, collective_emission=gamma)
                jobs.append((n, rates))
                extra.append({"gamma_up/(N gamma_Down)": ratio})
        return jobs, extra

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        tables: Dict[str, pd.DataFrame] = {}
        rows: List[Dict] = []
        if "pump" in cfg.modes:
            rows += self._sweep_rows("pump", *self._pump_jobs())
        if "detailed_balance" in cfg.modes:
            thermal = list(cfg.n_thermal_values) + ([np.inf] if cfg.high_temperature else [])
            for n_thermal in thermal:
                label = "n_T=inf" if n_thermal == np.inf else f"n_T={n_thermal:g}"
                rows += self._sweep_rows(label, *self._pump_jobs(n_thermal))
        if rows:
            sweep = pd.DataFrame(rows)
            tables["sweep"] = sweep
            tables["peaks"] = sweep_peaks(sweep)

        if "grid" in cfg.modes:
            n, gamma = cfg.grid_n_tls, cfg.collective_emission
            points = [(g0, nt) for g0 in cfg.gamma0_values for nt in cfg.n_thermal_grid]
            jobs = [(n, Rates.detailed_balance(g0 * gamma, nt, collective_emission=gamma)) for g0, nt in points]
            extra = [{"gamma0/gamma_Down": g0, "n_T": nt} for g0, nt in points]
            tables["grid"] = pd.DataFrame(self._sweep_rows("grid", jobs, extra))
        return tables


def sweep_peaks(sweep: pd.DataFrame) -> pd.DataFrame:
    """Location of the emission maximum of every (series, N) sweep."""
    rows = []
    for (series, n), group in sweep.groupby(["series", "N"], sort=False):
        x = group["gamma_up/(N gamma_Down)"].to_numpy()
        y = group["jpjm_ss/N"].to_numpy()
        k = int(np.argmax(y))
        edges = max(y[0], y[-1])
        rows.append({
            "series": series,
            "N": n,
            "peak_gamma_up/(N gamma_Down)": x[k],
            "peak_jpjm_ss/N": y[k],
            "peak_over_endpoints": y[k] / edges if edges > 0 else np.inf,
            "interior_peak": 0 < k < y.size - 1,
        })
    return pd.DataFrame(rows)
