import logging
import os
import time
from typing import Dict

import numpy as np
import pandas as pd

from dickesim.config import settings
from dickesim.liouvillian import lindbladian, liouvillian, rate_matrix, uncoupled_liouvillian
from dickesim.models.output import BenchEntry, BenchReport
from dickesim.models.rates import Rates
from dickesim.models.scenario import BenchConfig
from dickesim.operators import excited, jspin, uncoupled_collective
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.scenarios.superradiance import delay_time
from dickesim.solvers import evolve, pisolve
from dickesim.utils.io import machine_info, write_json

ALL_CHANNELS = Rates(
    collective_emission=1.0,
    collective_dephasing=1.0,
    collective_pumping=1.0,
    local_emission=1.0,
    local_dephasing=1.0,
    local_pumping=1.0,
)
DECAY = Rates(collective_emission=1.0, local_dephasing=1.0)


def timed(fn, *args, **kwargs):
    started = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - started


class BenchRunner(ScenarioRunner):
    """
    Build and solve timings over an N grid: the Dicke-basis Lindbladian with every
    channel, the rate matrix, the uncoupled-basis generator below the oracle cap, and
    the superradiant decay through pisolve and, for small N, through evolve.
    """
    name = "bench"
    config: BenchConfig

    def _entry(self, n: int) -> BenchEntry:
        cfg = self.config
        h = jspin(n, "z")
        generator, lindbladian_s = timed(lindbladian, n, ALL_CHANNELS)
        _, rate_matrix_s = timed(rate_matrix, n, ALL_CHANNELS)
        times = np.linspace(0.0, cfg.t_max * delay_time(n, DECAY.collective_emission), cfg.steps)
        observables = {"jz": jspin(n, "z")}
        _, pisolve_s = timed(pisolve, n, DECAY, h, excited(n), times, observables)

        evolve_s = oracle_s = None
        if n <= cfg.evolve_max_n:
            decay = liouvillian(n, DECAY, h)
            _, evolve_s = timed(evolve, decay, excited(n), times, observables)
        if n <= settings.ORACLE_CAP:
            _, oracle_s = timed(uncoupled_liouvillian, n, ALL_CHANNELS, uncoupled_collective(n, "z"))
        logging.info(f"bench N={n}: lindbladian {lindbladian_s:.3f} s, pisolve {pisolve_s:.3f} s")
        return BenchEntry(
            n_tls=n,
            n_ds=generator.hilbert_dim,
            lindbladian_nnz=generator.nnz,
            lindbladian_s=lindbladian_s,
            rate_matrix_s=rate_matrix_s,
            pisolve_s=pisolve_s,
            evolve_s=evolve_s,
            oracle_s=oracle_s,
        )

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        # timings are taken one N at a time
        entries = [self._entry(n) for n in cfg.n_values]
        report = BenchReport(machine=machine_info(), steps=cfg.steps, t_max_in_t_d=cfg.t_max, entries=entries)
        path = write_json(report.model_dump(), self.output_dir, "bench_report.json")
        self.metadata.files.append(os.path.basename(path))
        return {"timings": pd.DataFrame([entry.model_dump() for entry in entries])}
