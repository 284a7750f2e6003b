from typing import Dict, Tuple

import numpy as np
import pandas as pd

from dickesim.composite import dicke_cavity_hamiltonian, number_op, open_dicke_liouvillian
from dickesim.config import settings
from dickesim.models.rates import Rates
from dickesim.models.scenario import OpenDickeConfig
from dickesim.operators import collective_observable
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.solvers import expect, partial_trace, steadystate, top_fock_population, wigner


def count_lobes(values: np.ndarray, relative: float = 1e-3) -> int:
    """Number of strict interior local maxima above ``relative`` times the global maximum."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return 0
    inner = values[1:-1]
    peaks = (inner > values[:-2]) & (inner > values[2:]) & (inner > relative * values.max())
    return int(peaks.sum())


class OpenDickeRunner(ScenarioRunner):
    """Steady state of the Dicke model in a lossy cavity, one run per dissipation variant."""
    name = "open-dicke"
    config: OpenDickeConfig

    def variant_rates(self, variant: Rates) -> Rates:
        """Variant channels plus the cavity loss and the common dephasing."""
        cfg = self.config
        values = variant.model_dump()
        values["kappa"] = cfg.kappa
        values["local_dephasing"] += cfg.local_dephasing
        return Rates(**values)

    def _steady(self, item: Tuple[str, Rates]):
        label, variant = item
        cfg = self.config
        h, space = dicke_cavity_hamiltonian(cfg.n_tls, cfg.n_ph, cfg.omega0, cfg.omega_cav, cfg.coupling)
        ss = steadystate(open_dicke_liouvillian(space, h, self.variant_rates(variant)))
        return space, ss

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        n = cfg.n_tls
        axis = cfg.wigner.axis()
        x_grid, p_grid = np.meshgrid(axis, axis)
        centre = int(np.argmin(np.abs(axis)))
        items = list(cfg.variants.items())
        results = self.map(self._steady, items)

        wigner_frames, distributions, moments = [], [], []
        for (label, _), (space, ss) in zip(items, results):
            self.record_residual(f"{label}:steady_state", ss.residual)
            top = top_fock_population(ss.rho, space, 0)
            if top > settings.TRUNCATION_WARN:
                self.warn(f"variant {label}: top Fock level population {top:.3e}; increase n_ph")
            rho_ph = partial_trace(ss.rho, space, 0)
            rho_tls = partial_trace(ss.rho, space, 1)
            w = wigner(rho_ph, axis, axis)
            wigner_frames.append(pd.DataFrame({
                "variant": label, "x": x_grid.ravel(), "p": p_grid.ravel(), "W": w.ravel(),
            }))
            populations = np.real(rho_ph.diagonal())
            distributions.append(pd.DataFrame({"variant": label, "n": np.arange(cfg.n_ph), "P(n)": populations}))
            moments.append({
                "variant": label,
                "<a^dag a>": expect(number_op(cfg.n_ph), rho_ph),
                "<Jz>/(N/2)": expect(collective_observable(n, "jz"), rho_tls) / (n / 2),
                "<J2>": expect(collective_observable(n, "j2"), rho_tls),
                "<Jx2>": expect(collective_observable(n, "jx2"), rho_tls),
                "top_fock_population": top,
                "wigner_lobes": count_lobes(w[centre]),
            })
        return {
            "wigner": pd.concat(wigner_frames, ignore_index=True),
            "photon_distribution": pd.concat(distributions, ignore_index=True),
            "moments": pd.DataFrame(moments),
        }
