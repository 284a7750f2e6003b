from typing import Dict, Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sp

from dickesim.linalg import as_sparse
from dickesim.liouvillian import liouvillian
from dickesim.models.scenario import HamiltonianTerm, SimulateConfig
from dickesim.operators import collective_observable, jspin
from dickesim.dicke_space import dicke_basis
from dickesim.scenarios.base_scenario import ScenarioRunner, trajectory_frame
from dickesim.solvers import evolve, pisolve


def collective_hamiltonian(n_tls: int, terms: Sequence[HamiltonianTerm]) -> sp.csr_matrix:
    """Sum of ``coefficient * J_axis ** power`` in the Dicke basis."""
    n_ds = dicke_basis(n_tls).n_ds
    h = sp.csr_matrix((n_ds, n_ds), dtype=np.complex128)
    for term in terms:
        op = jspin(n_tls, term.axis)
        if term.power == 2:
            op = op @ op
        h = h + term.coefficient * op
    return as_sparse(h)


class SimulateRunner(ScenarioRunner):
    """Config-driven single trajectory: any rates, a collective Hamiltonian, named observables."""
    name = "simulate"
    config: SimulateConfig

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        n = cfg.n_tls
        h = collective_hamiltonian(n, cfg.hamiltonian)
        rho0 = cfg.initial_state.build(n)
        observables = {name: collective_observable(n, name) for name in cfg.observables}
        kwargs = cfg.solver.integrator_kwargs()
        if cfg.solver.use_pisolve:
            trajectory = pisolve(n, cfg.rates, h, rho0, cfg.time.points(), observables, **kwargs)
        else:
            trajectory = evolve(
                liouvillian(n, cfg.rates, h), rho0, cfg.time.points(), observables,
                monitor_positivity=cfg.solver.monitor_positivity, **kwargs,
            )
        self.record_trajectory(cfg.initial_state.label, trajectory)
        self.metadata.timings["solve_s"] = trajectory.metadata["wall_time"]
        return {"expectations": trajectory_frame(trajectory, "t")}
