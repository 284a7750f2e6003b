from typing import Dict

import numpy as np
import pandas as pd

from dickesim.composite import (
    CompositeSpace,
    composite_dissipator,
    composite_hamiltonian,
    dicke,
    embed,
    joint_collective_op,
    lift,
)
from dickesim.linalg import Superoperator, kron
from dickesim.liouvillian import lindbladian
from dickesim.models.rates import Rates
from dickesim.models.scenario import ChannelCombination, TwoEnsemblesConfig
from dickesim.operators import excited, ground, jspin
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.scenarios.superradiance import delay_time
from dickesim.solvers import Trajectory, evolve


def two_ensemble_liouvillian(space: CompositeSpace, omega0: float, joint_emission: float, combination: ChannelCombination, scale: float = 1.0) -> Superoperator:
    """
    Two Dicke ensembles sharing a collective decay channel, with the extra channels of
    ``combination``. Every rate of the combination is multiplied by ``scale``.
    """
    total = composite_hamiltonian(omega0 * joint_collective_op(space, [0, 1], "z"), space)
    total = total + (joint_emission / 2) * composite_dissipator(joint_collective_op(space, [0, 1], "minus"), space)
    if combination.collective_pumping:
        total = total + (combination.collective_pumping * scale / 2) * composite_dissipator(
            joint_collective_op(space, [0, 1], "plus"), space
        )
    own = Rates(
        local_emission=combination.local_emission * scale,
        local_dephasing=combination.local_dephasing * scale,
        collective_emission=combination.ensemble_emission * scale,
    )
    if own.max_rate > 0:
        for slot, factor in enumerate(space.factors):
            total = total + embed(lindbladian(factor.size, own), space, slot)
    return total


class TwoEnsemblesRunner(ScenarioRunner):
    """Excitation exchange between two ensembles through a common decay channel."""
    name = "two-ensembles"
    config: TwoEnsemblesConfig

    def _run(self, combination: ChannelCombination) -> Trajectory:
        cfg = self.config
        gamma = cfg.collective_emission
        space = CompositeSpace.of(dicke(cfg.n1), dicke(cfg.n2))
        generator = two_ensemble_liouvillian(space, cfg.omega0 * gamma, gamma, combination, scale=gamma)
        rho0 = kron(ground(cfg.n1).matrix, excited(cfg.n2).matrix)
        observables = {
            "jz1": lift(jspin(cfg.n1, "z"), space, 0),
            "jz2": lift(jspin(cfg.n2, "z"), space, 1),
        }
        times = cfg.time.points() * delay_time(cfg.n2, gamma)
        return evolve(
            generator, rho0, times, observables,
            monitor_positivity=cfg.solver.monitor_positivity, **cfg.solver.integrator_kwargs(),
        )

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        t_d = delay_time(cfg.n2, cfg.collective_emission)
        trajectories = self.map(self._run, cfg.combinations)
        series, final = [], []
        for combination, trajectory in zip(cfg.combinations, trajectories):
            self.record_trajectory(combination.label, trajectory)
            jz1 = np.real(trajectory.expectations["jz1"]) / (cfg.n1 / 2)
            jz2 = np.real(trajectory.expectations["jz2"]) / (cfg.n2 / 2)
            series.append(pd.DataFrame({
                "combination": combination.label,
                "t/t_D": trajectory.times / t_d,
                "jz1/(N1/2)": jz1,
                "jz2/(N2/2)": jz2,
            }))
            final.append({
                "combination": combination.label,
                "jz1/(N1/2)": jz1[-1],
                "jz2/(N2/2)": jz2[-1],
                "max_jz1/(N1/2)": jz1.max(),
            })
        self.metadata.residuals["t_D"] = t_d
        return {"series": pd.concat(series, ignore_index=True), "final": pd.DataFrame(final)}
