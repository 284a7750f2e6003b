from typing import Dict, List

import numpy as np
import pandas as pd
import scipy.sparse as sp

from dickesim.composite import destroy, dicke_cavity_hamiltonian, lift, number_op, open_dicke_liouvillian
from dickesim.exceptions import SteadyStateError
from dickesim.linalg import kron
from dickesim.models.rates import Rates
from dickesim.models.scenario import UscConfig
from dickesim.operators import ground
from dickesim.scenarios.base_scenario import ScenarioRunner
from dickesim.solvers import evolve, expect, spectrum, steadystate
from dickesim.usc import (
    bright_transitions,
    cavity_quadrature,
    dressed_basis,
    dressed_cavity_weights,
    dressed_emission_operator,
    dressed_liouvillian,
    dressed_local_weights,
)


def spectrum_peaks(omegas: np.ndarray, values: np.ndarray, count: int = 2) -> List[float]:
    """Frequencies of the ``count`` highest interior local maxima, ascending."""
    inner = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])) + 1
    strongest = inner[np.argsort(values[inner])[::-1][:count]]
    return sorted(float(omegas[k]) for k in strongest)


class UscRunner(ScenarioRunner):
    """
    Lossy Dicke model in the ultrastrong-coupling regime: the dressed-state master
    equation against the bare one, in the photon number relaxation and in the
    steady-state emission spectrum.
    """
    name = "usc"
    config: UscConfig

    def simulate(self) -> Dict[str, pd.DataFrame]:
        cfg = self.config
        h, space = dicke_cavity_hamiltonian(cfg.n_tls, cfg.n_ph, cfg.omega0, cfg.omega_cav, cfg.g)
        basis = dressed_basis(h, space)
        x_op = cavity_quadrature(space)
        local = dressed_local_weights(basis, space, 1, cfg.local_coupling, self.jobs) if cfg.local_emission else None
        dressed = dressed_liouvillian(basis, cfg.kappa, cfg.local_emission, dressed_cavity_weights(basis, x_op), local)
        bare = open_dicke_liouvillian(space, h, Rates(kappa=cfg.kappa, local_emission=cfg.local_emission))

        photons = lift(number_op(cfg.n_ph), space, 0)
        vacuum = sp.csr_matrix(([1.0], ([0], [0])), shape=(cfg.n_ph, cfg.n_ph))
        rho0 = kron(vacuum, ground(cfg.n_tls).matrix)
        n_gs = expect(photons, basis.from_dressed(basis.ground_state()))
        times = cfg.time.points() / cfg.omega0
        kwargs = cfg.solver.integrator_kwargs()

        dressed_run = evolve(dressed, basis.state_to_dressed(rho0), times, {"n": basis.to_dressed(photons)}, **kwargs)
        bare_run = evolve(bare, rho0, times, {"n": photons}, space=space, **kwargs)
        self.record_trajectory("dressed", dressed_run)
        self.record_trajectory("bare", bare_run)
        dynamics = pd.DataFrame({
            "t*omega0": dressed_run.times * cfg.omega0,
            "dressed_n-n_gs": np.real(dressed_run.expectations["n"]) - n_gs,
            "bare_n-n_gs": np.real(bare_run.expectations["n"]) - n_gs,
        })

        summary = {"n_gs": n_gs}
        omegas = cfg.spectrum.points_array() * cfg.omega0
        bare_ss = steadystate(bare)
        self.record_residual("bare:steady_state", bare_ss.residual)
        summary["bare_steady_n"] = expect(photons, bare_ss.rho)
        bare_spectrum = spectrum(bare, lift(destroy(cfg.n_ph), space, 0), omegas, bare_ss.rho, self.jobs)

        dressed_spectrum = np.full(omegas.size, np.nan)
        try:
            dressed_ss = steadystate(dressed)
        except SteadyStateError as e:
            self.warn(f"dressed steady state not unique: {e}")
        else:
            self.record_residual("dressed:steady_state", dressed_ss.residual)
            summary["dressed_steady_n"] = expect(basis.to_dressed(photons), dressed_ss.rho)
            summary["ground_fidelity"] = float(np.real(dressed_ss.rho[0, 0]))
            dressed_spectrum = spectrum(dressed, dressed_emission_operator(basis, x_op), omegas, dressed_ss.rho, self.jobs)

        splitting = np.sqrt(cfg.n_tls) * cfg.g / 2
        exact = bright_transitions(basis, x_op)
        peaks = spectrum_peaks(omegas, bare_spectrum)
        summary.update({
            "polariton_lower": cfg.omega0 - splitting,
            "polariton_upper": cfg.omega0 + splitting,
            "exact_lower": float(exact[0]),
            "exact_upper": float(exact[1]),
            "bare_peak_lower": peaks[0] if len(peaks) > 1 else np.nan,
            "bare_peak_upper": peaks[-1] if peaks else np.nan,
            "bare_spectrum_max": float(bare_spectrum.max()),
            "dressed_spectrum_max": float(np.nanmax(np.abs(dressed_spectrum))) if np.isfinite(dressed_spectrum).any() else np.nan,
            "omega_step": float(omegas[1] - omegas[0]),
        })
        spectra = pd.DataFrame({"omega/omega0": omegas / cfg.omega0, "S_bare": bare_spectrum, "S_dressed": dressed_spectrum})
        return {"dynamics": dynamics, "spectrum": spectra, "summary": pd.DataFrame([summary])}
