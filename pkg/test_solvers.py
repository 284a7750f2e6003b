#!/usr/bin/env python3
"""
Tests for time evolution, steady states and the analysis helpers.
"""
import numpy as np
import pytest
import scipy.sparse as sp

from dickesim.composite import CompositeSpace, bosonic, bosonic_liouvillian, destroy, dicke, number_op
from dickesim.dicke_space import dicke_basis
from dickesim.exceptions import (
    AmbiguousSteadyStateError,
    DimensionMismatchError,
    InvalidEnsembleError,
    NonDiagonalInputError,
    UndefinedSqueezingError,
)
from dickesim.linalg import kron
from dickesim.liouvillian import liouvillian, rate_matrix
from dickesim.models.rates import Rates
from dickesim.operators import collective_observable, css, dicke_state, excited, ground, jspin
from dickesim.solvers import (
    evolve,
    expect,
    partial_trace,
    pisolve,
    pisteadystate,
    spectrum,
    spin_squeezing_xi2,
    squeezing_duration,
    steadystate,
    top_fock_population,
    wigner,
)

TIGHT = {"rtol": 1e-11, "atol": 1e-13}


def test_pisolve_matches_full_evolution():
    n = 10
    rates = Rates(collective_emission=1.0, local_dephasing=0.5, local_emission=0.2)
    h = jspin(n, "z")
    times = np.linspace(0.0, 1.0, 51)
    observables = {"jz": collective_observable(n, "jz"), "jpjm": collective_observable(n, "jpjm")}
    full = evolve(liouvillian(n, rates, h), excited(n), times, observables, **TIGHT)
    fast = pisolve(n, rates, h, excited(n), times, observables, **TIGHT)
    assert np.allclose(full.times, fast.times)
    assert np.abs(full.expectations["jz"] - fast.expectations["jz"]).max() / (n / 2) < 1e-7
    assert np.abs(full.expectations["jpjm"] - fast.expectations["jpjm"]).max() / (n * n / 4) < 1e-7
    assert full.metadata["trace_drift"] < 1e-8
    assert fast.metadata["trace_drift"] < 1e-8


def test_pisolve_rejects_coherences():
    n = 4
    with pytest.raises(NonDiagonalInputError) as info:
        pisolve(n, Rates(collective_emission=1.0), None, css(n), [0.0, 1.0])
    assert "j=2" in str(info.value)
    with pytest.raises(NonDiagonalInputError):
        pisolve(n, Rates(collective_emission=1.0), jspin(n, "x"), excited(n), [0.0, 1.0])


def test_evolve_rejects_coherences_between_blocks():
    n = 4
    basis = dicke_basis(n)
    top, lower = basis.index(4, 2), basis.index(2, 2)
    rho = sp.csr_matrix(
        ([0.5, 0.5, 0.1, 0.1], ([top, lower, top, lower], [top, lower, lower, top])),
        shape=(basis.n_ds, basis.n_ds),
    )
    with pytest.raises(InvalidEnsembleError):
        evolve(liouvillian(n, Rates(collective_emission=1.0), jspin(n, "z")), rho, [0.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        evolve(liouvillian(n, Rates(collective_emission=1.0), jspin(n, "z")), excited(3), [0.0, 1.0])


def test_dark_state_is_stationary_under_collective_decay():
    n = 6
    times = np.linspace(0.0, 3.0, 31)
    trajectory = evolve(
        liouvillian(n, Rates(collective_emission=1.0), jspin(n, "z")),
        dicke_state(n, 0, 0), times, {"jz": jspin(n, "z")}, keep_states=True,
    )
    assert np.abs(trajectory.expectations["jz"]).max() < 1e-12
    assert len(trajectory.states) == times.size


def test_positivity_dip_triggers_a_tighter_rerun(monkeypatch):
    from dickesim import solvers

    n = 4
    generator = liouvillian(n, Rates(collective_emission=1.0, local_dephasing=0.5), jspin(n, "z"))
    times = np.linspace(0.0, 1.0, 11)
    calls = []
    run = solvers._run_trajectory

    def recording(*args):
        calls.append((args[5], args[6]))
        return run(*args)

    monkeypatch.setattr(solvers, "_run_trajectory", recording)
    clean = evolve(generator, excited(n), times, rtol=1e-6, atol=1e-8, monitor_positivity=True)
    assert clean.metadata["min_eigenvalue"] > -1e-6
    assert "tightened" not in clean.metadata
    assert len(calls) == 1

    # every sampled state has an eigenvalue below 1, so this threshold always fires
    monkeypatch.setattr(solvers.settings, "POSITIVITY_TOL", -1.0)
    calls.clear()
    redone = evolve(generator, excited(n), times, {"jz": jspin(n, "z")}, rtol=1e-6, atol=1e-8, monitor_positivity=True)
    assert redone.metadata["tightened"] is True
    assert "min_eigenvalue" in redone.metadata
    assert calls == [(1e-6, 1e-8), (pytest.approx(1e-8), pytest.approx(1e-10))]
    assert redone.expectations["jz"].size == times.size


def test_steady_state_agrees_with_population_solver():
    n = 6
    rates = Rates(collective_emission=1.0, local_pumping=2.0, local_emission=0.3)
    full = steadystate(liouvillian(n, rates, jspin(n, "z")))
    diagonal = pisteadystate(n, rates)
    assert full.residual < 1e-9
    assert diagonal.residual < 1e-9
    assert np.allclose(full.rho.diagonal(), diagonal.rho.diagonal(), atol=1e-9)
    assert abs(rate_matrix(n, rates) @ np.real(diagonal.rho.diagonal())).max() < 1e-9
    assert expect(collective_observable(n, "jpjm"), full.rho) > 0


def test_local_pumping_concentrates_on_top_of_each_block():
    n = 6
    ss = pisteadystate(n, Rates(local_pumping=1.0, local_emission=0.3))
    basis = dicke_basis(n)
    populations = np.real(ss.rho.diagonal())
    tops = [basis.index(j2, j2) for j2 in range(n, -1, -2)]
    assert populations.sum() == pytest.approx(1.0)
    assert populations[tops].sum() > 0.5


def test_collective_decay_alone_has_many_steady_states():
    with pytest.raises(AmbiguousSteadyStateError):
        steadystate(liouvillian(2, Rates(collective_emission=1.0), jspin(2, "z")))


def test_degenerate_kernel_is_reported_on_the_sparse_path():
    # both generators are too large for the dense eigensolver
    generator = liouvillian(12, Rates(collective_emission=1.0), jspin(12, "z"))
    assert int(generator.support.sum()) > 400
    with pytest.raises(AmbiguousSteadyStateError):
        steadystate(generator)
    assert dicke_basis(40).n_ds > 400
    with pytest.raises(AmbiguousSteadyStateError):
        pisteadystate(40, Rates(collective_emission=1.0))


def test_shifted_eigensolver_handles_an_exactly_singular_generator():
    from dickesim.solvers import _kernel_by_eigs

    n = 40
    m = rate_matrix(n, Rates(collective_emission=1.0, local_emission=0.5))
    basis = dicke_basis(n)
    assert basis.n_ds > 400
    # the all-ground population has an empty column
    assert abs(m[:, basis.index(n, -n)]).max() == 0
    kernel = _kernel_by_eigs(m, 1e-8 * abs(m).max())
    kernel = np.real(kernel / kernel.sum())
    assert kernel[basis.index(n, -n)] == pytest.approx(1.0)
    assert np.abs(np.delete(kernel, basis.index(n, -n))).max() < 1e-8


def test_cavity_spectrum_peaks_at_the_mode_frequency():
    n_ph = 15
    generator = bosonic_liouvillian(n_ph, kappa=0.2, w=0.05, h_b=number_op(n_ph))
    ss = steadystate(generator)
    thermal = 0.05 / (0.2 - 0.05)
    assert expect(number_op(n_ph), ss.rho) == pytest.approx(thermal, rel=1e-6)
    omegas = np.linspace(0.02, 2.0, 100)
    s = spectrum(generator, destroy(n_ph), omegas, ss.rho)
    assert omegas[int(np.argmax(s))] == pytest.approx(1.0)
    assert np.all(s > -1e-12)
    assert np.allclose(spectrum(generator, destroy(n_ph), omegas, ss.rho, jobs=3), s)


def test_wigner_of_fock_states():
    axis = np.linspace(-6.0, 6.0, 241)
    vacuum = np.diag([1.0, 0.0, 0.0, 0.0])
    w = wigner(vacuum, axis, axis)
    centre = 120
    assert w.shape == (axis.size, axis.size)
    assert w[centre, centre] == pytest.approx(1 / np.pi)
    step = axis[1] - axis[0]
    assert w.sum() * step * step == pytest.approx(1.0, abs=1e-6)
    one = np.diag([0.0, 1.0, 0.0, 0.0])
    assert wigner(one, [0.0], [0.0])[0, 0] == pytest.approx(-1 / np.pi)
    displaced = wigner(vacuum, [1.0], [0.5])[0, 0]
    assert displaced == pytest.approx(np.exp(-1.25) / np.pi)


def test_partial_trace_and_fock_tail():
    space = CompositeSpace.of(bosonic(3), dicke(2))
    photon = np.diag([0.5, 0.3, 0.2])
    rho = kron(photon, excited(2).matrix)
    assert np.allclose(partial_trace(rho, space, 0).toarray(), photon)
    assert top_fock_population(rho, space, 0) == pytest.approx(0.2)
    with pytest.raises(InvalidEnsembleError):
        top_fock_population(rho, space, 1)


def test_squeezing_parameter_of_coherent_states():
    n = 8
    assert spin_squeezing_xi2(excited(n), n) == pytest.approx(1.0)
    assert spin_squeezing_xi2(ground(n), n) == pytest.approx(1.0)
    with pytest.raises(UndefinedSqueezingError):
        spin_squeezing_xi2(dicke_state(n, 0, 0), n)


def test_squeezing_duration():
    times = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    assert squeezing_duration(times, [1.2, 0.9, 0.8, None, 0.7, 0.6]) == pytest.approx(1.0)
    assert squeezing_duration(times, [0.9, 0.9, 0.9, 0.9, 1.1, 1.0]) == pytest.approx(3.0)
    assert squeezing_duration(times, [1.0] * 6) == 0.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
