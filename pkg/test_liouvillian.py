#!/usr/bin/env python3
"""
Tests for the permutation-invariant Lindbladian: brute-force oracle agreement,
the two assembly paths, the rate matrix and the jump superoperators.
"""
import numpy as np
import pytest
import scipy.sparse as sp

from dickesim.dicke_space import ElementIndex, dicke_basis
from dickesim.exceptions import SymmetryViolationError
from dickesim.linalg import trace_functional, vectorize
from dickesim.liouvillian import (
    block_support,
    gamma_rates,
    jump_superoperator,
    lindbladian,
    lindbladian_from_jumps,
    liouvillian,
    rate_matrix,
    uncoupled_liouvillian,
)
from dickesim.models.rates import Rates
from dickesim.operators import css, excited, ground, j2_operator, jspin, uncoupled_collective, uncoupled_state
from dickesim.solvers import evolve

RNG = np.random.default_rng(2018)
CHANNELS = (
    "collective_emission", "collective_dephasing", "collective_pumping",
    "local_emission", "local_dephasing", "local_pumping",
)


def random_rates() -> Rates:
    return Rates(**{name: float(RNG.uniform(0.0, 1.0)) for name in CHANNELS})


def test_dicke_basis_matches_uncoupled_oracle():
    for n in (2, 3, 4):
        for _ in range(3):
            rates = random_rates()
            omega0, omega_x = RNG.uniform(0.0, 2.0, size=2)
            h = omega0 * jspin(n, "z") + omega_x * jspin(n, "x")
            h_unc = omega0 * uncoupled_collective(n, "z") + omega_x * uncoupled_collective(n, "x")
            times = np.linspace(0.0, 5.0 / rates.max_rate, 40)
            tight = {"rtol": 1e-11, "atol": 1e-13}

            jp, jm = uncoupled_collective(n, "plus"), uncoupled_collective(n, "minus")
            jx, jy, jz = (uncoupled_collective(n, axis) for axis in ("x", "y", "z"))
            product_obs = {"jz": jz, "jpjm": jp @ jm, "j2": jx @ jx + jy @ jy + jz @ jz}
            dicke_obs = {"jz": jspin(n, "z"), "jpjm": jspin(n, "plus") @ jspin(n, "minus"), "j2": j2_operator(n)}

            coupled = evolve(liouvillian(n, rates, h), css(n, 0.6, 0.8), times, dicke_obs, **tight)
            product = evolve(uncoupled_liouvillian(n, rates, h_unc), uncoupled_state("css", n, a=0.6, b=0.8), times, product_obs, **tight)
            for label in dicke_obs:
                assert np.abs(coupled.expectations[label] - product.expectations[label]).max() < 1e-7, (n, label)


def test_assembly_paths_agree():
    for n in (1, 2, 3, 4, 5, 8):
        rates = random_rates()
        direct = lindbladian(n, rates)
        composed = lindbladian_from_jumps(n, rates)
        assert np.array_equal(direct.support, composed.support)
        assert abs(direct.matrix - composed.matrix).max() < 1e-10


def test_lindbladian_preserves_trace_on_block_elements():
    n = 6
    d = lindbladian(n, random_rates())
    trace_row = trace_functional(dicke_basis(n).n_ds)
    leak = trace_row @ d.matrix
    assert np.abs(leak).max() < 1e-12
    assert d.support.sum() == len(dicke_basis(n).elements)


def test_rate_matrix_columns_sum_to_zero():
    for n in range(1, 61):
        m = rate_matrix(n, random_rates())
        scale = max(1.0, abs(m).max())
        assert np.abs(np.asarray(m.sum(axis=0))).max() < 1e-12 * scale


def test_rate_matrix_pattern_for_four_emitters():
    m = rate_matrix(4, Rates(local_emission=1.0, collective_emission=1.0))
    expected = {
        (0, 0), (1, 0), (5, 0),
        (1, 1), (2, 1), (6, 1),
        (2, 2), (3, 2), (7, 2),
        (3, 3), (4, 3),
        (2, 5), (5, 5), (6, 5), (8, 5),
        (3, 6), (6, 6), (7, 6),
        (4, 7), (7, 7),
        (7, 8), (8, 8),
    }
    rows, cols = m.nonzero()
    assert set(zip(rows.tolist(), cols.tolist())) == expected
    assert m.shape == (9, 9)


def test_rate_matrix_pattern_with_local_dephasing():
    # same-m transfers between neighbouring blocks
    dephasing = {(5, 1), (6, 2), (7, 3), (1, 5), (2, 6), (3, 7), (8, 6), (6, 8)}
    emission = {
        (1, 0), (5, 0), (2, 1), (6, 1), (3, 2), (7, 2), (4, 3),
        (2, 5), (6, 5), (8, 5), (3, 6), (7, 6), (4, 7), (7, 8),
    }

    def off_diagonal(m):
        rows, cols = m.nonzero()
        return {(r, c) for r, c in zip(rows.tolist(), cols.tolist()) if r != c}

    assert off_diagonal(rate_matrix(4, Rates(local_dephasing=1.0))) == dephasing
    m = rate_matrix(4, Rates(local_dephasing=0.7, local_emission=1.0, collective_emission=1.0))
    assert off_diagonal(m) == emission | dephasing
    dense = m.toarray()
    assert np.all(np.diag(dense)[:4] < 0)
    assert np.all(np.diag(dense)[5:] < 0)
    assert abs(dense[4, 4]) < 1e-12


def test_rate_matrix_is_the_diagonal_of_the_lindbladian():
    n = 5
    rates = random_rates()
    basis = dicke_basis(n)
    diagonal = np.arange(basis.n_ds) * (basis.n_ds + 1)
    full = lindbladian(n, rates).matrix[diagonal][:, diagonal]
    assert abs(full - rate_matrix(n, rates)).max() < 1e-12


def test_gamma_rates_of_the_excited_state():
    n = 6
    gamma = gamma_rates(n, Rates(collective_emission=1.0), ElementIndex(j2=n, m2=n, m2p=n))
    assert gamma[0] == pytest.approx(n)
    assert gamma[1] == pytest.approx(n)
    assert all(value == 0.0 for value in gamma[2:])


def test_jump_superoperator_trace():
    n = 5
    t = jump_superoperator(n, "minus", "minus")
    trace_row = trace_functional(dicke_basis(n).n_ds)
    assert trace_row @ t.apply(vectorize(excited(n).matrix)) == pytest.approx(n)
    assert abs(trace_row @ t.apply(vectorize(ground(n).matrix))) < 1e-12
    assert np.array_equal(t.support, block_support(dicke_basis(n)))


def test_block_mixing_hamiltonian_is_rejected():
    n = 4
    basis = dicke_basis(n)
    top, lower = basis.index(4, 2), basis.index(2, 2)
    h = sp.csr_matrix(([1.0, 1.0], ([top, lower], [lower, top])), shape=(basis.n_ds, basis.n_ds))
    with pytest.raises(SymmetryViolationError):
        liouvillian(n, Rates(collective_emission=1.0), h)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
