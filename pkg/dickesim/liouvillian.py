"""
Permutation-invariant Lindbladian in the Dicke basis.

Every element ``p_{j,m,m'}`` is coupled to at most eight neighbours
``(j + dj, m + dm, m' + dm)`` with ``dj, dm`` in ``{-1, 0, +1}``. The nine rates
``Gamma_1..Gamma_9`` give, in order, the outflow of the element itself and the
inflow into the targets listed in ``GAMMA_SHIFTS``.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
import scipy.sparse as sp

from dickesim.config import settings
from dickesim.dicke_space import DickeBasis, ElementIndex, alpha_coeff, check_n_tls, degeneracy, dicke_basis
from dickesim.exceptions import DimensionMismatchError, SymmetryViolationError
from dickesim.linalg import (
    Superoperator,
    as_sparse,
    from_triplets,
    hamiltonian_superoperator,
    identity,
    lindblad_dissipator,
    spost,
    spre,
)
from dickesim.models.rates import Rates
from dickesim.operators import SpinAxis, check_oracle_cap, j2_operator, jspin, uncoupled_collective, uncoupled_operator

logger = logging.getLogger(__name__)

# (doubled j shift, doubled m shift) of the targets of Gamma_2 .. Gamma_9
GAMMA_SHIFTS: Tuple[Tuple[int, int], ...] = (
    (0, -2), (-2, -2), (2, -2),
    (-2, 0), (2, 0),
    (-2, 2), (0, 2), (2, 2),
)

_M_SHIFT = {SpinAxis.PLUS: 2, SpinAxis.MINUS: -2, SpinAxis.Z: 0}


@dataclass(frozen=True)
class LadderCoefficients:
    """Matrix elements of the single-TLS operators between (j, m) and (j', m + q)."""
    j: np.ndarray
    m: np.ndarray

    def a(self, q: SpinAxis) -> np.ndarray:
        j, m = self.j, self.m
        if q is SpinAxis.PLUS:
            return np.sqrt(np.maximum((j - m) * (j + m + 1), 0.0))
        if q is SpinAxis.MINUS:
            return np.sqrt(np.maximum((j + m) * (j - m + 1), 0.0))
        return np.asarray(m, dtype=float)

    def b(self, q: SpinAxis) -> np.ndarray:
        j, m = self.j, self.m
        if q is SpinAxis.PLUS:
            return np.sqrt(np.maximum((j - m) * (j - m - 1), 0.0))
        if q is SpinAxis.MINUS:
            return -np.sqrt(np.maximum((j + m) * (j + m - 1), 0.0))
        return np.sqrt(np.maximum((j + m) * (j - m), 0.0))

    def d(self, q: SpinAxis) -> np.ndarray:
        j, m = self.j, self.m
        if q is SpinAxis.PLUS:
            return -np.sqrt(np.maximum((j + m + 1) * (j + m + 2), 0.0))
        if q is SpinAxis.MINUS:
            return np.sqrt(np.maximum((j - m + 1) * (j - m + 2), 0.0))
        return np.sqrt(np.maximum((j + m + 1) * (j - m + 1), 0.0))


def _safe_inverse(denominator: np.ndarray) -> np.ndarray:
    denominator = np.asarray(denominator, dtype=float)
    out = np.zeros_like(denominator)
    np.divide(1.0, denominator, out=out, where=denominator != 0)
    return out


def _gamma_table(n_tls: int, rates: Rates, j, m, mp) -> np.ndarray:
    """Array of shape (9, len(j)) with Gamma_1..Gamma_9 for every (j, m, m')."""
    j, m, mp = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (j, m, mp))
    half = n_tls / 2.0
    lad, ladp = LadderCoefficients(j, m), LadderCoefficients(j, mp)
    inv_a = _safe_inverse(j * (j + 1))
    inv_b = _safe_inverse(j * (2 * j + 1))
    inv_c = 1.0 / ((j + 1) * (2 * j + 1))

    am_m, am_mp = lad.a(SpinAxis.MINUS), ladp.a(SpinAxis.MINUS)
    ap_m, ap_mp = lad.a(SpinAxis.PLUS), ladp.a(SpinAxis.PLUS)

    g_emit, g_pump = rates.local_emission, rates.local_pumping
    g_deph = rates.local_dephasing

    table = np.zeros((9, j.size))
    table[0] = (
        rates.collective_emission / 2 * (am_m ** 2 + am_mp ** 2)
        + rates.collective_pumping / 2 * (ap_m ** 2 + ap_mp ** 2)
        + rates.collective_dephasing / 2 * (m - mp) ** 2
        + g_emit / 2 * (n_tls + m + mp)
        + g_pump / 2 * (n_tls - m - mp)
        + g_deph / 2 * (half - m * mp * (half + 1) * inv_a)
    )
    table[1] = rates.collective_emission * am_m * am_mp + g_emit / 2 * am_m * am_mp * (half + 1) * inv_a
    table[2] = g_emit / 2 * lad.b(SpinAxis.MINUS) * ladp.b(SpinAxis.MINUS) * (half + j + 1) * inv_b
    table[3] = g_emit / 2 * lad.d(SpinAxis.MINUS) * ladp.d(SpinAxis.MINUS) * (half - j) * inv_c
    table[4] = g_deph / 2 * lad.b(SpinAxis.Z) * ladp.b(SpinAxis.Z) * (half + j + 1) * inv_b
    table[5] = g_deph / 2 * lad.d(SpinAxis.Z) * ladp.d(SpinAxis.Z) * (half - j) * inv_c
    table[6] = g_pump / 2 * lad.b(SpinAxis.PLUS) * ladp.b(SpinAxis.PLUS) * (half + j + 1) * inv_b
    table[7] = rates.collective_pumping * ap_m * ap_mp + g_pump / 2 * ap_m * ap_mp * (half + 1) * inv_a
    table[8] = g_pump / 2 * lad.d(SpinAxis.PLUS) * ladp.d(SpinAxis.PLUS) * (half - j) * inv_c
    return table


def gamma_rates(n_tls: int, rates: Rates, idx: ElementIndex) -> Tuple[float, ...]:
    """
    The nine rates attached to the element ``|j, m><j, m'|``.

    Rates whose target lies outside the Dicke space are returned as 0.
    """
    n = check_n_tls(n_tls)
    idx.validate(n)
    basis = dicke_basis(n)
    table = _gamma_table(n, rates, idx.j2 / 2, idx.m2 / 2, idx.m2p / 2)[:, 0]
    values = [float(table[0])]
    for value, (dj2, dm2) in zip(table[1:], GAMMA_SHIFTS):
        inside = basis.rows(idx.j2 + dj2, idx.m2 + dm2) >= 0 and basis.rows(idx.j2 + dj2, idx.m2p + dm2) >= 0
        values.append(float(value) if inside else 0.0)
    return tuple(values)


def block_support(basis: DickeBasis) -> np.ndarray:
    """Mask over vectorized positions that belong to a diagonal block."""
    mask = np.zeros(basis.n_ds * basis.n_ds, dtype=bool)
    mask[basis.elements.flat] = True
    return mask


def _project(matrix: sp.spmatrix, support: np.ndarray) -> sp.csr_matrix:
    projector = sp.diags(support.astype(float))
    return as_sparse(projector @ matrix @ projector)


def lindbladian(n_tls: int, rates: Rates) -> Superoperator:
    """Symmetrized Lindbladian assembled directly from the Gamma tables."""
    n = check_n_tls(n_tls)
    basis = dicke_basis(n)
    el = basis.elements
    table = _gamma_table(n, rates, el.j2 / 2, el.m2 / 2, el.m2p / 2)

    rows, cols, values = [el.flat], [el.flat], [-table[0]]
    for gamma, (dj2, dm2) in zip(table[1:], GAMMA_SHIFTS):
        t_row = basis.rows(el.j2 + dj2, el.m2 + dm2)
        t_col = basis.rows(el.j2 + dj2, el.m2p + dm2)
        keep = (t_row >= 0) & (t_col >= 0) & (gamma != 0)
        rows.append(t_row[keep] * basis.n_ds + t_col[keep])
        cols.append(el.flat[keep])
        values.append(gamma[keep])

    side = basis.n_ds * basis.n_ds
    matrix = from_triplets(np.concatenate(rows), np.concatenate(cols), np.concatenate(values), (side, side))
    logger.debug(f"Lindbladian N={n}: side {side}, nnz {matrix.nnz}")
    return Superoperator(matrix, (basis.n_ds,), block_support(basis))


@lru_cache(maxsize=32)
def _jump_weights(n_tls: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-j2 tables of x_a/2, x_b/2, x_c/2 built from the multiplicities d and alpha."""
    xa = np.zeros(n_tls + 1)
    xb = np.zeros(n_tls + 1)
    xc = np.zeros(n_tls + 1)
    for j2 in range(n_tls, n_tls % 2 - 1, -2):
        d = degeneracy(n_tls, j2)
        alpha_here = alpha_coeff(n_tls, j2)
        alpha_up = alpha_coeff(n_tls, j2 + 2)
        j = Fraction(j2, 2)
        xc[j2] = float(Fraction(alpha_up, d) / (2 * (j + 1)))
        if j2 == 0:
            continue
        xa[j2] = float((1 + Fraction(alpha_up, d) * (2 * j + 1) / (j + 1)) / (2 * j))
        xb[j2] = float(Fraction(alpha_here, d) / (2 * j))
    return xa, xb, xc


def jump_superoperator(n_tls: int, q: Union[str, SpinAxis], r: Union[str, SpinAxis]) -> Superoperator:
    """
    ``T_qr[X] = sum_n J_{q,n} X J_{r,n}^dag`` restricted to the Dicke space.

    The ket label moves by q and the bra label by r; each block j feeds blocks
    j and j +- 1.
    """
    n = check_n_tls(n_tls)
    q, r = SpinAxis.parse(q), SpinAxis.parse(r)
    if q not in _M_SHIFT or r not in _M_SHIFT:
        raise DimensionMismatchError("Jump superoperators are defined for the +, - and z axes only")
    basis = dicke_basis(n)
    el = basis.elements
    j, m, mp = el.j2 / 2, el.m2 / 2, el.m2p / 2
    lad, ladp = LadderCoefficients(j, m), LadderCoefficients(j, mp)
    xa, xb, xc = _jump_weights(n)

    terms = (
        (0, lad.a(q) * ladp.a(r) * xa[el.j2]),
        (-2, lad.b(q) * ladp.b(r) * xb[el.j2]),
        (2, lad.d(q) * ladp.d(r) * xc[el.j2]),
    )
    rows, cols, values = [], [], []
    for dj2, coeff in terms:
        t_row = basis.rows(el.j2 + dj2, el.m2 + _M_SHIFT[q])
        t_col = basis.rows(el.j2 + dj2, el.m2p + _M_SHIFT[r])
        keep = (t_row >= 0) & (t_col >= 0) & (coeff != 0)
        rows.append(t_row[keep] * basis.n_ds + t_col[keep])
        cols.append(el.flat[keep])
        values.append(coeff[keep])

    side = basis.n_ds * basis.n_ds
    matrix = from_triplets(np.concatenate(rows), np.concatenate(cols), np.concatenate(values), (side, side))
    return Superoperator(matrix, (basis.n_ds,), block_support(basis))


def lindbladian_from_jumps(n_tls: int, rates: Rates) -> Superoperator:
    """Same Lindbladian as :func:`lindbladian`, composed from jump superoperators and spre/spost."""
    n = check_n_tls(n_tls)
    basis = dicke_basis(n)
    dim = basis.n_ds
    support = block_support(basis)
    jz = jspin(n, SpinAxis.Z)
    half = identity(dim) * (n / 2.0)
    total = Superoperator(sp.csr_matrix((dim * dim, dim * dim), dtype=np.complex128), (dim,))

    collective = (
        (rates.collective_emission, SpinAxis.MINUS),
        (rates.collective_pumping, SpinAxis.PLUS),
        (rates.collective_dephasing, SpinAxis.Z),
    )
    for rate, axis in collective:
        if rate:
            total = total + (rate / 2) * lindblad_dissipator(jspin(n, axis))

    if rates.local_emission:
        anti = half + jz
        total = total + (rates.local_emission / 2) * (
            2.0 * jump_superoperator(n, "minus", "minus") - spre(anti) - spost(anti)
        )
    if rates.local_pumping:
        anti = half - jz
        total = total + (rates.local_pumping / 2) * (
            2.0 * jump_superoperator(n, "plus", "plus") - spre(anti) - spost(anti)
        )
    if rates.local_dephasing:
        total = total + (rates.local_dephasing / 2) * (
            2.0 * jump_superoperator(n, "z", "z") - spre(half)
        )
    return Superoperator(_project(total.matrix, support), (dim,), support)


def check_block_compatible(n_tls: int, h: sp.spmatrix) -> sp.csr_matrix:
    """Return ``H`` as CSR after checking ``[H, J^2] = 0``."""
    h = as_sparse(h)
    j2 = j2_operator(n_tls)
    if h.shape != j2.shape:
        raise DimensionMismatchError(f"Hamiltonian shape {h.shape} does not match the Dicke space {j2.shape}")
    commutator = h @ j2 - j2 @ h
    if commutator.nnz:
        scale = max(1.0, abs(h).max() * abs(j2).max()) if h.nnz else 1.0
        if abs(commutator).max() > settings.HERMITIAN_TOL * scale:
            raise SymmetryViolationError(
                "Hamiltonian does not commute with J^2: it mixes j blocks and breaks permutational symmetry"
            )
    return h


def liouvillian(n_tls: int, rates: Rates, h: sp.spmatrix) -> Superoperator:
    """Total generator ``-i[H, .] + L`` on the Dicke space."""
    n = check_n_tls(n_tls)
    h = check_block_compatible(n, h)
    dissipator = lindbladian(n, rates)
    coherent = hamiltonian_superoperator(h)
    matrix = _project(coherent.matrix, dissipator.support) + dissipator.matrix
    return Superoperator(as_sparse(matrix), dissipator.dims, dissipator.support)


def rate_matrix(n_tls: int, rates: Rates) -> sp.csr_matrix:
    """
    Rate matrix M of the population dynamics ``dp/dt = M p``.

    Populations are ordered like the rows of the Dicke basis. Column ``k`` holds the
    outflow of state ``k`` on the diagonal and its inflow into the neighbours.
    """
    n = check_n_tls(n_tls)
    basis = dicke_basis(n)
    j2, m2 = basis.row_labels
    j, m = j2 / 2.0, m2 / 2.0
    half = n / 2.0
    inv_a = _safe_inverse(j * (j + 1))
    inv_b = _safe_inverse(j * (2 * j + 1))
    inv_c = 1.0 / ((j + 1) * (2 * j + 1))

    down = (j + m) * (j - m + 1)
    up = (j - m) * (j + m + 1)
    g_emit, g_pump, g_deph = rates.local_emission, rates.local_pumping, rates.local_dephasing

    outflow = (
        rates.collective_emission * down
        + rates.collective_pumping * up
        + g_emit * (half + m)
        + g_pump * (half - m)
        + g_deph * (half / 2 - m * m * (half + 1) * inv_a / 2)
    )
    inflow = (
        rates.collective_emission * down + g_emit / 2 * down * (half + 1) * inv_a,
        g_emit / 2 * (j + m) * (j + m - 1) * (half + j + 1) * inv_b,
        g_emit / 2 * (j - m + 1) * (j - m + 2) * (half - j) * inv_c,
        g_deph / 2 * (j + m) * (j - m) * (half + j + 1) * inv_b,
        g_deph / 2 * (j + m + 1) * (j - m + 1) * (half - j) * inv_c,
        g_pump / 2 * (j - m) * (j - m - 1) * (half + j + 1) * inv_b,
        rates.collective_pumping * up + g_pump / 2 * up * (half + 1) * inv_a,
        g_pump / 2 * (j + m + 1) * (j + m + 2) * (half - j) * inv_c,
    )

    sources = np.arange(basis.n_ds)
    rows, cols, values = [sources], [sources], [-outflow]
    for gamma, (dj2, dm2) in zip(inflow, GAMMA_SHIFTS):
        targets = basis.rows(j2 + dj2, m2 + dm2)
        keep = (targets >= 0) & (gamma != 0)
        rows.append(targets[keep])
        cols.append(sources[keep])
        values.append(gamma[keep])

    matrix = sp.coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.n_ds, basis.n_ds),
    ).tocsr()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    return matrix


def uncoupled_liouvillian(n_tls: int, rates: Rates, h_uncoupled: sp.spmatrix) -> Superoperator:
    """Brute-force generator on the 2^N product space, built channel by channel."""
    n = check_oracle_cap(n_tls)
    dim = 2 ** n
    total = hamiltonian_superoperator(h_uncoupled)
    if total.hilbert_dim != dim:
        raise DimensionMismatchError(f"Uncoupled Hamiltonian must be {dim}x{dim}")

    collective = (
        (rates.collective_emission, SpinAxis.MINUS),
        (rates.collective_pumping, SpinAxis.PLUS),
        (rates.collective_dephasing, SpinAxis.Z),
    )
    for rate, axis in collective:
        if rate:
            total = total + (rate / 2) * lindblad_dissipator(uncoupled_collective(n, axis))

    local = (
        (rates.local_emission, SpinAxis.MINUS),
        (rates.local_pumping, SpinAxis.PLUS),
        (rates.local_dephasing, SpinAxis.Z),
    )
    for rate, axis in local:
        if rate:
            for site in range(n):
                total = total + (rate / 2) * lindblad_dissipator(uncoupled_operator(n, axis, site))
    return total
