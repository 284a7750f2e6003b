"""
Dressed-state master equation for the ultrastrong-coupling regime.

The light-matter Hamiltonian is diagonalized sector by sector (it commutes with
``J^2``), and the local TLS jump rates between dressed levels are read off the
permutation-invariant jump superoperators, so no 2^N operator is ever built.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from dickesim.composite import CompositeSpace, destroy, embed, lift
from dickesim.config import settings
from dickesim.dicke_space import dicke_basis
from dickesim.exceptions import DimensionMismatchError, EigenSolveError, InvalidEnsembleError, SymmetryViolationError
from dickesim.linalg import MatrixLike, Superoperator, as_sparse, eigensolve_hermitian, from_triplets, vectorize
from dickesim.liouvillian import jump_superoperator

logger = logging.getLogger(__name__)

LocalCoupling = Literal["jx", "jminus"]


@dataclass(frozen=True, eq=False)
class DressedBasis:
    """Eigenbasis of a composite Hamiltonian; ``vectors[:, k]`` belongs to ``energies[k]``."""
    energies: np.ndarray
    vectors: np.ndarray
    sectors: np.ndarray
    dims: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def scale(self) -> float:
        return max(1.0, float(np.abs(self.energies).max()))

    def gaps(self) -> np.ndarray:
        """``E_s - E_r`` at ``[r, s]``."""
        return self.energies[np.newaxis, :] - self.energies[:, np.newaxis]

    def downward_mask(self) -> np.ndarray:
        """True at ``[r, s]`` when ``|s>`` lies above ``|r>`` beyond the degeneracy threshold."""
        return self.gaps() > settings.DEGENERACY_TOL * self.scale

    def to_dressed(self, op: MatrixLike) -> np.ndarray:
        """Matrix elements ``<r|op|s>``."""
        dense = op.toarray() if sp.issparse(op) else np.asarray(op, dtype=np.complex128)
        if dense.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"Operator shape {dense.shape} does not match dressed dim {self.dim}")
        return self.vectors.conj().T @ dense @ self.vectors

    def state_to_dressed(self, rho: MatrixLike) -> sp.csr_matrix:
        return as_sparse(self.to_dressed(rho))

    def from_dressed(self, rho_dressed: MatrixLike) -> sp.csr_matrix:
        dense = rho_dressed.toarray() if sp.issparse(rho_dressed) else np.asarray(rho_dressed)
        return as_sparse(self.vectors @ dense @ self.vectors.conj().T)

    def ground_state(self) -> sp.csr_matrix:
        """Projector on the lowest dressed level, in the dressed basis."""
        return from_triplets([0], [0], [1.0], (self.dim, self.dim))


def _sector_labels(space: CompositeSpace) -> np.ndarray:
    """Per composite index, a single integer encoding the ``j2`` of every Dicke slot."""
    index = np.arange(space.total_dim)
    coords = np.unravel_index(index, space.dims)
    labels = np.zeros(space.total_dim, dtype=np.int64)
    for slot, factor in enumerate(space.factors):
        if factor.kind != "dicke":
            continue
        j2 = dicke_basis(factor.size).row_labels[0]
        labels = labels * (factor.size + 1) + j2[coords[slot]]
    return labels


def dressed_basis(h: MatrixLike, space: CompositeSpace) -> DressedBasis:
    """
    Full diagonalization of a composite Hamiltonian, one ``j`` sector at a time.

    Args:
        h: Hermitian Hamiltonian on ``space``
        space: composite space the Hamiltonian acts on

    Returns:
        DressedBasis with ascending energies
    """
    h = as_sparse(h)
    if h.shape != (space.total_dim, space.total_dim):
        raise DimensionMismatchError(f"Hamiltonian shape {h.shape} does not match space dim {space.total_dim}")
    labels = _sector_labels(space)
    coo = h.tocoo()
    leak = coo.data[labels[coo.row] != labels[coo.col]]
    if leak.size and np.abs(leak).max() > settings.HERMITIAN_TOL * max(1.0, abs(h).max()):
        raise SymmetryViolationError("Hamiltonian couples different j sectors")

    energies = np.empty(space.total_dim)
    vectors = np.zeros((space.total_dim, space.total_dim), dtype=np.complex128)
    sectors = np.empty(space.total_dim, dtype=np.int64)
    column = 0
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        block_energies, block_vectors = eigensolve_hermitian(h[members][:, members])
        span = slice(column, column + members.size)
        energies[span] = block_energies
        vectors[members, span] = block_vectors
        sectors[span] = label
        column += members.size

    order = np.argsort(energies, kind="stable")
    basis = DressedBasis(energies=energies[order], vectors=vectors[:, order], sectors=sectors[order], dims=space.dims)
    overlap = np.abs(basis.vectors.conj().T @ basis.vectors - np.eye(basis.dim)).max()
    if overlap > 1e-10:
        raise EigenSolveError(f"Dressed eigenvectors are not orthonormal (deviation {overlap:.3e})")
    logger.info(f"Dressed basis: {basis.dim} levels in {np.unique(labels).size} sectors, E_0 = {basis.energies[0]:.6g}")
    return basis


def cavity_quadrature(space: CompositeSpace, slot: int = 0) -> sp.csr_matrix:
    """``a + a^dag`` of a bosonic slot, lifted onto the composite space."""
    factor = space.factor(slot)
    if factor.kind != "bosonic":
        raise InvalidEnsembleError(f"Slot {slot} is not bosonic")
    a = destroy(factor.dim)
    return lift(a + a.getH(), space, slot)


def dressed_cavity_weights(basis: DressedBasis, x_op: MatrixLike) -> np.ndarray:
    """``|<r|X|s>|^2`` at ``[r, s]`` for downward pairs, zero elsewhere."""
    weights = np.abs(basis.to_dressed(x_op)) ** 2
    return np.where(basis.downward_mask(), weights, 0.0)


def local_transition_matrix(
    basis: DressedBasis,
    space: CompositeSpace,
    slot: int,
    local_coupling: LocalCoupling = "jx",
    jobs: int = 1,
) -> np.ndarray:
    """
    ``sum_n |<r|J_n|s>|^2`` at ``[r, s]`` for every ordered pair, with ``J_n`` the
    local ``x`` or lowering operator of the Dicke slot.

    Each column is read off ``T[|s><s|]`` with the embedded jump superoperators:
    ``<r|T_qr[|s><s|]|r> = sum_n <r|J_q,n|s> <r|J_r,n|s>^*``.
    """
    factor = space.factor(slot)
    if factor.kind != "dicke":
        raise InvalidEnsembleError(f"Slot {slot} is not a Dicke factor")
    if local_coupling == "jx":
        pairs = {("plus", "plus"): 0.25, ("minus", "minus"): 0.25, ("minus", "plus"): 0.5}
    elif local_coupling == "jminus":
        pairs = {("minus", "minus"): 1.0}
    else:
        raise InvalidEnsembleError(f"Unknown local coupling {local_coupling!r}")
    jumps: Dict[Tuple[str, str], Superoperator] = {
        pair: embed(jump_superoperator(factor.size, *pair), space, slot) for pair in pairs
    }
    v = basis.vectors
    dim = basis.dim

    def column(s: int) -> np.ndarray:
        source = vectorize(np.outer(v[:, s], v[:, s].conj()))
        total = np.zeros(dim)
        for pair, weight in pairs.items():
            image = (jumps[pair].matrix @ source).reshape(dim, dim)
            readout = np.einsum("ir,ij,jr->r", v.conj(), image, v)
            # the (-, +) term stands for both mixed orderings
            total += weight * np.real(readout)
        return total

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(column, range(dim)))
    else:
        columns = [column(s) for s in range(dim)]
    return np.maximum(np.column_stack(columns), 0.0)


def dressed_local_weights(
    basis: DressedBasis,
    space: CompositeSpace,
    slot: int = 1,
    local_coupling: LocalCoupling = "jx",
    jobs: int = 1,
) -> np.ndarray:
    """Local TLS weights restricted to downward pairs."""
    weights = local_transition_matrix(basis, space, slot, local_coupling, jobs)
    return np.where(basis.downward_mask(), weights, 0.0)


def dressed_emission_operator(basis: DressedBasis, x_op: MatrixLike) -> sp.csr_matrix:
    """Positive-frequency part ``X+ = sum_{E_s > E_r} X_rs |r><s|``, in the dressed basis."""
    x = basis.to_dressed(x_op)
    return as_sparse(np.where(basis.downward_mask(), x, 0.0))


def bright_transitions(basis: DressedBasis, x_op: MatrixLike, count: int = 2, threshold: float = 1e-6) -> np.ndarray:
    """
    Lowest ``count`` excitation energies ``E_r - E_0`` reachable from the dressed
    ground state through ``x_op``; weaker lines than ``threshold`` times the
    strongest one are skipped.
    """
    weights = np.abs(basis.to_dressed(x_op)[:, 0]) ** 2
    bright = np.flatnonzero(weights > threshold * weights.max())
    bright = bright[basis.energies[bright] - basis.energies[0] > settings.DEGENERACY_TOL * basis.scale]
    if bright.size < count:
        raise EigenSolveError(f"Only {bright.size} bright transitions out of the ground state, {count} requested")
    return basis.energies[bright[:count]] - basis.energies[0]


def dressed_liouvillian(
    basis: DressedBasis,
    kappa: float,
    gamma_down: float,
    cavity_weights: np.ndarray,
    local_weights: Optional[np.ndarray] = None,
) -> Superoperator:
    """
    Generator in the dressed basis: ``-i[H, .]`` plus ``c_rs L[|r><s|]`` for every
    downward pair, ``c_rs = kappa/2 |X_rs|^2 + gamma_down/2 sum_n |J_n^rs|^2``.
    """
    if kappa < 0 or gamma_down < 0:
        raise InvalidEnsembleError("Dressed jump rates must be non-negative")
    dim = basis.dim
    coupling = 0.5 * kappa * cavity_weights
    if gamma_down:
        if local_weights is None:
            raise InvalidEnsembleError("gamma_down > 0 needs local weights")
        coupling = coupling + 0.5 * gamma_down * local_weights
    coupling = np.where(basis.downward_mask(), coupling, 0.0)

    outflow = coupling.sum(axis=0)
    i, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    diagonal = -(outflow[i] + outflow[k]) - 1j * (basis.energies[i] - basis.energies[k])
    r, s = np.nonzero(coupling)
    rows = np.concatenate([(i * dim + k).ravel(), r * dim + r])
    cols = np.concatenate([(i * dim + k).ravel(), s * dim + s])
    values = np.concatenate([diagonal.ravel(), 2.0 * coupling[r, s]])
    matrix = from_triplets(rows, cols, values, (dim * dim, dim * dim), tol=0.0)
    logger.info(f"Dressed Liouvillian: {r.size} downward jumps, nnz {matrix.nnz}")
    return Superoperator(matrix, (dim,))
