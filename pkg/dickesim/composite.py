"""
Tensor composition of spaces and Liouvillians for spin-boson systems and for
several ensembles. Bosonic factors come first, Dicke factors after them.
"""
import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from dickesim.dicke_space import check_n_tls, dicke_basis
from dickesim.exceptions import DimensionMismatchError, InvalidEnsembleError
from dickesim.linalg import (
    Superoperator,
    as_sparse,
    from_triplets,
    hamiltonian_superoperator,
    identity,
    kron,
    lindblad_dissipator,
)
from dickesim.liouvillian import block_support, lindbladian
from dickesim.models.rates import Rates
from dickesim.operators import SpinAxis, jspin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Factor:
    kind: Literal["bosonic", "dicke"]
    size: int

    @property
    def dim(self) -> int:
        if self.kind == "bosonic":
            return self.size
        return dicke_basis(self.size).n_ds


def bosonic(n_ph: int) -> Factor:
    if n_ph < 2:
        raise InvalidEnsembleError(f"Fock cutoff must be at least 2, got {n_ph}")
    return Factor("bosonic", int(n_ph))


def dicke(n_tls: int) -> Factor:
    return Factor("dicke", check_n_tls(n_tls))


@dataclass(frozen=True)
class CompositeSpace:
    factors: Tuple[Factor, ...]

    @classmethod
    def of(cls, *factors: Factor) -> "CompositeSpace":
        if not factors:
            raise InvalidEnsembleError("A composite space needs at least one factor")
        return cls(tuple(factors))

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def factor(self, slot: int) -> Factor:
        if not 0 <= slot < len(self.factors):
            raise InvalidEnsembleError(f"Slot {slot} out of range for {len(self.factors)} factors")
        return self.factors[slot]

    def support(self) -> np.ndarray:
        """Representable vectorized positions: block-diagonal in every Dicke factor."""
        masks = []
        for f in self.factors:
            if f.kind == "dicke":
                masks.append(block_support(dicke_basis(f.size)))
            else:
                masks.append(np.ones(f.dim * f.dim, dtype=bool))
        return _tensor_masks(masks, self.dims)


def destroy(n_ph: int) -> sp.csr_matrix:
    """Truncated annihilation operator on ``n_ph`` Fock levels."""
    bosonic(n_ph)
    levels = np.arange(1, n_ph)
    return from_triplets(levels - 1, levels, np.sqrt(levels), (n_ph, n_ph))


def create(n_ph: int) -> sp.csr_matrix:
    return as_sparse(destroy(n_ph).getH())


def number_op(n_ph: int) -> sp.csr_matrix:
    bosonic(n_ph)
    levels = np.arange(n_ph)
    return from_triplets(levels, levels, levels.astype(float), (n_ph, n_ph))


def lift(op, space: CompositeSpace, slot: int) -> sp.csr_matrix:
    """Identity-Kronecker lift of a factor operator onto the whole space."""
    factor = space.factor(slot)
    op = as_sparse(op)
    if op.shape != (factor.dim, factor.dim):
        raise DimensionMismatchError(f"Operator shape {op.shape} does not fit slot {slot} of dim {factor.dim}")
    left = int(np.prod(space.dims[:slot]))
    right = int(np.prod(space.dims[slot + 1:]))
    return kron(kron(identity(left), op), identity(right))


def _pair_permutation(d1: int, d2: int) -> np.ndarray:
    """
    Position map from the (i1, k1, i2, k2) ordering of ``S1 kron S2`` to the
    row-major vec ordering (i1, i2, k1, k2) of the composite density matrix.
    """
    i1, k1, i2, k2 = np.meshgrid(np.arange(d1), np.arange(d1), np.arange(d2), np.arange(d2), indexing="ij")
    composite = d1 * d2
    return ((i1 * d2 + i2) * composite + (k1 * d2 + k2)).ravel()


def _tensor_masks(masks: Sequence[np.ndarray], dims: Sequence[int]) -> np.ndarray:
    mask, dim = masks[0], dims[0]
    for other, other_dim in zip(masks[1:], dims[1:]):
        perm = _pair_permutation(dim, other_dim)
        combined = np.zeros(perm.size, dtype=bool)
        combined[perm] = np.kron(mask, other).astype(bool)
        mask, dim = combined, dim * other_dim
    return mask


def _super_tensor_pair(s1: Superoperator, s2: Superoperator) -> Superoperator:
    d1, d2 = s1.hilbert_dim, s2.hilbert_dim
    perm = _pair_permutation(d1, d2)
    product = sp.kron(s1.matrix, s2.matrix, format="coo")
    matrix = sp.coo_matrix(
        (product.data, (perm[product.row], perm[product.col])), shape=product.shape
    ).tocsr()
    if s1.support is None and s2.support is None:
        support = None
    else:
        m1 = s1.support if s1.support is not None else np.ones(d1 * d1, dtype=bool)
        m2 = s2.support if s2.support is not None else np.ones(d2 * d2, dtype=bool)
        support = _tensor_masks([m1, m2], [d1, d2])
    return Superoperator(as_sparse(matrix), tuple(s1.dims) + tuple(s2.dims), support)


def super_tensor(*supers: Superoperator) -> Superoperator:
    """
    Superoperator acting on the tensor product of the factors' density matrices.

    ``super_tensor(spre(A), spre(B)) == spre(kron(A, B))``.
    """
    if not supers:
        raise DimensionMismatchError("super_tensor needs at least one superoperator")
    result = supers[0]
    for s in supers[1:]:
        result = _super_tensor_pair(result, s)
    return result


def identity_super(dim: int, support: Optional[np.ndarray] = None) -> Superoperator:
    return Superoperator(identity(dim * dim), (int(dim),), support)


def identity_for(factor: Factor) -> Superoperator:
    """Identity superoperator on one factor, carrying its block support."""
    if factor.kind == "dicke":
        return identity_super(factor.dim, block_support(dicke_basis(factor.size)))
    return identity_super(factor.dim)


def embed(s: Superoperator, space: CompositeSpace, slot: int) -> Superoperator:
    """Superoperator of one factor tensored with identities on every other factor."""
    if s.hilbert_dim != space.factor(slot).dim:
        raise DimensionMismatchError(f"Superoperator of dim {s.hilbert_dim} does not fit slot {slot}")
    parts = [s if k == slot else identity_for(f) for k, f in enumerate(space.factors)]
    return super_tensor(*parts)


def bosonic_liouvillian(n_ph: int, kappa: float, w: float = 0.0, h_b=None) -> Superoperator:
    """``-i[H_B, .] + (w/2) L[a^dag] + (kappa/2) L[a]`` on ``n_ph`` Fock levels."""
    if kappa < 0 or w < 0:
        raise InvalidEnsembleError("Bosonic rates must be non-negative")
    a = destroy(n_ph)
    h_b = sp.csr_matrix((n_ph, n_ph), dtype=np.complex128) if h_b is None else h_b
    total = hamiltonian_superoperator(h_b)
    if kappa:
        total = total + (kappa / 2) * lindblad_dissipator(a)
    if w:
        total = total + (w / 2) * lindblad_dissipator(a.getH())
    return total


def joint_collective_op(space: CompositeSpace, slots: Union[int, Sequence[int]], axis) -> sp.csr_matrix:
    """Sum of the lifted collective operators ``J_axis`` of the given Dicke slots."""
    slots = [slots] if isinstance(slots, (int, np.integer)) else list(slots)
    axis = SpinAxis.parse(axis)
    total = sp.csr_matrix((space.total_dim, space.total_dim), dtype=np.complex128)
    for slot in slots:
        factor = space.factor(slot)
        if factor.kind != "dicke":
            raise InvalidEnsembleError(f"Slot {slot} is {factor.kind}, not a Dicke factor")
        total = total + lift(jspin(factor.size, axis), space, slot)
    return as_sparse(total)


def composite_dissipator(op, space: CompositeSpace) -> Superoperator:
    """``L_op`` on the composite space, carrying the composite support."""
    d = lindblad_dissipator(op, space.dims)
    return Superoperator(d.matrix, d.dims, space.support())


def composite_hamiltonian(h, space: CompositeSpace) -> Superoperator:
    s = hamiltonian_superoperator(h, space.dims)
    return Superoperator(s.matrix, s.dims, space.support())


def dicke_cavity_hamiltonian(
    n_tls: int, n_ph: int, omega0: float, omega_cav: float, g: float
) -> Tuple[sp.csr_matrix, CompositeSpace]:
    """``w0 Jz + w_cav a^dag a + g Jx (a + a^dag)`` on cavity (slot 0) times Dicke space (slot 1)."""
    space = CompositeSpace.of(bosonic(n_ph), dicke(n_tls))
    a = destroy(n_ph)
    h = (
        omega0 * lift(jspin(n_tls, SpinAxis.Z), space, 1)
        + omega_cav * lift(number_op(n_ph), space, 0)
        + g * kron(a + a.getH(), jspin(n_tls, SpinAxis.X))
    )
    return as_sparse(h), space


def open_dicke_liouvillian(space: CompositeSpace, h, rates: Rates) -> Superoperator:
    """Cavity loss and pump, the permutation-invariant TLS channels and ``-i[H, .]``."""
    if [f.kind for f in space.factors] != ["bosonic", "dicke"]:
        raise InvalidEnsembleError("Expected a cavity slot followed by one Dicke slot")
    n_ph, n_tls = space.factors[0].size, space.factors[1].size
    total = composite_hamiltonian(h, space)
    if rates.kappa or rates.bosonic_pump:
        total = total + embed(bosonic_liouvillian(n_ph, rates.kappa, rates.bosonic_pump), space, 0)
    tls_rates = rates.model_copy(update={"kappa": 0.0, "bosonic_pump": 0.0})
    if tls_rates.max_rate > 0:
        total = total + embed(lindbladian(n_tls, tls_rates), space, 1)
    logger.debug(f"Open Dicke Liouvillian: dims {space.dims}, nnz {total.nnz}")
    return total
