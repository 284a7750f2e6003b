"""
Combinatorics and index geometry of the permutation-symmetric Dicke space.

Quantum numbers are stored doubled (``j2 = 2j``, ``m2 = 2m``) so odd ensembles
need no half-integer keys. Blocks run from ``j = N/2`` down to ``0`` (or ``1/2``)
and, inside a block, ``m`` runs from ``j`` down to ``-j``; ``|N/2, N/2>`` is the
first diagonal element.
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb, factorial
from typing import Tuple, Union

import numpy as np

from dickesim.exceptions import InvalidEnsembleError

IntLike = Union[int, np.integer]


def check_n_tls(n_tls: IntLike) -> int:
    """Return ``n_tls`` as a plain int, rejecting anything that is not a positive integer."""
    if isinstance(n_tls, bool) or not isinstance(n_tls, (int, np.integer)) or n_tls < 1:
        raise InvalidEnsembleError(f"Number of TLSs must be a positive integer, got {n_tls!r}")
    return int(n_tls)


def validate_j2(n_tls: IntLike, j2: IntLike) -> None:
    n = check_n_tls(n_tls)
    if j2 < 0 or j2 > n or (n - j2) % 2:
        raise InvalidEnsembleError(f"j2={j2} is not a valid doubled cooperativity number for N={n}")


def validate_jm(n_tls: IntLike, j2: IntLike, m2: IntLike) -> None:
    validate_j2(n_tls, j2)
    if abs(m2) > j2 or (j2 - m2) % 2:
        raise InvalidEnsembleError(f"m2={m2} is not a valid doubled inversion for j2={j2}")


def num_dicke_states(n_tls: IntLike) -> int:
    """Number of Dicke states ``(N/2 + 1)^2 - (N mod 2)/4``, in exact integer arithmetic."""
    n = check_n_tls(n_tls)
    return ((n + 2) ** 2 - n % 2) // 4


def num_density_elements(n_tls: IntLike) -> int:
    """Number of non-zero elements of a block-diagonal Dicke density matrix."""
    n = check_n_tls(n_tls)
    return (n + 1) * (n + 2) * (n + 3) // 6


def num_blocks(n_tls: IntLike) -> int:
    n = check_n_tls(n_tls)
    return n // 2 + 1


def degeneracy(n_tls: IntLike, j2: IntLike) -> int:
    """
    Multiplicity of the spin-j irreducible representation in N spins-1/2.

    Args:
        n_tls: number of TLSs (N)
        j2: doubled cooperativity number

    Returns:
        (2j+1) N! / ((N/2+j+1)! (N/2-j)!) as an exact integer
    """
    validate_j2(n_tls, j2)
    n = int(n_tls)
    upper = (n + int(j2)) // 2
    lower = (n - int(j2)) // 2
    return (int(j2) + 1) * factorial(n) // (factorial(upper + 1) * factorial(lower))


def alpha_coeff(n_tls: IntLike, j2: IntLike) -> int:
    """
    Cumulative multiplicity ``sum_{j' >= j} d_N^{j'} = N! / ((N/2-j)! (N/2+j)!)``.

    ``j2 = N + 2`` (the block above the top one) is accepted and gives 0.
    """
    n = check_n_tls(n_tls)
    if j2 == n + 2:
        return 0
    validate_j2(n, j2)
    return comb(n, (n - int(j2)) // 2)


@dataclass(frozen=True)
class Block:
    j2: int
    dim: int
    offset: int


@dataclass(frozen=True)
class ElementIndex:
    """Label of the density-matrix element ``|j, m><j, m'|`` (all doubled)."""
    j2: int
    m2: int
    m2p: int

    def validate(self, n_tls: IntLike) -> None:
        validate_jm(n_tls, self.j2, self.m2)
        validate_jm(n_tls, self.j2, self.m2p)


@dataclass(frozen=True)
class ElementTable:
    """Flat arrays over every valid ``(j, m, m')`` element, in block order."""
    j2: np.ndarray
    m2: np.ndarray
    m2p: np.ndarray
    row: np.ndarray
    col: np.ndarray
    flat: np.ndarray

    def __len__(self) -> int:
        return len(self.flat)


@dataclass(frozen=True)
class DickeBasis:
    n_tls: int
    blocks: Tuple[Block, ...]
    n_ds: int

    @classmethod
    def build(cls, n_tls: IntLike) -> "DickeBasis":
        n = check_n_tls(n_tls)
        blocks = []
        offset = 0
        for j2 in range(n, n % 2 - 1, -2):
            blocks.append(Block(j2=j2, dim=j2 + 1, offset=offset))
            offset += j2 + 1
        return cls(n_tls=n, blocks=tuple(blocks), n_ds=offset)

    @property
    def j2_values(self) -> Tuple[int, ...]:
        return tuple(b.j2 for b in self.blocks)

    def block(self, j2: IntLike) -> Block:
        validate_j2(self.n_tls, j2)
        return self.blocks[(self.n_tls - int(j2)) // 2]

    def index(self, j2: IntLike, m2: IntLike) -> int:
        """Row (or column) of ``|j, m>`` in the global matrix."""
        validate_jm(self.n_tls, j2, m2)
        return self.block(j2).offset + (int(j2) - int(m2)) // 2

    @cached_property
    def _offset_table(self) -> np.ndarray:
        table = np.full(self.n_tls + 1, -1, dtype=np.int64)
        for b in self.blocks:
            table[b.j2] = b.offset
        return table

    def rows(self, j2, m2) -> np.ndarray:
        """Vectorized :meth:`index`; invalid labels map to -1 instead of raising."""
        j2 = np.asarray(j2, dtype=np.int64)
        m2 = np.asarray(m2, dtype=np.int64)
        valid = (
            (j2 >= 0) & (j2 <= self.n_tls) & ((self.n_tls - j2) % 2 == 0)
            & (np.abs(m2) <= j2) & ((j2 - m2) % 2 == 0)
        )
        offsets = self._offset_table[np.clip(j2, 0, self.n_tls)]
        return np.where(valid, offsets + (j2 - m2) // 2, -1)

    @cached_property
    def row_labels(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per-row ``(j2, m2)`` arrays of length ``n_ds``."""
        j2 = np.concatenate([np.full(b.dim, b.j2, dtype=np.int64) for b in self.blocks])
        m2 = np.concatenate([b.j2 - 2 * np.arange(b.dim, dtype=np.int64) for b in self.blocks])
        return j2, m2

    @cached_property
    def elements(self) -> ElementTable:
        parts = {key: [] for key in ("j2", "m2", "m2p", "row", "col")}
        for b in self.blocks:
            m2 = b.j2 - 2 * np.arange(b.dim, dtype=np.int64)
            local = np.arange(b.dim, dtype=np.int64)
            mm, mmp = np.meshgrid(m2, m2, indexing="ij")
            rr, cc = np.meshgrid(local + b.offset, local + b.offset, indexing="ij")
            parts["j2"].append(np.full(b.dim * b.dim, b.j2, dtype=np.int64))
            parts["m2"].append(mm.ravel())
            parts["m2p"].append(mmp.ravel())
            parts["row"].append(rr.ravel())
            parts["col"].append(cc.ravel())
        arrays = {key: np.concatenate(value) for key, value in parts.items()}
        return ElementTable(flat=arrays["row"] * self.n_ds + arrays["col"], **arrays)


@lru_cache(maxsize=64)
def dicke_basis(n_tls: int) -> DickeBasis:
    """Cached :class:`DickeBasis` for ``n_tls`` TLSs."""
    return DickeBasis.build(n_tls)


def flat_index(basis: DickeBasis, idx: ElementIndex) -> Tuple[int, int]:
    """Global ``(row, col)`` of a block element."""
    idx.validate(basis.n_tls)
    offset = basis.block(idx.j2).offset
    return offset + (idx.j2 - idx.m2) // 2, offset + (idx.j2 - idx.m2p) // 2
