"""
Sparse complex matrix kernel and superoperator plumbing.

Density matrices are flattened row by row, so that

    vec(A X B) = (A kron B^T) vec(X)

holds for every superoperator built in this package.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.integrate import DOP853

from dickesim.config import settings
from dickesim.exceptions import (
    DimensionMismatchError,
    EigenSolveError,
    IntegrationError,
    NonHermitianError,
)

logger = logging.getLogger(__name__)

SparseComplexMatrix = sp.csr_matrix
MatrixLike = Union[sp.spmatrix, np.ndarray]


def as_sparse(op: MatrixLike) -> sp.csr_matrix:
    """Return ``op`` as a complex CSR matrix (no copy when it already is one)."""
    if isinstance(op, sp.csr_matrix) and op.dtype == np.complex128:
        return op
    if sp.issparse(op):
        return sp.csr_matrix(op, dtype=np.complex128)
    return sp.csr_matrix(np.asarray(op, dtype=np.complex128))


def prune(op: MatrixLike, tol: Optional[float] = None) -> sp.csr_matrix:
    """Copy of ``op`` with entries below ``tol`` in magnitude removed."""
    tol = settings.PRUNE_TOL if tol is None else tol
    matrix = sp.csr_matrix(op, dtype=np.complex128, copy=True)
    matrix.sum_duplicates()
    matrix.data[np.abs(matrix.data) < tol] = 0
    matrix.eliminate_zeros()
    return matrix


def from_triplets(rows, cols, values, shape: Tuple[int, int], tol: Optional[float] = None) -> sp.csr_matrix:
    """Assemble a CSR matrix from coordinate triplets; duplicates are summed."""
    matrix = sp.coo_matrix(
        (np.asarray(values, dtype=np.complex128), (np.asarray(rows), np.asarray(cols))),
        shape=shape,
    )
    return prune(matrix.tocsr(), tol)


def check_square(op: MatrixLike, name: str = "operator") -> int:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {op.shape}")
    return op.shape[0]


def is_hermitian(op: MatrixLike, tol: Optional[float] = None) -> bool:
    """Hermiticity within a tolerance relative to the largest entry."""
    tol = settings.HERMITIAN_TOL if tol is None else tol
    matrix = as_sparse(op)
    if matrix.nnz == 0:
        return True
    deviation = abs(matrix - matrix.getH()).max()
    return deviation <= tol * max(1.0, abs(matrix).max())


@dataclass(frozen=True, eq=False)
class Superoperator:
    """
    Matrix acting on vectorized density matrices.

    ``dims`` lists the Hilbert dimensions of the subsystems; ``support`` optionally
    masks the vectorized positions that can be populated (block-diagonal positions
    of a Dicke space). ``None`` means every position.
    """
    matrix: sp.csr_matrix
    dims: Tuple[int, ...]
    support: Optional[np.ndarray] = None

    def __post_init__(self):
        hilbert = int(np.prod(self.dims))
        if self.matrix.shape != (hilbert * hilbert, hilbert * hilbert):
            raise DimensionMismatchError(
                f"Superoperator side {self.matrix.shape} does not match dims {self.dims}"
            )
        if self.support is not None and self.support.shape != (hilbert * hilbert,):
            raise DimensionMismatchError("Support mask does not match the superoperator side")

    @property
    def hilbert_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def _combined_support(self, other: "Superoperator") -> Optional[np.ndarray]:
        if self.support is None:
            return other.support
        if other.support is None:
            return self.support
        return self.support & other.support

    def _check_compatible(self, other: "Superoperator") -> None:
        if tuple(self.dims) != tuple(other.dims):
            raise DimensionMismatchError(f"Incompatible superoperator dims {self.dims} and {other.dims}")

    def __add__(self, other: "Superoperator") -> "Superoperator":
        self._check_compatible(other)
        return Superoperator(as_sparse(self.matrix + other.matrix), self.dims, self._combined_support(other))

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        return self + (-1.0) * other

    def __neg__(self) -> "Superoperator":
        return (-1.0) * self

    def __mul__(self, scalar: complex) -> "Superoperator":
        return Superoperator(as_sparse(self.matrix * scalar), self.dims, self.support)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Superoperator):
            self._check_compatible(other)
            return Superoperator(as_sparse(self.matrix @ other.matrix), self.dims, self._combined_support(other))
        return self.apply(other)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=np.complex128)
        if vector.shape[0] != self.side:
            raise DimensionMismatchError(f"Vector of length {vector.shape[0]} for superoperator side {self.side}")
        return self.matrix @ vector

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def vectorize(rho: MatrixLike) -> np.ndarray:
    """Row-major stacking of a square matrix into a dense complex vector."""
    dim = check_square(rho, "density matrix")
    coo = as_sparse(rho).tocoo()
    vector = np.zeros(dim * dim, dtype=np.complex128)
    np.add.at(vector, coo.row.astype(np.int64) * dim + coo.col, coo.data)
    return vector


def devectorize(vector: np.ndarray, dim: Optional[int] = None) -> sp.csr_matrix:
    """Inverse of :func:`vectorize`."""
    vector = np.asarray(vector, dtype=np.complex128).ravel()
    if dim is None:
        dim = int(round(np.sqrt(vector.size)))
    if dim * dim != vector.size:
        raise DimensionMismatchError(f"Vector of length {vector.size} is not a {dim}x{dim} matrix")
    return sp.csr_matrix(vector.reshape(dim, dim))


def kron(a: MatrixLike, b: MatrixLike) -> sp.csr_matrix:
    return sp.kron(as_sparse(a), as_sparse(b), format="csr")


def identity(dim: int) -> sp.csr_matrix:
    return sp.identity(dim, dtype=np.complex128, format="csr")


def _dims_for(op: MatrixLike, dims: Optional[Sequence[int]]) -> Tuple[int, ...]:
    dim = check_square(op)
    dims = (dim,) if dims is None else tuple(int(d) for d in dims)
    if int(np.prod(dims)) != dim:
        raise DimensionMismatchError(f"dims {dims} do not multiply to operator side {dim}")
    return dims


def spre(a: MatrixLike, dims: Optional[Sequence[int]] = None) -> Superoperator:
    """Left multiplication: ``spre(A) vec(X) = vec(A X)``."""
    dims = _dims_for(a, dims)
    return Superoperator(kron(a, identity(a.shape[0])), dims)


def spost(b: MatrixLike, dims: Optional[Sequence[int]] = None) -> Superoperator:
    """Right multiplication: ``spost(B) vec(X) = vec(X B)``."""
    dims = _dims_for(b, dims)
    return Superoperator(kron(identity(b.shape[0]), as_sparse(b).T), dims)


def hamiltonian_superoperator(h: MatrixLike, dims: Optional[Sequence[int]] = None) -> Superoperator:
    """Vectorized ``-i[H, .]``."""
    dims = _dims_for(h, dims)
    if not is_hermitian(h):
        raise NonHermitianError("Hamiltonian is not Hermitian within tolerance")
    return Superoperator(as_sparse(-1j * (spre(h, dims).matrix - spost(h, dims).matrix)), dims)


def lindblad_dissipator(a: MatrixLike, dims: Optional[Sequence[int]] = None) -> Superoperator:
    """Vectorized ``L_A[rho] = 2 A rho A^dag - A^dag A rho - rho A^dag A`` (no rate prefactor)."""
    dims = _dims_for(a, dims)
    a = as_sparse(a)
    ada = as_sparse(a.getH() @ a)
    dim = a.shape[0]
    matrix = 2.0 * kron(a, a.conj()) - kron(ada, identity(dim)) - kron(identity(dim), ada.T)
    return Superoperator(prune(matrix), dims)


def trace_functional(dim: int) -> np.ndarray:
    """Row vector ``t`` with ``t . vec(X) = Tr X``."""
    functional = np.zeros(dim * dim)
    functional[np.arange(dim) * (dim + 1)] = 1.0
    return functional


@dataclass
class IntegrationResult:
    times: np.ndarray
    vectors: np.ndarray


def _time_grid(times: Sequence[float]) -> np.ndarray:
    grid = np.asarray(times, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("Time grid must be a non-empty one-dimensional sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("Time grid must be strictly ascending")
    return grid


def iterate_solution(
    generator,
    v0: np.ndarray,
    times: Sequence[float],
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
    max_step: Optional[float] = None,
) -> Iterator[Tuple[float, np.ndarray]]:
    """
    Integrate ``dv/dt = D v`` and yield ``(t, v(t))`` at each requested time.

    Uses the adaptive 8(5,3) Dormand-Prince scheme step by step and samples its dense
    output, so memory does not grow with the grid length.

    Args:
        generator: Superoperator, sparse matrix or anything supporting ``@`` with a vector
        v0: state at ``times[0]``
        times: strictly ascending sample times
        rtol, atol, max_step: integrator options (settings defaults when omitted)

    Yields:
        (time, vector) pairs, the first one being ``(times[0], v0)``
    """
    matrix = generator.matrix if isinstance(generator, Superoperator) else generator
    v0 = np.asarray(v0, dtype=np.complex128).ravel()
    if matrix.shape[1] != v0.size:
        raise DimensionMismatchError(f"Initial vector of length {v0.size} for generator side {matrix.shape[1]}")
    grid = _time_grid(times)
    rtol = settings.RTOL if rtol is None else rtol
    atol = settings.ATOL if atol is None else atol
    max_step = settings.MAX_STEP if max_step is None else max_step

    yield float(grid[0]), v0.copy()
    if grid.size == 1:
        return

    solver = DOP853(
        lambda t, y: matrix @ y, grid[0], v0, grid[-1],
        rtol=rtol, atol=atol, max_step=max_step,
    )
    k = 1
    while k < grid.size:
        message = solver.step()
        if solver.status == "failed":
            raise IntegrationError(message or "Integrator step failed", solver.t)
        if not np.all(np.isfinite(solver.y)):
            raise IntegrationError("Non-finite state encountered", solver.t)
        if grid[k] <= solver.t:
            dense = solver.dense_output()
            while k < grid.size and grid[k] <= solver.t:
                sample = solver.y.copy() if grid[k] == solver.t else dense(grid[k])
                yield float(grid[k]), sample
                k += 1


def integrate(
    generator,
    v0: np.ndarray,
    times: Sequence[float],
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
    max_step: Optional[float] = None,
) -> IntegrationResult:
    """Collect :func:`iterate_solution` into arrays."""
    samples = list(iterate_solution(generator, v0, times, rtol=rtol, atol=atol, max_step=max_step))
    return IntegrationResult(
        times=np.array([t for t, _ in samples]),
        vectors=np.array([v for _, v in samples]),
    )


def eigensolve_hermitian(h: MatrixLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Full diagonalization of a Hermitian matrix.

    Returns:
        ascending eigenvalues and the matching orthonormal eigenvectors (as columns)
    """
    dense = h.toarray() if sp.issparse(h) else np.asarray(h, dtype=np.complex128)
    check_square(dense, "Hamiltonian")
    if not is_hermitian(dense):
        raise NonHermitianError("Matrix is not Hermitian within tolerance")
    try:
        energies, vectors = la.eigh(dense)
    except la.LinAlgError as e:
        raise EigenSolveError(f"Hermitian eigensolver did not converge: {e}") from e
    scale = max(1.0, np.abs(dense).max()) * dense.shape[0]
    residual = np.abs(dense @ vectors - vectors * energies).max() if dense.size else 0.0
    if residual > 1e-9 * scale:
        raise EigenSolveError(f"Eigenpair residual {residual:.3e} exceeds tolerance")
    return energies, vectors
