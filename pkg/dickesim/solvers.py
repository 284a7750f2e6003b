"""
User-facing dynamics and analysis: time evolution, the diagonal fast path,
steady states, expectation values, emission spectra, partial traces, Wigner
functions and the spin-squeezing parameter.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from dickesim.composite import CompositeSpace, lift
from dickesim.config import settings
from dickesim.dicke_space import check_n_tls, dicke_basis
from dickesim.exceptions import (
    AmbiguousSteadyStateError,
    DimensionMismatchError,
    InvalidEnsembleError,
    NonDiagonalInputError,
    NonHermitianError,
    SingularResolventError,
    SteadyStateError,
    UndefinedSqueezingError,
)
from dickesim.linalg import (
    MatrixLike,
    Superoperator,
    as_sparse,
    devectorize,
    is_hermitian,
    iterate_solution,
    trace_functional,
    vectorize,
)
from dickesim.liouvillian import rate_matrix
from dickesim.models.rates import Rates
from dickesim.operators import QuantumState, jspin_all

logger = logging.getLogger(__name__)

StateLike = Union[QuantumState, MatrixLike]


@dataclass
class Trajectory:
    times: np.ndarray
    expectations: Dict[str, np.ndarray]
    states: Optional[List[sp.csr_matrix]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass
class SteadyState:
    rho: sp.csr_matrix
    residual: float


def _matrix_of(rho: StateLike) -> sp.csr_matrix:
    return rho.matrix if isinstance(rho, QuantumState) else as_sparse(rho)


def _expectation_row(op: MatrixLike, dim: int) -> np.ndarray:
    op = as_sparse(op)
    if op.shape != (dim, dim):
        raise DimensionMismatchError(f"Observable shape {op.shape} does not match state dim {dim}")
    # Tr(O rho) = vec(O^T) . vec(rho)
    return vectorize(op.T)


def _off_diagonal_violation(matrix: sp.csr_matrix, tol: float):
    coo = matrix.tocoo()
    off = coo.row != coo.col
    if not np.any(off):
        return None
    magnitudes = np.abs(coo.data[off])
    worst = int(np.argmax(magnitudes))
    if magnitudes[worst] < tol:
        return None
    return int(coo.row[off][worst]), int(coo.col[off][worst]), coo.data[off][worst]


def _restrict(generator: Superoperator, rho0: sp.csr_matrix):
    """Generator and initial vector on the representable positions only."""
    v0 = vectorize(rho0)
    if generator.support is None:
        return generator.matrix, None, v0
    index = np.flatnonzero(generator.support)
    outside = np.abs(v0[~generator.support]).max(initial=0.0)
    if outside > 1e-12:
        raise InvalidEnsembleError(f"Initial state has coherences between different j blocks (max {outside:.3e})")
    return as_sparse(generator.matrix[index][:, index]), index, v0[index]


def _run_trajectory(
    generator: Superoperator,
    rho0: sp.csr_matrix,
    times: Sequence[float],
    observables: Mapping[str, MatrixLike],
    keep_states: bool,
    rtol: Optional[float],
    atol: Optional[float],
    max_step: Optional[float],
    top_fock_rows: Mapping[int, np.ndarray],
    monitor_positivity: bool,
) -> Trajectory:
    dim = generator.hilbert_dim
    matrix, index, v0 = _restrict(generator, rho0)
    pick = (lambda row: row) if index is None else (lambda row: row[index])
    rows = {label: pick(_expectation_row(op, dim)) for label, op in observables.items()}
    fock_rows = {slot: pick(row) for slot, row in top_fock_rows.items()}
    trace_row = pick(trace_functional(dim))
    series: Dict[str, List[complex]] = {label: [] for label in rows}
    states: List[sp.csr_matrix] = []
    trace_drift, min_eigenvalue, top_population = 0.0, np.inf, 0.0

    sample_times = []
    for t, v in iterate_solution(matrix, v0, times, rtol=rtol, atol=atol, max_step=max_step):
        sample_times.append(t)
        for label, row in rows.items():
            series[label].append(row @ v)
        trace_drift = max(trace_drift, abs(trace_row @ v - 1.0))
        for row in fock_rows.values():
            top_population = max(top_population, float(np.real(row @ v)))
        if keep_states or monitor_positivity:
            if index is None:
                rho = devectorize(v, dim)
            else:
                full = np.zeros(dim * dim, dtype=np.complex128)
                full[index] = v
                rho = devectorize(full, dim)
            if keep_states:
                states.append(rho)
            if monitor_positivity:
                hermitian = rho.toarray()
                min_eigenvalue = min(min_eigenvalue, float(la.eigvalsh(0.5 * (hermitian + hermitian.conj().T))[0]))

    metadata: Dict[str, Any] = {"trace_drift": trace_drift}
    if top_fock_rows:
        metadata["top_fock_population"] = top_population
    if monitor_positivity:
        metadata["min_eigenvalue"] = min_eigenvalue
    return Trajectory(
        times=np.asarray(sample_times),
        expectations={label: np.asarray(values) for label, values in series.items()},
        states=states if keep_states else None,
        metadata=metadata,
    )


def evolve(
    generator: Superoperator,
    rho0: StateLike,
    times: Sequence[float],
    observables: Optional[Mapping[str, MatrixLike]] = None,
    keep_states: bool = False,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
    max_step: Optional[float] = None,
    space: Optional[CompositeSpace] = None,
    monitor_positivity: bool = False,
) -> Trajectory:
    """
    Integrate ``d vec(rho)/dt = D vec(rho)`` and record expectation values.

    Args:
        generator: Liouvillian superoperator
        rho0: initial density matrix
        times: strictly ascending grid, ``times[0]`` being the time of ``rho0``
        observables: label -> operator map, recorded at every grid point
        keep_states: retain the density matrix at every grid point
        space: composite space; enables the Fock cutoff monitor on bosonic slots
        monitor_positivity: track the smallest eigenvalue of every sample and re-run
            with tighter tolerances when it dips below ``-POSITIVITY_TOL``

    Returns:
        Trajectory with complex expectation series
    """
    rho0 = _matrix_of(rho0)
    dim = generator.hilbert_dim
    if rho0.shape != (dim, dim):
        raise DimensionMismatchError(f"Initial state shape {rho0.shape} does not match generator dim {dim}")
    observables = dict(observables or {})
    rtol = settings.RTOL if rtol is None else rtol
    atol = settings.ATOL if atol is None else atol

    top_fock_rows: Dict[int, np.ndarray] = {}
    if space is not None:
        for slot, factor in enumerate(space.factors):
            if factor.kind == "bosonic":
                top = sp.csr_matrix(([1.0], ([factor.dim - 1], [factor.dim - 1])), shape=(factor.dim, factor.dim))
                top_fock_rows[slot] = _expectation_row(lift(top, space, slot), dim)

    started = time.perf_counter()
    trajectory = _run_trajectory(generator, rho0, times, observables, keep_states, rtol, atol, max_step, top_fock_rows, monitor_positivity)
    if monitor_positivity and trajectory.metadata["min_eigenvalue"] < -settings.POSITIVITY_TOL:
        logger.warning(
            f"Smallest sampled eigenvalue {trajectory.metadata['min_eigenvalue']:.3e}; "
            f"re-running with rtol={rtol / 100:.1e}, atol={atol / 100:.1e}"
        )
        trajectory = _run_trajectory(
            generator, rho0, times, observables, keep_states, rtol / 100, atol / 100, max_step, top_fock_rows, monitor_positivity
        )
        trajectory.metadata["tightened"] = True

    if trajectory.metadata["trace_drift"] > 10 * rtol:
        logger.warning(f"Trace drifted by {trajectory.metadata['trace_drift']:.3e} during evolution")
    top = trajectory.metadata.get("top_fock_population", 0.0)
    if top > settings.TRUNCATION_WARN:
        logger.warning(f"Top Fock level population reached {top:.3e}; the cutoff may be too small")
        trajectory.metadata["truncation_warning"] = True
    trajectory.metadata["wall_time"] = time.perf_counter() - started
    logger.debug(f"evolve: {len(trajectory.times)} samples in {trajectory.metadata['wall_time']:.3f} s")
    return trajectory


def pisolve(
    n_tls: int,
    rates: Rates,
    h_diag: Optional[MatrixLike],
    rho0_diag: StateLike,
    times: Sequence[float],
    observables: Optional[Mapping[str, MatrixLike]] = None,
    keep_states: bool = False,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
    max_step: Optional[float] = None,
) -> Trajectory:
    """
    Population-only solver for problems that stay diagonal in the Dicke basis.

    Integrates ``dp/dt = M p`` with the rate matrix. The Hamiltonian, if given, must be
    diagonal; it then drops out of the population dynamics.
    """
    n = check_n_tls(n_tls)
    basis = dicke_basis(n)
    rho0 = _matrix_of(rho0_diag)
    if rho0.shape != (basis.n_ds, basis.n_ds):
        raise DimensionMismatchError(f"Initial state shape {rho0.shape} does not match n_ds={basis.n_ds}")
    inputs = {"Hamiltonian": h_diag, "initial state": rho0}
    for name, matrix in inputs.items():
        if matrix is None:
            continue
        violation = _off_diagonal_violation(as_sparse(matrix), 1e-12)
        if violation is not None:
            row, col, value = violation
            j2, m2 = basis.row_labels
            raise NonDiagonalInputError(
                f"pisolve needs a diagonal {name}; element ({row}, {col}) = {value:.3e} "
                f"couples |j={j2[row] / 2:g}, m={m2[row] / 2:g}> and |j={j2[col] / 2:g}, m={m2[col] / 2:g}>"
            )

    diagonals = {}
    for label, op in (observables or {}).items():
        op = as_sparse(op)
        if op.shape != (basis.n_ds, basis.n_ds):
            raise DimensionMismatchError(f"Observable {label!r} has shape {op.shape}")
        diagonals[label] = op.diagonal()

    started = time.perf_counter()
    generator = rate_matrix(n, rates)
    series: Dict[str, List[complex]] = {label: [] for label in diagonals}
    states: List[sp.csr_matrix] = []
    sample_times = []
    drift = 0.0
    p0 = np.real(rho0.diagonal()).astype(float)
    for t, p in iterate_solution(generator, p0, times, rtol=rtol, atol=atol, max_step=max_step):
        sample_times.append(t)
        populations = np.real(p)
        drift = max(drift, abs(populations.sum() - 1.0))
        for label, diagonal in diagonals.items():
            series[label].append(diagonal @ populations)
        if keep_states:
            states.append(sp.diags(populations.astype(np.complex128), format="csr"))
    elapsed = time.perf_counter() - started
    logger.debug(f"pisolve N={n}: {len(sample_times)} samples in {elapsed:.3f} s")
    return Trajectory(
        times=np.asarray(sample_times),
        expectations={label: np.asarray(values) for label, values in series.items()},
        states=states if keep_states else None,
        metadata={"trace_drift": drift, "wall_time": elapsed},
    )


def _kernel_by_eigs(matrix: sp.csr_matrix, tol: float) -> np.ndarray:
    """Kernel vector of ``matrix`` by eigen-decomposition; raises if it is not one-dimensional."""
    side = matrix.shape[0]
    if side <= 400:
        eigenvalues, eigenvectors = la.eig(matrix.toarray())
    else:
        # an exactly singular matrix cannot be factorized at sigma=0
        shift = -1e3 * tol
        try:
            eigenvalues, eigenvectors = spla.eigs(matrix.tocsc(), k=2, sigma=shift, which="LM")
        except (RuntimeError, spla.ArpackError) as e:
            raise SteadyStateError(f"Shift-invert eigensolver failed: {e}") from e
    order = np.argsort(np.abs(eigenvalues))
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]
    if np.abs(eigenvalues[0]) > tol:
        raise SteadyStateError(f"No zero eigenvalue found (smallest |lambda| = {abs(eigenvalues[0]):.3e})")
    if eigenvalues.size > 1 and np.abs(eigenvalues[1]) <= tol:
        raise AmbiguousSteadyStateError(
            f"Kernel is degenerate (|lambda_0| = {abs(eigenvalues[0]):.3e}, |lambda_1| = {abs(eigenvalues[1]):.3e}); "
            "multiple steady states exist"
        )
    return eigenvectors[:, 0]


def _null_vector(matrix: sp.csr_matrix, trace: np.ndarray) -> np.ndarray:
    """Solve ``A x = 0`` with ``trace . x = 1``; the last row of A is replaced by the trace row."""
    side = matrix.shape[0]
    scale = max(1.0, abs(matrix).max()) if matrix.nnz else 1.0
    augmented = sp.vstack([matrix[:-1], sp.csr_matrix(trace.reshape(1, -1))], format="csc")
    rhs = np.zeros(side, dtype=np.complex128)
    rhs[-1] = 1.0
    x = None
    try:
        x = spla.splu(augmented.astype(np.complex128)).solve(rhs)
    except RuntimeError as e:
        # with trace . A = 0 and a population in the last row, only a degenerate kernel gets here
        if trace[-1] != 0 and np.abs(matrix.T @ trace).max(initial=0.0) <= 1e-8 * scale:
            raise AmbiguousSteadyStateError(
                f"Trace-constrained generator is exactly singular ({e}); multiple steady states exist"
            ) from e
        logger.warning(f"Sparse LU failed ({e}); falling back to shift-invert eigensolver")
    if x is not None and np.all(np.isfinite(x)) and np.abs(matrix @ x).max(initial=0.0) <= 1e-8 * scale:
        return x
    if x is not None:
        logger.warning("Sparse LU solution has a large residual; falling back to shift-invert eigensolver")
    x = _kernel_by_eigs(matrix, 1e-8 * scale)
    norm = trace @ x
    if abs(norm) < 1e-14:
        raise SteadyStateError("Kernel vector has vanishing trace")
    return x / norm


def steadystate(generator: Superoperator) -> SteadyState:
    """
    Unique steady state of a Liouvillian.

    The solve runs on the representable positions only; the trace functional
    replaces the last row of the restricted generator.
    """
    dim = generator.hilbert_dim
    support = generator.support if generator.support is not None else np.ones(generator.side, dtype=bool)
    index = np.flatnonzero(support)
    restricted = as_sparse(generator.matrix[index][:, index])
    started = time.perf_counter()
    x = _null_vector(restricted, trace_functional(dim)[index])

    full = np.zeros(generator.side, dtype=np.complex128)
    full[index] = x
    rho = devectorize(full, dim)
    rho = as_sparse(0.5 * (rho + rho.getH()))
    rho = as_sparse(rho / rho.diagonal().sum())
    residual = float(np.abs(generator.matrix @ vectorize(rho)).max(initial=0.0))
    logger.debug(f"steadystate: {index.size} unknowns, residual {residual:.3e}, {time.perf_counter() - started:.3f} s")
    return SteadyState(rho=rho, residual=residual)


def pisteadystate(n_tls: int, rates: Rates) -> SteadyState:
    """Steady populations of the rate matrix, returned as a diagonal density matrix."""
    generator = rate_matrix(n_tls, rates)
    p = np.real(_null_vector(as_sparse(generator), np.ones(generator.shape[0])))
    p = p / p.sum()
    residual = float(np.abs(generator @ p).max(initial=0.0))
    return SteadyState(rho=sp.diags(p.astype(np.complex128), format="csr"), residual=residual)


def expect(op: MatrixLike, rho: StateLike) -> Union[float, complex]:
    """``Tr(op rho)``; real for Hermitian ``op``."""
    op = as_sparse(op)
    rho = _matrix_of(rho)
    if op.shape != rho.shape:
        raise DimensionMismatchError(f"Operator shape {op.shape} does not match state shape {rho.shape}")
    value = complex(op.multiply(rho.T).sum())
    if is_hermitian(op):
        if abs(value.imag) > 1e-9 * max(1.0, abs(value)):
            raise NonHermitianError(f"Expectation of a Hermitian operator has imaginary part {value.imag:.3e}")
        return value.real
    return value


def spectrum(
    generator: Superoperator,
    a_op: MatrixLike,
    omega_grid: Sequence[float],
    rho_ss: StateLike,
    jobs: int = 1,
) -> np.ndarray:
    """
    Stationary emission spectrum from the quantum regression theorem,
    ``S(w) = 2 Re Tr[a^dag (i w - D)^-1 (a rho_ss)]``, one sparse solve per frequency.
    """
    dim = generator.hilbert_dim
    a = as_sparse(a_op)
    rho = _matrix_of(rho_ss)
    if a.shape != (dim, dim) or rho.shape != (dim, dim):
        raise DimensionMismatchError("Operator or state does not match the generator dimension")
    support = generator.support if generator.support is not None else np.ones(generator.side, dtype=bool)
    index = np.flatnonzero(support)
    restricted = as_sparse(generator.matrix[index][:, index]).tocsc()
    source = vectorize(a @ rho)[index]
    readout = _expectation_row(a.getH(), dim)[index]
    omegas = np.asarray(omega_grid, dtype=float)
    if not np.any(np.abs(source) > 0):
        return np.zeros(omegas.size)
    unit = sp.identity(index.size, dtype=np.complex128, format="csc")

    def point(omega: float) -> float:
        try:
            x = spla.splu((1j * omega) * unit - restricted).solve(source)
        except RuntimeError:
            raise SingularResolventError(omega) from None
        if not np.all(np.isfinite(x)):
            raise SingularResolventError(omega)
        return 2.0 * float(np.real(readout @ x))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return np.array(list(pool.map(point, omegas)))
    return np.array([point(w) for w in omegas])


def partial_trace(rho: StateLike, space: CompositeSpace, keep: Union[int, Sequence[int]]) -> sp.csr_matrix:
    """Reduced density matrix on the ``keep`` slots (factor order preserved)."""
    keep = [keep] if isinstance(keep, (int, np.integer)) else sorted(set(keep))
    dims = list(space.dims)
    for slot in keep:
        space.factor(slot)
    matrix = _matrix_of(rho)
    if matrix.shape != (space.total_dim, space.total_dim):
        raise DimensionMismatchError(f"State shape {matrix.shape} does not match space dim {space.total_dim}")
    tensor = matrix.toarray().reshape(dims + dims)
    count = len(dims)
    for slot in reversed(range(len(dims))):
        if slot in keep:
            continue
        tensor = np.trace(tensor, axis1=slot, axis2=slot + count)
        count -= 1
    kept = int(np.prod([dims[s] for s in keep]))
    return sp.csr_matrix(tensor.reshape(kept, kept))


def top_fock_population(rho: StateLike, space: CompositeSpace, slot: int) -> float:
    """Population of the highest Fock level kept in a bosonic slot."""
    factor = space.factor(slot)
    if factor.kind != "bosonic":
        raise InvalidEnsembleError(f"Slot {slot} is not bosonic")
    reduced = partial_trace(rho, space, slot)
    return float(np.real(reduced[factor.dim - 1, factor.dim - 1]))


def _laguerre_clenshaw(order: int, x: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Clenshaw sum of ``c_n (-1)^n sqrt(n!/(n+L)!) ... L_n^L(x)`` normalized Laguerre terms."""
    if len(coeffs) == 1:
        y0, y1 = coeffs[0], 0
    elif len(coeffs) == 2:
        y0, y1 = coeffs[0], coeffs[1]
    else:
        k = len(coeffs)
        y0, y1 = coeffs[-2], coeffs[-1]
        for i in range(3, len(coeffs) + 1):
            k -= 1
            y0, y1 = (
                coeffs[-i] - y1 * np.sqrt((k - 1) * (order + k - 1) / ((order + k) * k)),
                y0 - y1 * ((order + 2 * k - 1) - x) / np.sqrt((order + k) * k),
            )
    return y0 - y1 * ((order + 1) - x) / np.sqrt(order + 1)


def wigner(rho_ph: StateLike, xs: Sequence[float], ps: Sequence[float]) -> np.ndarray:
    """
    Wigner function ``W(x, p)`` of a single bosonic mode, ``a = (x + i p)/sqrt(2)``.

    Returns:
        array of shape ``(len(ps), len(xs))``
    """
    rho = _matrix_of(rho_ph).toarray()
    cutoff = rho.shape[0]
    tail = float(np.real(rho[-1, -1]))
    if tail > settings.TRUNCATION_WARN:
        logger.warning(f"Top Fock population {tail:.3e}: cutoff too small for a faithful Wigner function")
    x, p = np.meshgrid(np.asarray(xs, dtype=float), np.asarray(ps, dtype=float))
    g = np.sqrt(2.0)
    a2 = g * (x + 1j * p)
    b = np.abs(a2) ** 2
    doubled = rho * (2 * np.ones((cutoff, cutoff)) - np.eye(cutoff))
    w0 = doubled[0, -1] * np.ones_like(a2)
    order = cutoff - 1
    while order > 0:
        order -= 1
        w0 = _laguerre_clenshaw(order, b, np.diag(doubled, order)) + w0 * a2 / np.sqrt(order + 1)
    return np.real(w0 * np.exp(-b / 2)) * g * g / (2 * np.pi)


def spin_squeezing_xi2(rho: StateLike, n_tls: int) -> float:
    """``xi^2 = N <dJy^2> / (<Jz>^2 + <Jx>^2)``; below 1 signals squeezing."""
    jx, jy, jz = jspin_all(n_tls)
    mean_x, mean_y, mean_z = expect(jx, rho), expect(jy, rho), expect(jz, rho)
    variance_y = expect(as_sparse(jy @ jy), rho) - mean_y ** 2
    denominator = mean_z ** 2 + mean_x ** 2
    if denominator <= 1e-12:
        raise UndefinedSqueezingError("Mean spin in the z-x plane vanishes; xi^2 is undefined")
    return float(n_tls * variance_y / denominator)


def squeezing_duration(times: Sequence[float], xi2: Sequence[Optional[float]]) -> float:
    """Length of the longest contiguous stretch with ``xi^2 < 1``; undefined points break stretches."""
    times = np.asarray(times, dtype=float)
    values = np.array([np.nan if v is None else v for v in xi2], dtype=float)
    best, start = 0.0, None
    for k, value in enumerate(values):
        if np.isfinite(value) and value < 1.0:
            start = k if start is None else start
            best = max(best, times[k] - times[start])
        else:
            start = None
    return float(best)
