"""
Collective spin operators and named density matrices.

Everything here is built twice: in the block-diagonal Dicke basis (the production
path) and in the 2^N uncoupled product basis, which is only used as a brute-force
oracle for small ensembles.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from math import comb
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from dickesim.config import settings
from dickesim.dicke_space import check_n_tls, dicke_basis, validate_jm
from dickesim.exceptions import InvalidEnsembleError, OracleCapError
from dickesim.linalg import as_sparse, from_triplets, identity, is_hermitian, prune

logger = logging.getLogger(__name__)


class SpinAxis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"
    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def parse(cls, value: Union[str, "SpinAxis"]) -> "SpinAxis":
        if isinstance(value, SpinAxis):
            return value
        aliases = {"+": cls.PLUS, "-": cls.MINUS, "p": cls.PLUS, "m": cls.MINUS}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InvalidEnsembleError(f"Unknown spin axis {value!r}") from None


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Density matrix plus a tag naming the basis it is written in."""
    matrix: sp.csr_matrix
    basis_tag: str = "dicke"
    dims: Optional[Tuple[int, ...]] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def purity(self) -> float:
        return float(np.real((self.matrix @ self.matrix).diagonal().sum()))

    def check(self, tol: float = 1e-12) -> None:
        """Raise if the trace or Hermiticity invariants are violated."""
        if abs(self.trace() - 1.0) > tol:
            raise InvalidEnsembleError(f"State trace {self.trace():.3e} differs from 1")
        if not is_hermitian(self.matrix, tol):
            raise InvalidEnsembleError("State is not Hermitian")


def _ket_to_state(ket: np.ndarray, basis_tag: str) -> QuantumState:
    rho = np.outer(ket, ket.conj())
    return QuantumState(prune(rho), basis_tag)


# Dicke basis


def jspin(n_tls: int, axis: Union[str, SpinAxis]) -> sp.csr_matrix:
    """
    Collective spin operator in the Dicke basis.

    Args:
        n_tls: number of TLSs
        axis: x, y, z, plus or minus

    Returns:
        block-diagonal ``n_ds x n_ds`` sparse matrix
    """
    axis = SpinAxis.parse(axis)
    basis = dicke_basis(check_n_tls(n_tls))
    j2, m2 = basis.row_labels
    rows = np.arange(basis.n_ds)
    if axis is SpinAxis.Z:
        return from_triplets(rows, rows, m2 / 2.0, (basis.n_ds, basis.n_ds))
    if axis in (SpinAxis.PLUS, SpinAxis.MINUS):
        j, m = j2 / 2.0, m2 / 2.0
        if axis is SpinAxis.PLUS:
            coeff = np.sqrt(np.maximum((j - m) * (j + m + 1), 0.0))
            targets = basis.rows(j2, m2 + 2)
        else:
            coeff = np.sqrt(np.maximum((j + m) * (j - m + 1), 0.0))
            targets = basis.rows(j2, m2 - 2)
        keep = targets >= 0
        return from_triplets(targets[keep], rows[keep], coeff[keep], (basis.n_ds, basis.n_ds))
    jp = jspin(n_tls, SpinAxis.PLUS)
    jm = jspin(n_tls, SpinAxis.MINUS)
    if axis is SpinAxis.X:
        return as_sparse(0.5 * (jp + jm))
    return as_sparse(-0.5j * (jp - jm))


def jspin_all(n_tls: int) -> Tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    return jspin(n_tls, "x"), jspin(n_tls, "y"), jspin(n_tls, "z")


def j2_operator(n_tls: int) -> sp.csr_matrix:
    """Casimir ``J^2``: ``j(j+1)`` on every row of block ``j``."""
    basis = dicke_basis(check_n_tls(n_tls))
    j = basis.row_labels[0] / 2.0
    rows = np.arange(basis.n_ds)
    return from_triplets(rows, rows, j * (j + 1), (basis.n_ds, basis.n_ds))


def dicke_state(n_tls: int, j2: int, m2: int) -> QuantumState:
    """Projector on ``|j, m>``."""
    validate_jm(n_tls, j2, m2)
    basis = dicke_basis(n_tls)
    row = basis.index(j2, m2)
    return QuantumState(from_triplets([row], [row], [1.0], (basis.n_ds, basis.n_ds)))


def excited(n_tls: int) -> QuantumState:
    return dicke_state(n_tls, n_tls, n_tls)


def ground(n_tls: int) -> QuantumState:
    return dicke_state(n_tls, n_tls, -n_tls)


def ghz(n_tls: int) -> QuantumState:
    """GHZ state: equal superposition of all-excited and all-ground."""
    basis = dicke_basis(check_n_tls(n_tls))
    top, bottom = 0, n_tls
    rows = [top, top, bottom, bottom]
    cols = [top, bottom, top, bottom]
    return QuantumState(from_triplets(rows, cols, [0.5] * 4, (basis.n_ds, basis.n_ds)))


def _css_amplitudes(a: complex, b: complex, coordinates: str) -> Tuple[complex, complex]:
    if coordinates == "polar":
        theta, phi = float(np.real(a)), float(np.real(b))
        a, b = np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)
    elif coordinates != "cartesian":
        raise InvalidEnsembleError(f"Unknown CSS coordinates {coordinates!r}")
    a, b = complex(a), complex(b)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise InvalidEnsembleError(f"CSS amplitudes are not normalized: |a|^2+|b|^2 = {abs(a)**2 + abs(b)**2}")
    return a, b


def css(n_tls: int, a: complex = 1 / np.sqrt(2), b: complex = 1 / np.sqrt(2), coordinates: str = "cartesian") -> QuantumState:
    """
    Coherent spin state ``(a|e> + b|g>)^N``.

    With ``coordinates="polar"``, ``a`` and ``b`` are read as ``theta`` and ``phi`` and
    converted to ``cos(theta/2)`` and ``exp(i phi) sin(theta/2)``. No global phase is
    removed, so ``b -> -b`` flips the sign of the odd coherences.
    """
    n = check_n_tls(n_tls)
    a, b = _css_amplitudes(a, b, coordinates)
    basis = dicke_basis(n)
    ket = np.zeros(basis.n_ds, dtype=np.complex128)
    for k in range(n + 1):
        # k excitations, m = k - N/2; row k from the bottom of the top block
        ket[n - k] = np.sqrt(comb(n, k)) * a ** k * b ** (n - k)
    return _ket_to_state(ket, "dicke")


# Uncoupled (2^N) oracle basis; single-TLS order is (|e>, |g>)

_SIGMA = {
    SpinAxis.X: np.array([[0, 0.5], [0.5, 0]], dtype=np.complex128),
    SpinAxis.Y: np.array([[0, -0.5j], [0.5j, 0]], dtype=np.complex128),
    SpinAxis.Z: np.array([[0.5, 0], [0, -0.5]], dtype=np.complex128),
    SpinAxis.PLUS: np.array([[0, 1], [0, 0]], dtype=np.complex128),
    SpinAxis.MINUS: np.array([[0, 0], [1, 0]], dtype=np.complex128),
}


def check_oracle_cap(n_tls: int) -> int:
    n = check_n_tls(n_tls)
    if n > settings.ORACLE_CAP:
        raise OracleCapError(f"Uncoupled basis requested for N={n}, above the cap of {settings.ORACLE_CAP}")
    return n


def uncoupled_operator(n_tls: int, axis: Union[str, SpinAxis], site: int) -> sp.csr_matrix:
    """``J_{axis,site}`` (``sigma/2`` or ``sigma_pm``) lifted onto the 2^N product space."""
    n = check_oracle_cap(n_tls)
    if not 0 <= site < n:
        raise InvalidEnsembleError(f"Site {site} out of range for N={n}")
    local = sp.csr_matrix(_SIGMA[SpinAxis.parse(axis)])
    left = identity(2 ** site)
    right = identity(2 ** (n - site - 1))
    return sp.kron(sp.kron(left, local), right, format="csr")


def uncoupled_collective(n_tls: int, axis: Union[str, SpinAxis]) -> sp.csr_matrix:
    n = check_oracle_cap(n_tls)
    total = uncoupled_operator(n, axis, 0)
    for site in range(1, n):
        total = total + uncoupled_operator(n, axis, site)
    return as_sparse(total)


def _product_ket(single: np.ndarray, n_tls: int) -> np.ndarray:
    return reduce(np.kron, [single] * n_tls)


def uncoupled_state(name: str, n_tls: int, **params) -> QuantumState:
    """
    Named state in the uncoupled basis.

    Args:
        name: excited, ground, ghz, css (``a``, ``b``, ``coordinates``) or
            dicke_symmetric (``m2``, the doubled inversion on the j = N/2 ladder)
        n_tls: number of TLSs
    """
    n = check_oracle_cap(n_tls)
    e = np.array([1.0, 0.0], dtype=np.complex128)
    g = np.array([0.0, 1.0], dtype=np.complex128)
    if name == "excited":
        ket = _product_ket(e, n)
    elif name == "ground":
        ket = _product_ket(g, n)
    elif name == "ghz":
        ket = (_product_ket(e, n) + _product_ket(g, n)) / np.sqrt(2)
    elif name == "css":
        a, b = _css_amplitudes(params.get("a", 1 / np.sqrt(2)), params.get("b", 1 / np.sqrt(2)), params.get("coordinates", "cartesian"))
        ket = _product_ket(a * e + b * g, n)
    elif name == "dicke_symmetric":
        m2 = int(params["m2"])
        validate_jm(n, n, m2)
        excitations = (n + m2) // 2
        # basis index bit set means the TLS is in |g>
        counts = np.array([n - bin(i).count("1") for i in range(2 ** n)])
        ket = (counts == excitations).astype(np.complex128)
        ket /= np.linalg.norm(ket)
    else:
        raise InvalidEnsembleError(f"Unknown uncoupled state {name!r}")
    return _ket_to_state(ket, "uncoupled")


def dicke_ket_labels(n_tls: int) -> Tuple[np.ndarray, np.ndarray]:
    """Doubled ``(j2, m2)`` label of every row of the Dicke basis."""
    return dicke_basis(check_n_tls(n_tls)).row_labels


OBSERVABLES = ("jx", "jy", "jz", "jp", "jm", "jpjm", "j2", "jx2", "jy2", "jz2")


def collective_observable(n_tls: int, name: str) -> sp.csr_matrix:
    """
    Collective operator by short name.

    Args:
        n_tls: number of TLSs
        name: one of ``OBSERVABLES``; ``jpjm`` is ``J+ J-`` and ``j2`` the Casimir
    """
    key = name.strip().lower()
    if key == "j2":
        return j2_operator(n_tls)
    if key == "jpjm":
        return as_sparse(jspin(n_tls, SpinAxis.PLUS) @ jspin(n_tls, SpinAxis.MINUS))
    if key in ("jx", "jy", "jz"):
        return jspin(n_tls, key[1])
    if key in ("jp", "jm"):
        return jspin(n_tls, SpinAxis.PLUS if key == "jp" else SpinAxis.MINUS)
    if key in ("jx2", "jy2", "jz2"):
        op = jspin(n_tls, key[1])
        return as_sparse(op @ op)
    raise InvalidEnsembleError(f"Unknown observable {name!r}; expected one of {', '.join(OBSERVABLES)}")
