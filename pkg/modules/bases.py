"""
Bases Module
Analytic construction of the measurement bases used by both protocols, the
shift operators relating them, and the small gates their circuits need.

Every basis lives on 2d labels (d = 2^N data labels, ancilla as the most
significant bit). Elements are ordered group-major: element 4k + r is the
r-th member of group k.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from modules.errors import BasisError
from modules.statevector import GateMatrix

logger = logging.getLogger(__name__)

BASIS_NAMES = ("B0", "C1", "D1", "D2")
SHIFT_KINDS = ("conditional_T1", "global_T2", "increment", "decrement")

# cube root of unity kept in polar form so that w**3 == 1 to machine precision
W = complex(np.cos(2 * np.pi / 3), np.sin(2 * np.pi / 3))
SUPPORT_TOLERANCE = 1e-14


def _check_data_dim(d: int):
    if not isinstance(d, (int, np.integer)) or d < 2 or d & (d - 1):
        raise BasisError(f"d must be a power of two >= 2, got {d}")


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """
    Ordered orthonormal basis of the 2d-dimensional compound space.

    `matrix` holds the elements as columns; `support` lists, per element,
    the labels carrying a nonzero coefficient.
    """

    name: str
    matrix: np.ndarray
    support: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise BasisError(f"Basis {self.name} must be square, got {matrix.shape}")
        if len(self.support) != matrix.shape[1]:
            raise BasisError(f"Basis {self.name} support metadata does not cover every element")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.dim // 2

    @property
    def elements(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.matrix[:, j] for j in range(self.dim))

    def element(self, index: int) -> np.ndarray:
        return self.matrix[:, index]

    def gram_residual(self) -> float:
        """Largest deviation of the Gram matrix from the identity."""
        gram = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def kept_canonical(self) -> Tuple[int, ...]:
        """Indices of elements that are single canonical vectors."""
        return tuple(j for j, labels in enumerate(self.support) if len(labels) == 1)


@dataclass(frozen=True)
class ShiftOperator:
    """Label permutation: label k is sent to permutation[k]."""

    dim: int
    kind: str
    permutation: Tuple[int, ...]

    def matrix(self) -> GateMatrix:
        entries = np.zeros((self.dim, self.dim), dtype=complex)
        entries[list(self.permutation), np.arange(self.dim)] = 1.0
        return GateMatrix(entries, name=self.kind)

    def inverse(self) -> 'ShiftOperator':
        inverse = [0] * self.dim
        for source, image in enumerate(self.permutation):
            inverse[image] = source
        kind = {"increment": "decrement", "decrement": "increment"}.get(self.kind, f"{self.kind}_inverse")
        return ShiftOperator(self.dim, kind, tuple(inverse))

    def compose(self, other: 'ShiftOperator') -> 'ShiftOperator':
        """self after other."""
        if other.dim != self.dim:
            raise BasisError(f"Cannot compose shifts of dimension {self.dim} and {other.dim}")
        return ShiftOperator(self.dim, f"{self.kind}*{other.kind}",
                             tuple(self.permutation[other.permutation[k]] for k in range(self.dim)))


def _support_of(matrix: np.ndarray) -> Tuple[Tuple[int, ...], ...]:
    return tuple(
        tuple(int(label) for label in np.flatnonzero(np.abs(matrix[:, j]) > SUPPORT_TOLERANCE))
        for j in range(matrix.shape[1])
    )


@lru_cache(maxsize=None)
def build_b0(d: int) -> MeasurementBasis:
    """Canonical basis of the compound space."""
    _check_data_dim(d)
    matrix = np.eye(2 * d, dtype=complex)
    return MeasurementBasis("B0", matrix, _support_of(matrix))


def c1_group_labels(d: int, k: int) -> Tuple[int, int, int, int]:
    """The four labels mixed by group k of C1, after the conditional shift."""
    return (2 * k, 2 * k + 1, 2 * k + 1 + d, (2 * k + 2) % d + d)


@lru_cache(maxsize=None)
def build_c1(d: int) -> MeasurementBasis:
    """
    Protocol-1 basis: a 4-point Fourier combination on every group
    {2k, 2k+1, 2k+1+d, ((2k+2) mod d)+d}.

    Element 4k + r carries coefficient i^(r*m)/2 on the m-th group label, so
    element 4k+1 has coefficient i on label 2k+1.
    """
    _check_data_dim(d)
    dim = 2 * d
    matrix = np.zeros((dim, dim), dtype=complex)
    phases = np.array([1, 1j, -1, -1j])

    for k in range(d // 2):
        labels = c1_group_labels(d, k)
        for r in range(4):
            for m, label in enumerate(labels):
                matrix[label, 4 * k + r] = phases[(r * m) % 4] / 2

    logger.debug(f"Built C1 for d={d}")
    return MeasurementBasis("C1", matrix, _support_of(matrix))


@lru_cache(maxsize=None)
def build_d1(d: int) -> MeasurementBasis:
    """
    Protocol-2 basis: 3-point Fourier combinations on {2k, 2k+1, 2k+d} with
    the label 2k+1+d kept canonical.

    Element order per group: Fourier r = 0, 1, 2, then the kept vector.
    """
    _check_data_dim(d)
    dim = 2 * d
    matrix = np.zeros((dim, dim), dtype=complex)
    roots = np.array([1.0, W, W.conjugate()])

    for k in range(d // 2):
        labels = (2 * k, 2 * k + 1, 2 * k + d)
        for r in range(3):
            for m, label in enumerate(labels):
                matrix[label, 4 * k + r] = roots[(r * m) % 3] / np.sqrt(3)
        matrix[2 * k + 1 + d, 4 * k + 3] = 1.0

    logger.debug(f"Built D1 for d={d}")
    return MeasurementBasis("D1", matrix, _support_of(matrix))


@lru_cache(maxsize=None)
def build_d2(d: int) -> MeasurementBasis:
    """D1 carried through the global shift, labels taken modulo 2d."""
    d1 = build_d1(d)
    matrix = shift_operator(2 * d, "global_T2").matrix().entries @ d1.matrix
    return MeasurementBasis("D2", matrix, _support_of(matrix))


def build_basis(name: str, d: int) -> MeasurementBasis:
    builders = {"B0": build_b0, "C1": build_c1, "D1": build_d1, "D2": build_d2}
    if name not in builders:
        raise BasisError(f"Unknown basis '{name}', expected one of {BASIS_NAMES}")
    return builders[name](d)


def element_outcome_label(d: int, element: int) -> int:
    """
    Measured label at which the protocol circuits report basis element 4k + r.

    Member r of group k is read out with ancilla bit r // 2 and last data bit
    r % 2, the remaining data bits spelling k.
    """
    k, r = divmod(element, 4)
    return (r >> 1) * d + 2 * k + (r & 1)


def outcome_element_index(d: int, outcome: int) -> int:
    ancilla, data = divmod(outcome, d)
    k, bit = divmod(data, 2)
    return 4 * k + 2 * ancilla + bit


def shift_operator(dim: int, kind: str) -> ShiftOperator:
    """
    Build a label permutation.

    Args:
        dim: Number of labels, a power of two
        kind: conditional_T1 (cyclic shift of the upper half only), global_T2
            or increment (k -> k+1 mod dim), or decrement

    Returns:
        ShiftOperator whose matrix is a permutation matrix
    """
    if dim < 2 or dim & (dim - 1):
        raise BasisError(f"Shift dimension must be a power of two >= 2, got {dim}")
    labels = range(dim)

    if kind in ("increment", "global_T2"):
        permutation = tuple((k + 1) % dim for k in labels)
    elif kind == "decrement":
        permutation = tuple((k - 1) % dim for k in labels)
    elif kind == "conditional_T1":
        d = dim // 2
        permutation = tuple(k if k < d else d + (k - d + 1) % d for k in labels)
    else:
        raise BasisError(f"Unknown shift kind '{kind}', expected one of {SHIFT_KINDS}")

    return ShiftOperator(dim, kind, permutation)


def basis_unitary(basis: MeasurementBasis) -> GateMatrix:
    """Unitary whose k-th column is the k-th basis element."""
    return GateMatrix(basis.matrix, name=f"U_{basis.name}")


def achievable_outcome_count(basis: MeasurementBasis, ancilla_bit: int) -> int:
    """
    Number of elements a state prepared with the given ancilla bit can collapse into.
    Counts elements whose support meets the labels of that ancilla block.
    """
    if ancilla_bit not in (0, 1):
        raise BasisError(f"Ancilla bit must be 0 or 1, got {ancilla_bit}")
    low, high = ancilla_bit * basis.d, (ancilla_bit + 1) * basis.d
    return sum(1 for labels in basis.support if any(low <= label < high for label in labels))


@lru_cache(maxsize=None)
def u2_matrix() -> GateMatrix:
    """4-point Fourier transform on (ancilla, last data qubit), ancilla most significant."""
    rows, cols = np.meshgrid(range(4), range(4), indexing='ij')
    return GateMatrix(np.array([1, 1j, -1, -1j])[(rows * cols) % 4] / 2, name="U2")


@lru_cache(maxsize=None)
def u3_matrix() -> GateMatrix:
    """3-point Fourier transform on the first three two-qubit labels, label 3 fixed."""
    entries = np.zeros((4, 4), dtype=complex)
    roots = np.array([1.0, W, W.conjugate()])
    for row in range(3):
        for col in range(3):
            entries[row, col] = roots[(row * col) % 3] / np.sqrt(3)
    entries[3, 3] = 1.0
    return GateMatrix(entries, name="U3")


@lru_cache(maxsize=None)
def v1_matrix() -> GateMatrix:
    entries = np.array([
        [np.exp(1j * np.pi / 6), np.exp(-1j * np.pi / 6)],
        [np.exp(-1j * np.pi / 3), np.exp(1j * np.pi / 3)],
    ]) / np.sqrt(2)
    return GateMatrix(entries, name="V1")


@lru_cache(maxsize=None)
def v2_matrix() -> GateMatrix:
    entries = np.array([
        [np.sqrt(2), 1.0],
        [1.0, -np.sqrt(2)],
    ]) / np.sqrt(3)
    return GateMatrix(entries, name="V2")


def u_rotation(theta: float, phi: float, lam: float) -> np.ndarray:
    """Generic single-qubit rotation U(theta, phi, lambda) in the OpenQASM convention."""
    cos, sin = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([
        [cos, -np.exp(1j * lam) * sin],
        [np.exp(1j * phi) * sin, np.exp(1j * (phi + lam)) * cos],
    ])
