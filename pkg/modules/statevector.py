"""
Statevector Module
Dense complex statevector representation, gate application, Haar-random
state generation, inner products and fidelity.

Basis-label convention: qubit position 0 is the most significant bit of the
basis index. Circuits place the ancilla at position 0 so that |j>|k> maps to
label j*d + k.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from modules.errors import GateError, StateError

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-9
UNITARITY_TOLERANCE = 1e-10
MAX_HAAR_QUBITS = 12


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and (value & (value - 1)) == 0


@dataclass(frozen=True, eq=False)
class PureState:
    """
    Unit-norm amplitude vector over 2^n_qubits basis labels.
    The amplitude array is read-only once the state is built.
    """

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.ndim != 1 or amplitudes.size != (1 << self.n_qubits):
            raise StateError(
                f"Amplitude vector of length {amplitudes.size} does not match {self.n_qubits} qubits"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise StateError(f"State norm {norm:.15f} differs from 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def probabilities(self) -> np.ndarray:
        """Born-rule probabilities of the canonical basis."""
        return np.abs(self.amplitudes) ** 2

    def with_global_phase(self, alpha: float) -> 'PureState':
        return PureState(self.n_qubits, np.exp(1j * alpha) * self.amplitudes)


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """
    Unitary acting on `arity` qubits, stored as a read-only 2^arity square matrix.
    The first target of a placement is the most significant bit of the row index.
    """

    entries: np.ndarray
    name: str = "unitary"
    arity: int = field(init=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise GateError(f"Gate '{self.name}' is not a square matrix: shape {entries.shape}")
        size = entries.shape[0]
        if not _is_power_of_two(size) or size < 2:
            raise GateError(f"Gate '{self.name}' dimension {size} is not a power of two")
        residual = np.max(np.abs(entries.conj().T @ entries - np.eye(size)))
        if residual > UNITARITY_TOLERANCE:
            raise GateError(f"Gate '{self.name}' is not unitary (residual {residual:.3e})")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)
        object.__setattr__(self, 'arity', size.bit_length() - 1)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> 'GateMatrix':
        return GateMatrix(self.entries.conj().T, name=f"{self.name}_dg")

    def unitarity_residual(self) -> float:
        return float(np.max(np.abs(self.entries.conj().T @ self.entries - np.eye(self.dim))))


def make_state(amplitudes: Sequence[complex], normalize: bool = False) -> PureState:
    """
    Build a PureState from a complex amplitude vector.

    Args:
        amplitudes: Vector whose length is a power of two >= 2
        normalize: Accept any nonzero norm instead of requiring norm 1 within 1e-9

    Returns:
        PureState renormalized to unit norm, global phase untouched
    """
    vector = np.asarray(amplitudes, dtype=complex).ravel()
    if vector.size < 2 or not _is_power_of_two(vector.size):
        raise StateError(f"State length {vector.size} is not a power of two >= 2")

    norm = np.linalg.norm(vector)
    if norm == 0.0:
        raise StateError("Cannot build a state from the zero vector")
    if not normalize and abs(norm - 1.0) > NORM_TOLERANCE:
        raise StateError(f"State norm {norm:.12f} is not within {NORM_TOLERANCE} of 1")

    return PureState(vector.size.bit_length() - 1, vector / norm)


def haar_random_state(n_qubits: int, seed: Optional[int] = None) -> PureState:
    """
    Draw a Haar-distributed pure state.

    Independent standard complex Gaussians, normalized, have the same
    distribution as a Haar unitary applied to |0...0>.

    Args:
        n_qubits: Register size, 1 to 12
        seed: Seed for numpy's default generator; fixed seed gives a fixed state

    Returns:
        Random PureState
    """
    if not 1 <= n_qubits <= MAX_HAAR_QUBITS:
        raise StateError(f"n_qubits must be between 1 and {MAX_HAAR_QUBITS}, got {n_qubits}")

    rng = np.random.default_rng(seed)
    dim = 1 << n_qubits
    vector = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return make_state(vector, normalize=True)


def _validate_placement(n_qubits: int, arity: int, targets: Sequence[int],
                        controls: Sequence[int], control_values: Sequence[int]):
    if len(targets) != arity:
        raise GateError(f"Gate of arity {arity} placed on {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise GateError(f"Duplicate targets {tuple(targets)}")
    if len(control_values) != len(controls):
        raise GateError("Every control needs a control value")
    if len(set(controls)) != len(controls) or set(controls) & set(targets):
        raise GateError(f"Controls {tuple(controls)} overlap each other or targets {tuple(targets)}")
    for qubit in list(targets) + list(controls):
        if not 0 <= qubit < n_qubits:
            raise GateError(f"Qubit position {qubit} outside a {n_qubits}-qubit register")


def apply_matrix(amplitudes: np.ndarray, matrix: np.ndarray, targets: Sequence[int], n_qubits: int,
                 controls: Sequence[int] = (), control_values: Sequence[int] = ()) -> np.ndarray:
    """
    Apply a 2^a x 2^a matrix to selected qubit positions of an amplitude array.

    The first axis of `amplitudes` is the basis label; extra axes are carried
    along, so a dim x dim identity yields the embedded unitary in one pass.
    Labels are grouped by masking out the target bits: each base label with
    all target bits clear (and all control bits at their required values)
    owns a 2^a block of strided labels that the matrix mixes.

    Returns:
        New array; the input is left untouched
    """
    dim = 1 << n_qubits
    weights = [1 << (n_qubits - 1 - position) for position in targets]
    target_mask = sum(weights)

    labels = np.arange(dim)
    selected = (labels & target_mask) == 0
    for position, value in zip(controls, control_values):
        bit_set = (labels & (1 << (n_qubits - 1 - position))) != 0
        selected &= bit_set == bool(value)
    base = labels[selected]

    arity = len(targets)
    offsets = np.zeros(1 << arity, dtype=np.int64)
    for sub_index in range(1 << arity):
        for j, weight in enumerate(weights):
            if (sub_index >> (arity - 1 - j)) & 1:
                offsets[sub_index] += weight

    gather = base[:, None] + offsets[None, :]
    result = np.array(amplitudes, dtype=complex, copy=True)
    result[gather] = np.einsum('ij,bj...->bi...', matrix, result[gather])
    return result


def apply_gate(state: PureState, gate: GateMatrix, targets: Sequence[int],
               controls: Sequence[int] = (), control_values: Optional[Sequence[int]] = None) -> PureState:
    """
    Apply a gate to the given target positions, optionally conditioned on controls.

    Args:
        state: Input state
        gate: Unitary whose arity equals len(targets)
        targets: Distinct qubit positions, first target = most significant gate index
        controls: Qubit positions the gate is conditioned on
        control_values: Required value (1 solid, 0 hollow) per control; defaults to all 1

    Returns:
        New PureState, identity on every non-target qubit
    """
    targets = tuple(int(t) for t in targets)
    controls = tuple(int(c) for c in controls)
    values = tuple(control_values) if control_values is not None else (1,) * len(controls)
    _validate_placement(state.n_qubits, gate.arity, targets, controls, values)

    amplitudes = apply_matrix(state.amplitudes, gate.entries, targets, state.n_qubits, controls, values)
    # renormalize away accumulated rounding; the unitary keeps the norm within 1e-12
    return PureState(state.n_qubits, amplitudes / np.linalg.norm(amplitudes))


def embed_gate(gate: GateMatrix, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """
    Dense 2^n x 2^n matrix of a placed gate, built by tensoring in the identity.
    Only used as an independent oracle for apply_gate.
    """
    targets = list(targets)
    _validate_placement(n_qubits, gate.arity, targets, (), ())
    others = [q for q in range(n_qubits) if q not in targets]
    order = targets + others

    full = np.kron(gate.entries, np.eye(1 << len(others)))
    inverse = list(np.argsort(order))
    tensor = full.reshape([2] * (2 * n_qubits))
    tensor = tensor.transpose(inverse + [n_qubits + i for i in inverse])
    return tensor.reshape(1 << n_qubits, 1 << n_qubits)


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b>."""
    if a.dim != b.dim:
        raise StateError(f"Dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: PureState, b: PureState) -> float:
    """
    Squared overlap |<a|b>|^2 between two pure states.

    Returns:
        Real value in [0, 1], symmetric and blind to global phases
    """
    overlap = abs(inner_product(a, b)) ** 2
    return float(min(max(overlap, 0.0), 1.0))
