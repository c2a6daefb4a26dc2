"""
Circuits Module
Gate-level circuits realizing the protocol measurements: increment/decrement
cascades, the two-qubit partial Fourier decompositions, unitary extraction
and the outcome-to-basis-element map.

Qubit indices: data qubits q_0..q_{N-1} are 0..N-1 and the ancilla is N.
In the simulated label space the ancilla is the most significant bit and
q_0 the most significant data bit.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from modules.bases import MeasurementBasis, outcome_element_index, v1_matrix, v2_matrix
from modules.errors import CircuitError
from modules.statevector import GateMatrix, PureState, apply_gate, apply_matrix

logger = logging.getLogger(__name__)

GATE_KINDS = ("x", "h", "sdg", "v1", "v2", "phase", "unitary")
INCREMENT_VARIANTS = ("solid", "hollow")
MAX_INCREMENT_QUBITS = 12
DEFAULT_MAX_UNITARY_QUBITS = 10
FACTOR_TOLERANCE = 1e-9

_FIXED_MATRICES = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "sdg": np.diag([1, -1j]),
}


@dataclass(frozen=True)
class Gate:
    """
    One circuit instruction. Controls with value 1 are solid, value 0 hollow.
    `matrix` is only read for the generic "unitary" kind; `angle` only for "phase".
    """

    kind: str
    targets: Tuple[int, ...]
    controls: Tuple[int, ...] = ()
    control_values: Tuple[int, ...] = ()
    angle: Optional[float] = None
    label: str = ""
    matrix: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"Unknown gate kind '{self.kind}'")
        object.__setattr__(self, 'targets', tuple(int(t) for t in self.targets))
        object.__setattr__(self, 'controls', tuple(int(c) for c in self.controls))
        values = tuple(int(v) for v in self.control_values) or (1,) * len(self.controls)
        if len(values) != len(self.controls):
            raise CircuitError(f"Gate {self.kind} has {len(self.controls)} controls but {len(values)} values")
        object.__setattr__(self, 'control_values', values)
        if self.kind == "phase" and self.angle is None:
            raise CircuitError("Phase gate needs an angle")
        if self.kind == "unitary" and self.matrix is None:
            raise CircuitError("Generic unitary gate needs a matrix")

    @property
    def qubits(self) -> Tuple[int, ...]:
        return self.controls + self.targets

    def gate_matrix(self) -> GateMatrix:
        if self.kind in _FIXED_MATRICES:
            return GateMatrix(_FIXED_MATRICES[self.kind], name=self.kind)
        if self.kind == "v1":
            return v1_matrix()
        if self.kind == "v2":
            return v2_matrix()
        if self.kind == "phase":
            return GateMatrix(np.diag([1.0, np.exp(1j * self.angle)]), name="phase")
        return GateMatrix(self.matrix, name=self.label or "unitary")

    def remapped(self, mapping: Dict[int, int]) -> 'Gate':
        return replace(self,
                       targets=tuple(mapping[t] for t in self.targets),
                       controls=tuple(mapping[c] for c in self.controls))


@dataclass(frozen=True)
class Circuit:
    """
    Ordered gate list over N data qubits plus an optional ancilla (index N).
    `shift_gates` counts the leading gates that form the shift stage.
    """

    n_data_qubits: int
    has_ancilla: bool
    gates: Tuple[Gate, ...]
    name: str = ""
    shift_gates: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))
        for gate in self.gates:
            if any(not 0 <= q < self.n_qubits for q in gate.qubits):
                raise CircuitError(f"Gate {gate.kind} on {gate.qubits} outside a {self.n_qubits}-qubit circuit")
            if len(set(gate.qubits)) != len(gate.qubits):
                raise CircuitError(f"Gate {gate.kind} reuses a qubit: {gate.qubits}")

    @property
    def n_qubits(self) -> int:
        return self.n_data_qubits + (1 if self.has_ancilla else 0)

    @property
    def ancilla(self) -> Optional[int]:
        return self.n_data_qubits if self.has_ancilla else None

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def position(self, qubit: int) -> int:
        """Bit position of a qubit in the label space (0 = most significant)."""
        if self.has_ancilla:
            return 0 if qubit == self.n_data_qubits else qubit + 1
        return qubit

    def __len__(self) -> int:
        return len(self.gates)

    def shift_stage(self) -> Tuple[Gate, ...]:
        return self.gates[:self.shift_gates]

    def fourier_stage(self) -> Tuple[Gate, ...]:
        return self.gates[self.shift_gates:]


@dataclass(frozen=True)
class OutcomeMap:
    """Measured label m reports basis element permutation[m] up to phases[m]."""

    permutation: Tuple[int, ...]
    phases: Tuple[complex, ...]
    residual: float = 0.0

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise CircuitError("Outcome permutation is not a bijection")
        if len(self.phases) != len(self.permutation):
            raise CircuitError("Outcome map needs one phase per outcome")

    def element_for(self, outcome: int) -> int:
        return self.permutation[outcome]

    def is_identity(self) -> bool:
        return all(m == e for m, e in enumerate(self.permutation))


def _decrement_gates(register: Sequence[int], variant: str) -> List[Gate]:
    """
    Decrement cascade on a register listed most significant first.

    solid: flip the last bit, then each higher bit when all bits below it
    read 1 after their flips. hollow: flip each bit, top down, when all bits
    below it read 0, then flip the last bit.
    """
    if variant not in INCREMENT_VARIANTS:
        raise CircuitError(f"Unknown increment variant '{variant}', expected one of {INCREMENT_VARIANTS}")
    n = len(register)
    gates = []
    if variant == "solid":
        gates.append(Gate("x", (register[-1],)))
        for t in range(n - 2, -1, -1):
            below = tuple(register[t + 1:])
            gates.append(Gate("x", (register[t],), below, (1,) * len(below)))
    else:
        for t in range(n - 1):
            below = tuple(register[t + 1:])
            gates.append(Gate("x", (register[t],), below, (0,) * len(below)))
        gates.append(Gate("x", (register[-1],)))
    return gates


def _shift_gates(register: Sequence[int], direction: int, variant: str) -> List[Gate]:
    gates = _decrement_gates(register, variant)
    # every gate is self-inverse, so reversing the cascade inverts it
    return gates if direction == -1 else list(reversed(gates))


def build_increment_circuit(n: int, direction: int = 1, variant: str = "solid") -> Circuit:
    """
    Modular increment (direction +1) or decrement (-1) on an n-qubit register.

    Args:
        n: Register size, 1 to 12
        direction: +1 or -1
        variant: "solid" or "hollow" multi-controlled-X cascade

    Returns:
        Circuit whose unitary is the permutation k -> (k + direction) mod 2^n
    """
    if not 1 <= n <= MAX_INCREMENT_QUBITS:
        raise CircuitError(f"Increment register size must be between 1 and {MAX_INCREMENT_QUBITS}, got {n}")
    if direction not in (1, -1):
        raise CircuitError(f"Direction must be +1 or -1, got {direction}")

    gates = _shift_gates(list(range(n)), direction, variant)
    name = "increment" if direction == 1 else "decrement"
    return Circuit(n, False, tuple(gates), name=f"{name}_{variant}_{n}", shift_gates=len(gates))


def u2_dagger_gates(ancilla: int, qubit: int) -> List[Gate]:
    """Inverse 4-point Fourier transform on (ancilla, qubit), ancilla most significant."""
    return [
        Gate("h", (ancilla,)),
        Gate("sdg", (ancilla,), (qubit,)),
        Gate("h", (qubit,)),
        Gate("x", (ancilla,), (qubit,)),
        Gate("x", (qubit,), (ancilla,)),
        Gate("x", (ancilla,), (qubit,)),
    ]


def u3_dagger_gates(ancilla: int, qubit: int, v1: Optional[np.ndarray] = None) -> List[Gate]:
    """
    Inverse 3-point partial Fourier transform on (ancilla, qubit).

    Args:
        ancilla: Most significant qubit of the two-qubit block
        qubit: Least significant qubit of the block
        v1: Replacement matrix for the controlled V1 step (used by negative controls)
    """
    controlled_v1 = (Gate("v1", (ancilla,), (qubit,)) if v1 is None
                     else Gate("unitary", (ancilla,), (qubit,), label="V1_override", matrix=np.asarray(v1)))
    return [
        Gate("x", (qubit,), (ancilla,)),
        controlled_v1,
        Gate("x", (qubit,), (ancilla,)),
        Gate("v2", (ancilla,), (qubit,), (0,)),
        Gate("h", (qubit,), (ancilla,), (0,)),
    ]


def build_protocol1_circuit(n_qubits: int, variant: str = "solid") -> Circuit:
    """
    Conditional shift followed by the inverse 4-point Fourier transform.

    The shift stage is X on the ancilla and a decrement of the register
    (q_0..q_{N-1}, ancilla) with the ancilla least significant, which
    decrements the data block only when the ancilla was set.
    """
    if n_qubits < 1:
        raise CircuitError(f"Protocol circuits need at least one data qubit, got {n_qubits}")
    ancilla = n_qubits
    shift = [Gate("x", (ancilla,))] + _decrement_gates(list(range(n_qubits)) + [ancilla], variant)
    gates = shift + u2_dagger_gates(ancilla, n_qubits - 1)

    logger.debug(f"Protocol 1 circuit for N={n_qubits} ({variant}): {len(gates)} gates")
    return Circuit(n_qubits, True, tuple(gates), name=f"protocol1_C1_N{n_qubits}", shift_gates=len(shift))


def build_protocol2_circuits(n_qubits: int, variant: str = "solid",
                             v1: Optional[np.ndarray] = None) -> Tuple[Circuit, Circuit]:
    """
    Circuits measuring D1 and D2.

    Returns:
        (D1 circuit, D2 circuit); D2 prepends a decrement of the whole
        register (ancilla most significant) to the D1 gates
    """
    if n_qubits < 1:
        raise CircuitError(f"Protocol circuits need at least one data qubit, got {n_qubits}")
    ancilla = n_qubits
    fourier = u3_dagger_gates(ancilla, n_qubits - 1, v1)
    shift = _decrement_gates([ancilla] + list(range(n_qubits)), variant)

    d1 = Circuit(n_qubits, True, tuple(fourier), name=f"protocol2_D1_N{n_qubits}")
    d2 = Circuit(n_qubits, True, tuple(shift + fourier), name=f"protocol2_D2_N{n_qubits}", shift_gates=len(shift))
    return d1, d2


def relabel(circuit: Circuit, mapping: Dict[int, int], n_data_qubits: Optional[int] = None) -> Circuit:
    """Move every gate onto new qubit indices."""
    n_data = circuit.n_data_qubits if n_data_qubits is None else n_data_qubits
    missing = {q for gate in circuit.gates for q in gate.qubits} - set(mapping)
    if missing:
        raise CircuitError(f"Relabel mapping misses qubits {sorted(missing)}")
    return Circuit(n_data, circuit.has_ancilla, tuple(g.remapped(mapping) for g in circuit.gates),
                   name=circuit.name, shift_gates=circuit.shift_gates)


def extend_protocol1_circuit(circuit: Circuit, variant: str = "solid") -> Circuit:
    """
    Grow an N-qubit protocol-1 circuit to N+1 qubits.

    The old qubits move up one index (the ancilla to N+1) and one X on the
    new q_0, controlled by every other qubit, joins the shift stage.
    """
    n = circuit.n_data_qubits
    mapping = {q: q + 1 for q in range(n + 1)}
    moved = relabel(circuit, mapping, n + 1)

    controls = tuple(range(1, n + 2))
    value = 1 if variant == "solid" else 0
    added = Gate("x", (0,), controls, (value,) * len(controls))
    # solid cascades finish on the most significant bit, hollow ones start there
    at = moved.shift_gates if variant == "solid" else 1
    gates = moved.gates[:at] + (added,) + moved.gates[at:]
    return Circuit(n + 1, True, gates, name=f"protocol1_C1_N{n + 1}", shift_gates=moved.shift_gates + 1)


def simulate(circuit: Circuit, state: PureState) -> PureState:
    """Apply every gate of the circuit to a state on the circuit's label space."""
    if state.n_qubits != circuit.n_qubits:
        raise CircuitError(f"{circuit.n_qubits}-qubit circuit cannot act on a {state.n_qubits}-qubit state")
    for gate in circuit.gates:
        state = apply_gate(state, gate.gate_matrix(),
                           [circuit.position(t) for t in gate.targets],
                           [circuit.position(c) for c in gate.controls],
                           gate.control_values)
    return state


def circuit_unitary(circuit: Circuit, max_qubits: int = DEFAULT_MAX_UNITARY_QUBITS) -> GateMatrix:
    """
    Full unitary of a circuit, gates multiplied in listed order.

    The identity is pushed through the same strided kernel that simulates
    states, one gate at a time.
    """
    if circuit.n_qubits > max_qubits:
        raise CircuitError(f"Unitary extraction capped at {max_qubits} qubits, circuit has {circuit.n_qubits}")

    unitary = np.eye(circuit.dim, dtype=complex)
    for gate in circuit.gates:
        unitary = apply_matrix(unitary, gate.gate_matrix().entries,
                               [circuit.position(t) for t in gate.targets],
                               circuit.n_qubits,
                               [circuit.position(c) for c in gate.controls],
                               gate.control_values)
    return GateMatrix(unitary, name=circuit.name or "circuit")


def factor_phase_permutation(unitary: np.ndarray, basis_matrix: np.ndarray,
                             tolerance: float = FACTOR_TOLERANCE) -> OutcomeMap:
    """
    Match every column of U^dagger to a basis column up to a unit phase.

    Args:
        unitary: Circuit unitary U (measurement happens after U)
        basis_matrix: Basis elements as columns
        tolerance: Allowed deviation of each matched overlap from modulus 1

    Returns:
        OutcomeMap with the largest column residual

    Raises:
        CircuitError: when some outcome matches no element or two outcomes
            match the same element
    """
    unitary = np.asarray(unitary)
    basis_matrix = np.asarray(basis_matrix)
    if unitary.shape != basis_matrix.shape:
        raise CircuitError(f"Circuit dimension {unitary.shape} does not match basis {basis_matrix.shape}")

    adjoint = unitary.conj().T
    overlaps = basis_matrix.conj().T @ adjoint
    elements = np.argmax(np.abs(overlaps), axis=0)
    columns = np.arange(unitary.shape[1])
    matched = overlaps[elements, columns]

    worst = float(np.max(np.abs(np.abs(matched) - 1.0)))
    if worst > tolerance:
        raise CircuitError(f"Circuit does not factor against the basis: overlap defect {worst:.3e}")
    if len(set(elements.tolist())) != len(elements):
        raise CircuitError("Circuit outcomes collide on the same basis element")

    phases = matched / np.abs(matched)
    residual = float(np.max(np.abs(adjoint - basis_matrix[:, elements] * phases[None, :])))
    if residual > tolerance:
        raise CircuitError(f"Circuit does not factor against the basis: residual {residual:.3e}")

    return OutcomeMap(tuple(int(e) for e in elements), tuple(complex(p) for p in phases), residual)


def canonical_outcome_map(d: int) -> OutcomeMap:
    """Outcome map every protocol circuit realizes, without extracting a unitary."""
    permutation = tuple(outcome_element_index(d, m) for m in range(2 * d))
    return OutcomeMap(permutation, (1.0 + 0j,) * (2 * d))


def outcome_map(circuit: Circuit, basis: MeasurementBasis) -> OutcomeMap:
    """Outcome-to-element map of a circuit measured in the canonical basis."""
    if circuit.dim != basis.dim:
        raise CircuitError(f"Circuit dimension {circuit.dim} does not match basis {basis.name} dimension {basis.dim}")
    mapping = factor_phase_permutation(circuit_unitary(circuit).entries, basis.matrix)
    logger.debug(f"{circuit.name} vs {basis.name}: residual {mapping.residual:.2e}")
    return mapping


def dump_unitary(unitary: GateMatrix) -> str:
    """Column-major text dump: a header line, then one "re im" line per entry."""
    entries = unitary.entries
    lines = [f"# {unitary.name} dim={entries.shape[0]} column-major"]
    lines += [f"{z.real:.17g} {z.imag:.17g}" for z in entries.T.ravel()]
    return "\n".join(lines) + "\n"


def load_unitary_dump(text: str) -> np.ndarray:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    values = np.array([float(re) + 1j * float(im) for re, im in rows])
    dim = int(round(np.sqrt(values.size)))
    if dim * dim != values.size:
        raise CircuitError(f"Unitary dump holds {values.size} entries, not a square matrix")
    return values.reshape(dim, dim).T
