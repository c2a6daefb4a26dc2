"""
QASM Module
OpenQASM 2.0 emission for protocol circuits against the qelib1 gate set.

Multi-controlled X with three or more controls is expanded without extra
qubits: H on the target around a recursively split multi-controlled phase.
"""

import logging
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from modules.circuits import Circuit, Gate
from modules.errors import CircuitError

logger = logging.getLogger(__name__)

HEADER = ('OPENQASM 2.0;', 'include "qelib1.inc";')
V1_PARAMS = (np.pi / 2, -np.pi / 2, 2 * np.pi / 3)
# V1 equals U(pi/2, -pi/2, 2pi/3) times e^{i pi/6}; the phase matters once controlled
V1_GLOBAL_PHASE = np.pi / 6
V2_PARAMS = (2 * np.arccos(np.sqrt(2 / 3)), 0.0, np.pi)


def format_angle(angle: float) -> str:
    """Render an angle as a multiple of pi when it is one, else as a float."""
    if abs(angle) < 1e-15:
        return "0"
    ratio = Fraction(angle / np.pi).limit_denominator(1 << 12)
    if abs(float(ratio) * np.pi - angle) > 1e-12:
        return repr(float(angle))

    num, den = ratio.numerator, ratio.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    head = f"{sign}pi" if num == 1 else f"{sign}{num}*pi"
    return head if den == 1 else f"{head}/{den}"


def _q(qubit: int) -> str:
    return f"q[{qubit}]"


def _mcp(angle: float, controls: Sequence[int], target: int) -> List[str]:
    """Phase `angle` on |1...1>|1>, split on the last control."""
    if not controls:
        return [f"u1({format_angle(angle)}) {_q(target)};"]
    if len(controls) == 1:
        return [f"cu1({format_angle(angle)}) {_q(controls[0])},{_q(target)};"]

    *rest, last = controls
    lines = [f"cu1({format_angle(angle / 2)}) {_q(last)},{_q(target)};"]
    lines += _mcx(rest, last)
    lines.append(f"cu1({format_angle(-angle / 2)}) {_q(last)},{_q(target)};")
    lines += _mcx(rest, last)
    lines += _mcp(angle / 2, rest, target)
    return lines


def _mcx(controls: Sequence[int], target: int) -> List[str]:
    if not controls:
        return [f"x {_q(target)};"]
    if len(controls) == 1:
        return [f"cx {_q(controls[0])},{_q(target)};"]
    if len(controls) == 2:
        return [f"ccx {_q(controls[0])},{_q(controls[1])},{_q(target)};"]
    return [f"h {_q(target)};"] + _mcp(np.pi, controls, target) + [f"h {_q(target)};"]


def _u_params(params) -> str:
    return ",".join(format_angle(p) for p in params)


def _gate_lines(gate: Gate) -> List[str]:
    target = gate.targets[0]
    controls = gate.controls
    count = len(controls)

    if gate.kind == "x":
        return _mcx(controls, target)
    if gate.kind in ("sdg", "phase"):
        angle = -np.pi / 2 if gate.kind == "sdg" else gate.angle
        if gate.kind == "sdg" and count == 0:
            return [f"sdg {_q(target)};"]
        return _mcp(angle, controls, target)
    if gate.kind == "h" and count <= 1:
        return [f"h {_q(target)};"] if count == 0 else [f"ch {_q(controls[0])},{_q(target)};"]
    if gate.kind == "v1" and count <= 1:
        if count == 0:
            return [f"u({_u_params(V1_PARAMS)}) {_q(target)};"]
        params = _u_params(V1_PARAMS + (V1_GLOBAL_PHASE,))
        return [f"cu({params}) {_q(controls[0])},{_q(target)};"]
    if gate.kind == "v2" and count <= 1:
        if count == 0:
            return [f"u({_u_params(V2_PARAMS)}) {_q(target)};"]
        return [f"cu({_u_params(V2_PARAMS + (0.0,))}) {_q(controls[0])},{_q(target)};"]

    raise CircuitError(f"Gate '{gate.label or gate.kind}' with {count} controls has no qelib1 expression")


def emit_qasm(circuit: Circuit, measure: bool = False) -> str:
    """
    Render a circuit as OpenQASM 2.0 text.

    Args:
        circuit: Circuit to emit; data qubit i becomes q[i], the ancilla q[N]
        measure: Append measurements, data q_i into c[N-1-i] and the ancilla
            into c[N], so the read-out bitstring c[N]..c[0] is the outcome label

    Returns:
        QASM text ending in a newline; identical circuits give identical text
    """
    n = circuit.n_qubits
    lines = list(HEADER)
    lines.append(f"qreg q[{n}];")
    lines.append(f"creg c[{n}];")

    for gate in circuit.gates:
        hollow = [c for c, v in zip(gate.controls, gate.control_values) if v == 0]
        flips = [f"x {_q(c)};" for c in hollow]
        lines += flips + _gate_lines(gate) + flips

    if measure:
        for qubit in range(circuit.n_data_qubits):
            lines.append(f"measure {_q(qubit)} -> c[{circuit.n_data_qubits - 1 - qubit}];")
        if circuit.has_ancilla:
            lines.append(f"measure {_q(circuit.ancilla)} -> c[{n - 1}];")

    logger.debug(f"Emitted {len(lines)} QASM lines for {circuit.name}")
    return "\n".join(lines) + "\n"
