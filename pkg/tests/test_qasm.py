"""Tests for OpenQASM 2.0 emission."""

import numpy as np
import pytest

from modules.circuits import Circuit, Gate, build_protocol1_circuit, build_protocol2_circuits
from modules.errors import CircuitError
from modules.qasm import emit_qasm, format_angle


class TestFormatAngle:
    """Angles print as pi fractions where possible."""

    @pytest.mark.parametrize("angle, text", [
        (0.0, "0"),
        (np.pi, "pi"),
        (-np.pi / 2, "-pi/2"),
        (2 * np.pi / 3, "2*pi/3"),
        (np.pi / 8, "pi/8"),
    ])
    def test_pi_fractions(self, angle, text):
        assert format_angle(angle) == text

    def test_irrational_multiple(self):
        assert format_angle(0.5) == "0.5"


class TestEmitQasm:
    """Whole-circuit emission."""

    def test_header(self):
        text = emit_qasm(build_protocol1_circuit(2))
        assert text.startswith('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\ncreg c[3];\n')

    def test_single_x(self):
        assert "x q[0];" in emit_qasm(Circuit(1, False, (Gate("x", (0,)),))).splitlines()

    def test_protocol2_rotation_parameters(self):
        text = emit_qasm(build_protocol2_circuits(2)[0])
        assert "cu(pi/2,-pi/2,2*pi/3,pi/6) q[1],q[2];" in text

    def test_deterministic(self):
        circuit = build_protocol2_circuits(3)[1]
        assert emit_qasm(circuit) == emit_qasm(circuit)

    def test_hollow_controls_are_wrapped(self):
        lines = emit_qasm(Circuit(2, False, (Gate("x", (0,), (1,), (0,)),))).splitlines()
        assert lines[-3:] == ["x q[1];", "cx q[1],q[0];", "x q[1];"]

    def test_many_controls_expand(self):
        text = emit_qasm(build_protocol1_circuit(3))
        assert "cu1(" in text
        assert all(not line.startswith("mcx") for line in text.splitlines())

    def test_measurement_order(self):
        lines = emit_qasm(build_protocol1_circuit(2), measure=True).splitlines()
        assert lines[-3:] == ["measure q[0] -> c[1];", "measure q[1] -> c[0];", "measure q[2] -> c[2];"]

    def test_unexpressible_gate(self):
        gate = Gate("unitary", (0,), (1,), label="custom", matrix=np.eye(2))
        with pytest.raises(CircuitError):
            emit_qasm(Circuit(2, False, (gate,)))
