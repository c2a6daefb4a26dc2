"""
Conditional Shift Protocol Module
Protocol 1: one basis (C1) measured with the ancilla in |0> and in |1>.
"""

from typing import Dict, List

from modules.bases import build_c1
from modules.circuits import build_protocol1_circuit
from modules.counts_io import Counts
from modules.reconstruct import ReconstructionResult, phases_protocol1
from .base_protocol import BaseProtocol, MeasurementSetting


class ConditionalShiftProtocol(BaseProtocol):
    """
    C1 groups mix two neighbouring data labels with two labels of the
    conditionally shifted ancilla block, so ancilla |0> reads the even-to-odd
    phase differences and ancilla |1> the odd-to-even ones.
    """

    protocol_id = 1
    description = "Single basis C1 measured on |0>|phi> and |1>|phi>"
    setting_labels = ("C1_phi0", "C1_phi1")

    def _build_settings(self, n_qubits: int) -> List[MeasurementSetting]:
        basis = build_c1(2 ** n_qubits)
        circuit = build_protocol1_circuit(n_qubits, self.variant)
        return [
            self._setting("C1_phi0", basis, 0, circuit),
            self._setting("C1_phi1", basis, 1, circuit),
        ]

    def _reconstruct(self, counts_by_label: Dict[str, Counts], estimator: str,
                     conditioning_floor: float, strict: bool) -> ReconstructionResult:
        return phases_protocol1(
            counts_by_label["C1_phi0"], counts_by_label["C1_phi1"], counts_by_label["Z"],
            estimator=estimator, conditioning_floor=conditioning_floor, strict=strict,
        )
