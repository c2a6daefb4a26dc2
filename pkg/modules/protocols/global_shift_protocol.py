"""
Global Shift Protocol Module
Protocol 2: two bases (D1 and its global shift D2) measured with the ancilla in |0>.
"""

from typing import Dict, List

from modules.bases import build_d1, build_d2
from modules.circuits import build_protocol2_circuits
from modules.counts_io import Counts
from modules.reconstruct import ReconstructionResult, phases_protocol2
from .base_protocol import BaseProtocol, MeasurementSetting


class GlobalShiftProtocol(BaseProtocol):
    """Three-point Fourier groups; only the ancilla-|0> state is ever prepared."""

    protocol_id = 2
    description = "Bases D1 and D2 measured on |0>|phi>"
    setting_labels = ("D1", "D2")

    def _build_settings(self, n_qubits: int) -> List[MeasurementSetting]:
        d = 2 ** n_qubits
        d1_circuit, d2_circuit = build_protocol2_circuits(n_qubits, self.variant)
        return [
            self._setting("D1", build_d1(d), 0, d1_circuit),
            self._setting("D2", build_d2(d), 0, d2_circuit),
        ]

    def _reconstruct(self, counts_by_label: Dict[str, Counts], estimator: str,
                     conditioning_floor: float, strict: bool) -> ReconstructionResult:
        return phases_protocol2(
            counts_by_label["D1"], counts_by_label["D2"], counts_by_label["Z"],
            estimator=estimator, conditioning_floor=conditioning_floor, strict=strict,
        )
