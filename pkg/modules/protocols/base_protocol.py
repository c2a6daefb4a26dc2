"""
Base Protocol Module
Abstract base class for the tomography protocols.
"""

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from modules.bases import MeasurementBasis, achievable_outcome_count
from modules.circuits import Circuit, OutcomeMap, canonical_outcome_map, outcome_map
from modules.counts_io import Counts
from modules.errors import ReconstructionError
from modules.reconstruct import DEFAULT_CONDITIONING_FLOOR, ReconstructionResult


@dataclass(frozen=True)
class MeasurementSetting:
    """One projective measurement: a basis, the ancilla preparation and the circuit realizing it."""

    label: str
    basis: MeasurementBasis
    ancilla_bit: int
    circuit: Optional[Circuit]
    outcome_map: OutcomeMap

    def to_outcome_order(self, element_probabilities: np.ndarray) -> np.ndarray:
        """Reorder per-element probabilities into measured-label order."""
        return np.asarray(element_probabilities)[list(self.outcome_map.permutation)]


class BaseProtocol(ABC):
    """
    Abstract base class for all protocols.
    A protocol knows its measurement settings and how to turn their counts
    into a state estimate.
    """

    protocol_id = 0
    description = "Base protocol class"
    setting_labels: tuple = ()

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize the base protocol.

        Args:
            config: Configuration dictionary
        """
        self.config = config or {}
        self.logger = logging.getLogger(self.__class__.__name__)

        self.variant = self.config.get('circuits', {}).get('increment_variant', 'solid')
        reconstruction = self.config.get('reconstruction', {})
        self.default_estimator = reconstruction.get('estimator', 'raw')
        self.default_floor = reconstruction.get('conditioning_floor', DEFAULT_CONDITIONING_FLOOR)
        self.default_strict = reconstruction.get('strict', False)

        self._settings_lock = threading.Lock()
        self._settings_cache: Dict[int, List[MeasurementSetting]] = {}
        self.logger.debug(f"Initialized {self.__class__.__name__} ({self.variant} increment)")

    @abstractmethod
    def _build_settings(self, n_qubits: int) -> List[MeasurementSetting]:
        """Construct the phase settings for an N-qubit register."""

    @abstractmethod
    def _reconstruct(self, counts_by_label: Dict[str, Counts], estimator: str,
                     conditioning_floor: float, strict: bool) -> ReconstructionResult:
        """Run the protocol's phase estimator on validated counts."""

    def measurement_settings(self, n_qubits: int) -> List[MeasurementSetting]:
        """
        Phase settings for an N-qubit register, built once per N.

        Args:
            n_qubits: Number of data qubits

        Returns:
            Settings in measurement order
        """
        if n_qubits < 1:
            raise ReconstructionError(f"Protocols need at least one data qubit, got {n_qubits}")
        with self._settings_lock:
            if n_qubits not in self._settings_cache:
                self._settings_cache[n_qubits] = self._build_settings(n_qubits)
            return list(self._settings_cache[n_qubits])

    def _setting(self, label: str, basis: MeasurementBasis, ancilla_bit: int, circuit: Circuit) -> MeasurementSetting:
        return MeasurementSetting(label, basis, ancilla_bit, circuit, canonical_outcome_map(basis.d))

    def validate_counts(self, counts_by_label: Dict[str, Counts]):
        """
        Check that every required setting label is present.

        Raises:
            ReconstructionError: naming the missing labels
        """
        required = ("Z",) + tuple(self.setting_labels)
        missing = [label for label in required if label not in counts_by_label]
        if missing:
            self.logger.error(f"Missing required settings: {missing}")
            raise ReconstructionError(f"Protocol {self.protocol_id} needs settings {missing}")

    def reconstruct(self, counts_by_label: Dict[str, Counts], estimator: Optional[str] = None,
                    conditioning_floor: Optional[float] = None,
                    strict: Optional[bool] = None) -> ReconstructionResult:
        """
        Estimate the state from the counts of every setting.

        Args:
            counts_by_label: Counts keyed by setting label ("Z" plus the phase settings)
            estimator: "raw" or "normalized"; configured default when omitted
            conditioning_floor: Undetermined-pair threshold; configured default when omitted
            strict: Raise on undetermined pairs; configured default when omitted

        Returns:
            ReconstructionResult
        """
        self.validate_counts(counts_by_label)
        return self._reconstruct(
            counts_by_label,
            estimator or self.default_estimator,
            self.default_floor if conditioning_floor is None else conditioning_floor,
            self.default_strict if strict is None else strict,
        )

    def outcome_budget(self, d: int) -> int:
        """Outcomes a state can actually reach over the Z setting and all phase settings."""
        n_qubits = d.bit_length() - 1
        return d + sum(achievable_outcome_count(s.basis, s.ancilla_bit)
                       for s in self.measurement_settings(n_qubits))

    def verify_circuits(self, n_qubits: int) -> Dict[str, OutcomeMap]:
        """
        Factor every setting's circuit against its analytic basis.

        Raises:
            CircuitError: if a circuit fails to factor
            ReconstructionError: if it factors with a different outcome order
        """
        maps = {}
        for setting in self.measurement_settings(n_qubits):
            found = outcome_map(setting.circuit, setting.basis)
            if found.permutation != setting.outcome_map.permutation:
                raise ReconstructionError(f"Circuit for {setting.label} reports elements in an unexpected order")
            maps[setting.label] = found
        return maps
