"""
Sampling Module
Born-rule outcome probabilities of a white-noise preparation and seeded
multinomial shot sampling.

The noisy state (1-lam)|phi><phi| + (lam/d) I is never built as a matrix:
its statistics are the weighted sum of the ideal state's and those of the
d canonical data states.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from modules.bases import MeasurementBasis
from modules.counts_io import EXACT_SHOTS, Counts, exact_counts
from modules.errors import BasisError, CountsError, StateError
from modules.protocols import get_protocol
from modules.statevector import PureState

logger = logging.getLogger(__name__)

PROBABILITY_SUM_TOLERANCE = 1e-9
NEGATIVE_PROBABILITY_TOLERANCE = 1e-12

SeedLike = Union[int, Generator, None]


@dataclass(frozen=True)
class NoisyPreparation:
    """Ideal N-qubit state mixed with the maximally mixed state at weight lam."""

    ideal: PureState
    lam: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise StateError(f"Noise scale must lie in [0, 1], got {self.lam}")

    @property
    def n_qubits(self) -> int:
        return self.ideal.n_qubits

    @property
    def d(self) -> int:
        return self.ideal.dim


def setting_rng(seed: int, trial: int = 0, setting: int = 0) -> Generator:
    """Independent PCG64 stream for one (trial, setting) cell of a seeded run."""
    return Generator(PCG64(SeedSequence([int(seed), int(trial), int(setting)])))


def z_probabilities(prep: NoisyPreparation) -> np.ndarray:
    """Canonical-basis probabilities of the data register alone."""
    return (1.0 - prep.lam) * prep.ideal.probabilities() + prep.lam / prep.d


def outcome_probabilities(prep: NoisyPreparation, ancilla_bit: int, basis: MeasurementBasis) -> np.ndarray:
    """
    Probability of each basis element for |ancilla_bit>|phi> under white noise.

    Args:
        prep: Noisy N-qubit preparation
        ancilla_bit: 0 or 1, the ancilla value prepended to the data register
        basis: Basis on 2 * 2^N labels

    Returns:
        Vector of 2d probabilities indexed by basis element
    """
    d = prep.d
    if basis.dim != 2 * d:
        raise BasisError(f"Basis {basis.name} has dimension {basis.dim}, expected {2 * d}")
    if ancilla_bit not in (0, 1):
        raise BasisError(f"Ancilla bit must be 0 or 1, got {ancilla_bit}")

    block = basis.matrix[ancilla_bit * d:(ancilla_bit + 1) * d, :]
    ideal = np.abs(block.conj().T @ prep.ideal.amplitudes) ** 2
    if prep.lam == 0.0:
        return ideal
    mixed = np.sum(np.abs(block) ** 2, axis=0) / d
    return (1.0 - prep.lam) * ideal + prep.lam * mixed


def sample_counts(probs: np.ndarray, shots: int, seed: SeedLike = None, setting_label: str = "") -> Counts:
    """
    Draw a multinomial sample of `shots` outcomes.

    Args:
        probs: Outcome probabilities summing to 1 within 1e-9
        shots: Number of shots, at least 1
        seed: Integer seed or an existing Generator
        setting_label: Label carried by the returned Counts

    Returns:
        Counts over every outcome of `probs`
    """
    probs = np.asarray(probs, dtype=float)
    if shots < 1:
        raise CountsError(f"Sampling needs at least one shot, got {shots}")
    if np.any(probs < -NEGATIVE_PROBABILITY_TOLERANCE):
        raise CountsError(f"Negative probability {probs.min():.3e} in '{setting_label}'")
    if abs(probs.sum() - 1.0) > PROBABILITY_SUM_TOLERANCE:
        raise CountsError(f"Probabilities sum to {probs.sum():.12f} in '{setting_label}'")

    probs = np.clip(probs, 0.0, None)
    rng = seed if isinstance(seed, Generator) else np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs / probs.sum())
    return Counts(shots, {m: int(n) for m, n in enumerate(draws)}, setting_label, n_outcomes=len(probs))


def _measure(probs: np.ndarray, shots: int, rng: Generator, label: str) -> Counts:
    if shots == EXACT_SHOTS:
        return exact_counts(probs, label)
    return sample_counts(probs, shots, rng, label)


def run_protocol(prep: NoisyPreparation, protocol: int, shots_per_setting: int,
                 seed: int = 0, trial: int = 0) -> Tuple[Counts, List[Counts]]:
    """
    Produce the counts of every setting a protocol needs.

    Args:
        prep: Noisy preparation to measure
        protocol: 1 (C1 on both ancilla values) or 2 (D1 and D2)
        shots_per_setting: Shots per setting, EXACT_SHOTS for probabilities
        seed: Base seed; each setting draws from its own (seed, trial, setting) stream
        trial: Trial index within a sweep

    Returns:
        (Z counts over d outcomes, phase-setting counts over 2d measured labels)
    """
    if shots_per_setting < 0:
        raise CountsError(f"Shots per setting must be >= 0, got {shots_per_setting}")
    if prep.n_qubits < 1:
        raise StateError("Protocols need at least one data qubit")

    handler = get_protocol(protocol)
    settings = handler.measurement_settings(prep.n_qubits)

    z_counts = _measure(z_probabilities(prep), shots_per_setting, setting_rng(seed, trial, 0), "Z")
    phase_counts = []
    for index, setting in enumerate(settings, start=1):
        element_probs = outcome_probabilities(prep, setting.ancilla_bit, setting.basis)
        measured = setting.to_outcome_order(element_probs)
        phase_counts.append(_measure(measured, shots_per_setting, setting_rng(seed, trial, index), setting.label))

    logger.debug(f"Protocol {protocol}, N={prep.n_qubits}, lam={prep.lam}, shots={shots_per_setting}: "
                 f"{1 + len(phase_counts)} settings measured")
    return z_counts, phase_counts
