"""
Reconstruct Module
Amplitude and phase estimation from measurement counts.

Amplitudes come from the Z setting (a_k = sqrt(n_k / M)). Each phase
setting yields, per group, the cosine and a second interference term of
one neighbouring phase difference; the differences are chained from
theta_0 = 0.
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from modules.bases import element_outcome_label
from modules.counts_io import Counts, parse_counts
from modules.errors import ReconstructionError, StateError
from modules.statevector import PureState, fidelity, make_state

logger = logging.getLogger(__name__)

ESTIMATORS = ("raw", "normalized")
DEFAULT_CONDITIONING_FLOOR = 1e-6
CLAMP_TOLERANCE = 1e-12


def wrap_phase(angle: float) -> float:
    """Reduce an angle to [-pi, pi)."""
    return float((angle + np.pi) % (2 * np.pi) - np.pi)


@dataclass(frozen=True)
class PhasePairEstimate:
    """
    Estimate of theta_{pair[1]} - theta_{pair[0]} from one group of one setting.

    cos_raw and sin_raw are the unnormalized estimates; `delta` is what
    the phase chain uses.
    """

    pair: Tuple[int, int]
    cos_raw: float
    sin_raw: float
    clamped: bool
    delta: float
    conditioning: float
    setting: str = ""
    undetermined: bool = False

    @property
    def norm_defect(self) -> float:
        if self.undetermined:
            return 0.0
        return abs(math.hypot(self.cos_raw, self.sin_raw) - 1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair": [int(label) for label in self.pair],
            "setting": self.setting,
            "cos_raw": float(self.cos_raw),
            "sin_raw": float(self.sin_raw),
            "delta": float(self.delta),
            "conditioning": float(self.conditioning),
            "clamped": bool(self.clamped),
            "undetermined": bool(self.undetermined),
            "norm_defect": float(self.norm_defect),
        }


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    amplitudes: np.ndarray
    phases: np.ndarray
    pair_diagnostics: Tuple[PhasePairEstimate, ...]
    wrap_residual: float
    estimate: PureState
    untrusted: Tuple[bool, ...] = ()
    protocol: int = 0
    estimator: str = "raw"
    closure: Optional[PhasePairEstimate] = None

    @property
    def d(self) -> int:
        return len(self.amplitudes)

    def fidelity_to(self, target: PureState) -> float:
        return fidelity(self.estimate, target)

    def setting_defects(self) -> Dict[str, float]:
        """Mean norm defect of the pairs contributed by each setting."""
        grouped: Dict[str, List[float]] = {}
        for estimate in self.pair_diagnostics:
            if not estimate.undetermined:
                grouped.setdefault(estimate.setting, []).append(estimate.norm_defect)
        return {setting: float(np.mean(values)) for setting, values in grouped.items()}

    def most_discrepant_setting(self) -> Optional[str]:
        defects = self.setting_defects()
        if not defects:
            return None
        return max(defects, key=defects.get)

    def to_dict(self, target: Optional[PureState] = None) -> Dict[str, Any]:
        payload = {
            "protocol": int(self.protocol),
            "estimator": self.estimator,
            "amplitudes": [float(a) for a in self.amplitudes],
            "phases": [float(t) for t in self.phases],
            "untrusted": [bool(flag) for flag in self.untrusted],
            "wrap_residual": float(self.wrap_residual),
            "pairs": [p.to_dict() for p in self.pair_diagnostics],
            "closure": self.closure.to_dict() if self.closure else None,
            "most_discrepant_setting": self.most_discrepant_setting(),
            "estimate": {
                "real": [float(z.real) for z in self.estimate.amplitudes],
                "imag": [float(z.imag) for z in self.estimate.amplitudes],
            },
        }
        if target is not None:
            payload["fidelity"] = float(self.fidelity_to(target))
        return payload


def _data_dim(z_counts: Counts) -> int:
    size = z_counts.n_outcomes or (max(z_counts.frequencies, default=0) + 1)
    d = 2
    while d < size:
        d *= 2
    return d


def estimate_amplitudes(z_counts: Counts, d: Optional[int] = None) -> np.ndarray:
    """
    a_k = sqrt(n_k / M) from canonical-basis counts of the data register.

    Args:
        z_counts: Z-setting counts; M is the declared shot count
        d: Number of data labels, inferred from the counts when omitted

    Returns:
        Nonnegative amplitude vector of length d
    """
    d = d or _data_dim(z_counts)
    if z_counts.total <= 0:
        raise ReconstructionError(f"Setting '{z_counts.setting_label}' holds no counts")
    if any(outcome >= d for outcome in z_counts.frequencies):
        raise ReconstructionError(f"Z outcome {max(z_counts.frequencies)} outside 0..{d - 1}")
    return np.sqrt(np.array([z_counts.probability(k) for k in range(d)]))


def _pair_estimate(pair: Tuple[int, int], probs_z: np.ndarray, phase_counts: Counts, group: int,
                   factor: int, estimator: str, floor: float, strict: bool) -> PhasePairEstimate:
    d = len(probs_z)
    p_first, p_second = probs_z[pair[0]], probs_z[pair[1]]
    conditioning = math.sqrt(p_first * p_second)
    setting = phase_counts.setting_label

    if conditioning < floor:
        message = f"Pair {pair} in '{setting}' undetermined: conditioning {conditioning:.2e} below {floor:.0e}"
        if strict:
            raise ReconstructionError(message)
        logger.warning(message)
        return PhasePairEstimate(pair, 0.0, 0.0, False, 0.0, conditioning, setting, undetermined=True)

    def interference(element: int) -> float:
        p_outcome = phase_counts.probability(element_outcome_label(d, element))
        return (factor * p_outcome - p_first - p_second) / (2 * conditioning)

    cos_raw = interference(4 * group)
    second = interference(4 * group + 1)
    if factor == 4:
        sin_raw = second
    else:
        # second = cos(delta - 2pi/3) = -cos/2 + sqrt(3) sin/2
        sin_raw = (2 * second + cos_raw) / math.sqrt(3)

    clamped = bool(max(abs(cos_raw), abs(sin_raw)) > 1.0 + CLAMP_TOLERANCE)
    cos_used, sin_used = cos_raw, sin_raw
    if estimator == "normalized":
        if factor == 3:
            cos_used = float(np.clip(cos_raw, -1.0, 1.0))
            sin_used = (2 * float(np.clip(second, -1.0, 1.0)) + cos_used) / math.sqrt(3)
        norm = math.hypot(cos_used, sin_used)
        if norm > 1.0:
            cos_used, sin_used = cos_used / norm, sin_used / norm
    if clamped:
        logger.warning(f"Pair {pair} in '{setting}' left the unit disc: cos {cos_raw:.4f}, sin {sin_raw:.4f}")

    delta = wrap_phase(math.atan2(sin_used, cos_used))
    logger.debug(f"Pair {pair} ({setting}): cos {cos_raw:.6f} sin {sin_raw:.6f} delta {delta:.6f}")
    return PhasePairEstimate(pair, float(cos_raw), float(sin_raw), clamped, delta, conditioning, setting)


def _check_phase_counts(counts: Counts, d: int):
    if counts.n_outcomes is not None and counts.n_outcomes != 2 * d:
        raise ReconstructionError(
            f"Setting '{counts.setting_label}' has {counts.n_outcomes} outcomes, expected {2 * d}"
        )
    if any(outcome >= 2 * d for outcome in counts.frequencies):
        raise ReconstructionError(f"Setting '{counts.setting_label}' lists outcomes beyond {2 * d - 1}")


def _chain(amplitudes: np.ndarray, estimates: Dict[int, PhasePairEstimate]) -> Tuple[np.ndarray, Tuple[bool, ...]]:
    d = len(amplitudes)
    phases = np.zeros(d)
    untrusted = [False] * d
    for k in range(d - 1):
        estimate = estimates[k]
        phases[k + 1] = wrap_phase(phases[k] + estimate.delta)
        untrusted[k + 1] = bool(untrusted[k] or estimate.undetermined)
    return phases, tuple(untrusted)


def _validate_options(estimator: str):
    if estimator not in ESTIMATORS:
        raise ReconstructionError(f"Unknown estimator '{estimator}', expected one of {ESTIMATORS}")


def phases_protocol1(c1_counts_phi0: Counts, c1_counts_phi1: Counts, z_counts: Counts,
                     estimator: str = "raw", conditioning_floor: float = DEFAULT_CONDITIONING_FLOOR,
                     strict: bool = False) -> ReconstructionResult:
    """
    Reconstruct from C1 counts with ancilla 0 and ancilla 1.

    The ancilla-0 run gives the differences theta_{2k+1} - theta_{2k}, the
    ancilla-1 run theta_{2k+2} - theta_{2k+1}. Its last group closes the
    chain from d-1 back to 0; that pair only feeds wrap_residual.

    Args:
        c1_counts_phi0: C1 counts with the ancilla prepared in |0>
        c1_counts_phi1: C1 counts with the ancilla prepared in |1>
        z_counts: Canonical-basis counts of the data register
        estimator: "raw" (atan2 of the raw pair) or "normalized"
        conditioning_floor: Pairs with sqrt(P_k P_{k+1}) below it are undetermined
        strict: Raise instead of flagging undetermined pairs

    Returns:
        ReconstructionResult with theta_0 = 0
    """
    _validate_options(estimator)
    amplitudes = estimate_amplitudes(z_counts)
    d = len(amplitudes)
    for counts in (c1_counts_phi0, c1_counts_phi1):
        _check_phase_counts(counts, d)
    probs_z = amplitudes ** 2

    estimates: Dict[int, PhasePairEstimate] = {}
    closure = None
    for k in range(d // 2):
        estimates[2 * k] = _pair_estimate((2 * k, 2 * k + 1), probs_z, c1_counts_phi0, k, 4,
                                          estimator, conditioning_floor, strict)
        pair = (2 * k + 1, (2 * k + 2) % d)
        estimate = _pair_estimate(pair, probs_z, c1_counts_phi1, k, 4, estimator, conditioning_floor, strict)
        if pair[1] == 0:
            closure = estimate
        else:
            estimates[2 * k + 1] = estimate

    phases, untrusted = _chain(amplitudes, estimates)
    wrap_residual = 0.0
    if d >= 4 and closure is not None and not closure.undetermined:
        wrap_residual = abs(wrap_phase(phases[0] - phases[d - 1] - closure.delta))

    return _result(amplitudes, phases, estimates, wrap_residual, untrusted, 1, estimator, closure)


def phases_protocol2(d1_counts: Counts, d2_counts: Counts, z_counts: Counts,
                     estimator: str = "raw", conditioning_floor: float = DEFAULT_CONDITIONING_FLOOR,
                     strict: bool = False) -> ReconstructionResult:
    """
    Reconstruct from D1 and D2 counts, both with the ancilla in |0>.

    Each group gives cos(delta) and cos(delta - 2pi/3), inverted to
    sin(delta) = (2 cos(delta - 2pi/3) + cos(delta)) / sqrt(3). D1 covers the
    even-to-odd differences, D2 the odd-to-even ones; the last D2 group
    straddles the ancilla boundary and is skipped.
    """
    _validate_options(estimator)
    amplitudes = estimate_amplitudes(z_counts)
    d = len(amplitudes)
    for counts in (d1_counts, d2_counts):
        _check_phase_counts(counts, d)
    probs_z = amplitudes ** 2

    estimates: Dict[int, PhasePairEstimate] = {}
    for k in range(d // 2):
        estimates[2 * k] = _pair_estimate((2 * k, 2 * k + 1), probs_z, d1_counts, k, 3,
                                          estimator, conditioning_floor, strict)
    for k in range(d // 2 - 1):
        estimates[2 * k + 1] = _pair_estimate((2 * k + 1, 2 * k + 2), probs_z, d2_counts, k, 3,
                                              estimator, conditioning_floor, strict)

    phases, untrusted = _chain(amplitudes, estimates)
    return _result(amplitudes, phases, estimates, 0.0, untrusted, 2, estimator, None)


def _result(amplitudes, phases, estimates, wrap_residual, untrusted, protocol, estimator, closure):
    ordered = tuple(estimates[k] for k in sorted(estimates))
    clamped = sum(1 for e in ordered if e.clamped)
    undetermined = sum(1 for e in ordered if e.undetermined)
    logger.info(f"Protocol {protocol} reconstruction: d={len(amplitudes)}, {clamped} pairs off the unit disc, "
                f"{undetermined} undetermined, wrap residual {wrap_residual:.2e}")
    return ReconstructionResult(
        amplitudes=amplitudes,
        phases=phases,
        pair_diagnostics=ordered,
        wrap_residual=float(wrap_residual),
        estimate=assemble_state(amplitudes, phases),
        untrusted=untrusted,
        protocol=protocol,
        estimator=estimator,
        closure=closure,
    )


def assemble_state(amplitudes: Sequence[float], phases: Sequence[float]) -> PureState:
    """Unit-norm state with components a_k e^{i theta_k}."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    phases = np.asarray(phases, dtype=float)
    if amplitudes.shape != phases.shape:
        raise ReconstructionError(f"{amplitudes.size} amplitudes but {phases.size} phases")
    if np.any(amplitudes < 0):
        raise ReconstructionError("Amplitudes must be nonnegative")
    if not np.any(amplitudes > 0):
        raise ReconstructionError("Cannot assemble a state from all-zero amplitudes")
    try:
        return make_state(amplitudes * np.exp(1j * phases), normalize=True)
    except StateError as e:
        raise ReconstructionError(str(e)) from e


def decompose_state(state: PureState) -> Tuple[np.ndarray, np.ndarray]:
    """Amplitudes and phases of a state with its global phase rotated so theta_0 = 0."""
    amplitudes = np.abs(state.amplitudes)
    reference = np.angle(state.amplitudes[0]) if amplitudes[0] > 0 else 0.0
    phases = np.array([wrap_phase(np.angle(z) - reference) for z in state.amplitudes])
    phases[0] = 0.0
    return amplitudes, phases


def parse_counts_file(text: str, n_outcomes: Optional[int] = None) -> Counts:
    """Ingest a counts document (decimal or bitstring outcome keys)."""
    return parse_counts(text, n_outcomes)


def tangent_fraction(z_counts: Counts, phase_counts: Counts, group: int = 0,
                     ancilla_bit: int = 0) -> Tuple[int, int]:
    """
    Integer numerator and denominator of tan(delta) for one C1 group.

    With equal shot counts this is (4 n_sin - n_a - n_b, 4 n_cos - n_a - n_b),
    n_a and n_b being the Z counts of the pair; unequal shot counts are
    cross-multiplied. Nothing is reduced.
    """
    if z_counts.is_exact or phase_counts.is_exact:
        raise ReconstructionError("Tangent fractions need integer counts")
    d = _data_dim(z_counts)
    first = 2 * group + ancilla_bit
    second = (first + 1) % d
    z_sum = z_counts.count(first) + z_counts.count(second)
    n_cos = phase_counts.count(element_outcome_label(d, 4 * group))
    n_sin = phase_counts.count(element_outcome_label(d, 4 * group + 1))

    if z_counts.shots == phase_counts.shots:
        return int(4 * n_sin - z_sum), int(4 * n_cos - z_sum)
    m_z, m_p = z_counts.shots, phase_counts.shots
    return int(4 * n_sin * m_z - z_sum * m_p), int(4 * n_cos * m_z - z_sum * m_p)


def parse_target_state(text: str) -> PureState:
    """
    Read a target state document.

    Accepts {"real": [...], "imag": [...]} or {"amplitudes": [...]} where each
    amplitude is a number or a [re, im] pair. The vector is renormalized.
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ReconstructionError(f"Malformed target state JSON: {e}") from e
    if not isinstance(payload, dict):
        raise ReconstructionError("Target state document must be a JSON object")

    if "real" in payload:
        real = np.asarray(payload["real"], dtype=float)
        imag = np.asarray(payload.get("imag", np.zeros_like(real)), dtype=float)
        if real.shape != imag.shape:
            raise ReconstructionError("Target 'real' and 'imag' lengths differ")
        vector = real + 1j * imag
    elif "amplitudes" in payload:
        vector = np.array([complex(*z) if isinstance(z, list) else complex(z) for z in payload["amplitudes"]])
    else:
        raise ReconstructionError("Target state needs 'real'/'imag' or 'amplitudes'")

    try:
        return make_state(vector, normalize=True)
    except StateError as e:
        raise ReconstructionError(f"Invalid target state: {e}") from e
