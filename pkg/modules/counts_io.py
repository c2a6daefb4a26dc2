"""
Counts Module
Measurement counts per setting and their JSON form.

A Counts object with shots == EXACT_SHOTS holds outcome probabilities
instead of integer frequencies (infinite-shot mode).
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np

from modules.errors import CountsError

logger = logging.getLogger(__name__)

EXACT_SHOTS = 0
KEY_FORMATS = ("auto", "decimal", "bitstring")
_EXACT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Counts:
    """
    Outcome frequencies of one measurement setting.

    Outcomes missing from `frequencies` may still have occurred: the shots
    not accounted for are reported by `unlisted_shots`.
    """

    shots: int
    frequencies: Mapping[int, float]
    setting_label: str = ""
    n_outcomes: Optional[int] = None

    def __post_init__(self):
        if self.shots < 0:
            raise CountsError(f"Shot count must be nonnegative, got {self.shots}")
        frequencies = {int(k): v for k, v in dict(self.frequencies).items()}
        for outcome, value in frequencies.items():
            if outcome < 0 or (self.n_outcomes is not None and outcome >= self.n_outcomes):
                raise CountsError(f"Outcome {outcome} outside 0..{(self.n_outcomes or 0) - 1} in '{self.setting_label}'")
            if value < 0:
                raise CountsError(f"Negative count {value} for outcome {outcome} in '{self.setting_label}'")
            if not self.is_exact and float(value) != int(value):
                raise CountsError(f"Count {value} for outcome {outcome} is not an integer")

        total = sum(frequencies.values())
        limit = 1.0 + _EXACT_TOLERANCE if self.is_exact else self.shots
        if total > limit:
            raise CountsError(f"Counts in '{self.setting_label}' sum to {total}, above the declared {limit}")
        if not self.is_exact:
            frequencies = {k: int(v) for k, v in frequencies.items()}
        object.__setattr__(self, 'frequencies', dict(sorted(frequencies.items())))

    @property
    def is_exact(self) -> bool:
        return self.shots == EXACT_SHOTS

    @property
    def total(self) -> float:
        return sum(self.frequencies.values())

    @property
    def unlisted_shots(self) -> float:
        return (1.0 if self.is_exact else self.shots) - self.total

    @property
    def is_partial(self) -> bool:
        return self.unlisted_shots > (_EXACT_TOLERANCE if self.is_exact else 0)

    def count(self, outcome: int) -> float:
        return self.frequencies.get(outcome, 0)

    def probability(self, outcome: int) -> float:
        """n_k / M against the declared shots, or the stored probability in exact mode."""
        if self.is_exact:
            return float(self.frequencies.get(outcome, 0.0))
        return self.frequencies.get(outcome, 0) / self.shots

    def probabilities(self, length: Optional[int] = None) -> np.ndarray:
        size = length or self.n_outcomes or (max(self.frequencies, default=-1) + 1)
        return np.array([self.probability(m) for m in range(size)])

    def with_label(self, label: str) -> 'Counts':
        return Counts(self.shots, self.frequencies, label, self.n_outcomes)


def exact_counts(probabilities: np.ndarray, setting_label: str = "") -> Counts:
    """Wrap a probability vector as infinite-shot Counts."""
    probabilities = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    return Counts(EXACT_SHOTS, {m: float(p) for m, p in enumerate(probabilities)},
                  setting_label, n_outcomes=len(probabilities))


def _decode_key(key: str, key_format: str, bitstring_keys: bool) -> int:
    key = key.strip()
    try:
        if key_format != "decimal" and key.startswith("0b"):
            return int(key[2:], 2)
        if key_format == "bitstring" or (key_format == "auto" and bitstring_keys):
            # leftmost character is the ancilla, then q_0 ... q_{N-1}
            return int(key, 2)
        return int(key, 10)
    except ValueError as e:
        raise CountsError(f"Outcome key '{key}' is not a valid {key_format} index") from e


def _register_width(n_outcomes: Optional[int]) -> Optional[int]:
    if not isinstance(n_outcomes, int) or n_outcomes < 2 or n_outcomes & (n_outcomes - 1):
        return None
    return n_outcomes.bit_length() - 1


def counts_from_dict(payload: Dict[str, Any], n_outcomes: Optional[int] = None) -> Counts:
    """
    Validate a decoded counts document.

    Keys are decimal labels by default and "0b"-prefixed keys are always
    binary. In "auto" mode bare 0/1 keys are binary when every key is as
    wide as the register implied by the declared outcome count. Without a
    declared count they are binary only if all share one width and some
    key carries a leading zero, which no decimal label does.
    """
    if not isinstance(payload, dict):
        raise CountsError("Counts document must be a JSON object")
    for key in ("shots", "counts"):
        if key not in payload:
            raise CountsError(f"Counts document misses '{key}'")

    shots = payload["shots"]
    if not isinstance(shots, int) or isinstance(shots, bool) or shots < 0:
        raise CountsError(f"'shots' must be a nonnegative integer, got {shots!r}")
    raw = payload["counts"]
    if not isinstance(raw, dict):
        raise CountsError("'counts' must be an object mapping outcomes to frequencies")

    key_format = payload.get("key_format", "auto")
    if key_format not in KEY_FORMATS:
        raise CountsError(f"Unknown key_format '{key_format}'")
    declared = payload.get("n_outcomes", n_outcomes)
    width = _register_width(declared)
    keys = [str(k).strip() for k in raw]
    binary = bool(keys) and all(set(k) <= {"0", "1"} for k in keys)
    if width is not None:
        bitstring_keys = binary and all(len(k) == width for k in keys)
    else:
        bitstring_keys = (binary and len({len(k) for k in keys}) == 1 and len(keys[0]) >= 2
                          and any(k.startswith("0") for k in keys))

    frequencies = {}
    for key, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CountsError(f"Frequency for '{key}' must be a number, got {value!r}")
        outcome = _decode_key(str(key), key_format, bitstring_keys)
        if outcome in frequencies:
            raise CountsError(f"Outcome {outcome} listed twice")
        frequencies[outcome] = value

    counts = Counts(shots, frequencies, str(payload.get("setting", "")), declared)
    if counts.is_partial:
        logger.warning(f"Setting '{counts.setting_label}': {counts.unlisted_shots} shots fall on unlisted outcomes")
    return counts


def parse_counts(text: str, n_outcomes: Optional[int] = None) -> Counts:
    """Parse counts JSON text; see counts_from_dict for the key rules."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise CountsError(f"Malformed counts JSON: {e}") from e
    return counts_from_dict(payload, n_outcomes)


def counts_to_dict(counts: Counts) -> Dict[str, Any]:
    """Every outcome is written, zeros included, when the outcome count is known."""
    size = counts.n_outcomes or (max(counts.frequencies, default=-1) + 1)
    payload = {
        "shots": counts.shots,
        "setting": counts.setting_label,
        "counts": {str(m): counts.frequencies.get(m, 0) for m in range(size)},
    }
    if counts.n_outcomes is not None:
        payload["n_outcomes"] = counts.n_outcomes
    return payload


def serialize_counts(counts: Counts, indent: Optional[int] = 2) -> str:
    return json.dumps(counts_to_dict(counts), indent=indent)


def load_counts_file(path: str, n_outcomes: Optional[int] = None) -> Counts:
    with open(path, 'r') as f:
        return parse_counts(f.read(), n_outcomes)


def save_counts_file(counts: Counts, path: str):
    with open(path, 'w') as f:
        f.write(serialize_counts(counts) + "\n")
