"""
Verification Core Module
Self-check suite: basis orthonormality, circuit/basis factorization, the
extension rule, probability oracles and exact round trips.
"""

import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from modules.bases import build_c1, build_d1, build_d2, shift_operator, v1_matrix
from modules.circuits import (
    build_increment_circuit,
    build_protocol1_circuit,
    build_protocol2_circuits,
    canonical_outcome_map,
    circuit_unitary,
    extend_protocol1_circuit,
    outcome_map,
    simulate,
)
from modules.errors import TomographyError
from modules.protocols import get_protocol
from modules.sampling import NoisyPreparation, outcome_probabilities, run_protocol
from modules.statevector import haar_random_state, make_state

MAX_VERIFY_QUBITS = 6
MAX_INCREMENT_CHECK_QUBITS = 8
FACTOR_RESIDUAL_LIMIT = 1e-10
ORTHONORMAL_LIMIT = 1e-12
ROUND_TRIP_LIMIT = 1e-9
ORACLE_LIMIT = 1e-10
ZERO_COLLAPSE_LIMIT = 1e-14


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float
    detail: str = ""


class VerificationSuite:
    """
    Runs named checks, timing each one. A check returns a detail string on
    success and raises (or returns False) on failure.
    """

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        self.logger = logging.getLogger(__name__)
        verify = config.get('verify', {})
        self.haar_states = verify.get('haar_states', 10)
        self.seed = config.get('simulation', {}).get('default_seed', 0)
        self.variant = config.get('circuits', {}).get('increment_variant', 'solid')

    def _timed(self, name: str, check: Callable[[], Any]) -> CheckResult:
        start = time.perf_counter()
        try:
            outcome = check()
            passed = outcome is not False
            detail = outcome if isinstance(outcome, str) else ""
        except (TomographyError, AssertionError) as e:
            passed, detail = False, str(e)
        elapsed = time.perf_counter() - start

        if passed:
            self.logger.info(f"[PASS] {name} ({elapsed:.3f}s) {detail}")
        else:
            self.logger.error(f"[FAIL] {name} ({elapsed:.3f}s) {detail}")
        return CheckResult(name, passed, elapsed, detail)

    def run(self, max_n: int) -> List[CheckResult]:
        """
        Run every check for register sizes up to max_n.

        Args:
            max_n: Largest register size, 1 to 6

        Returns:
            One CheckResult per check, in execution order
        """
        if not 1 <= max_n <= MAX_VERIFY_QUBITS:
            raise TomographyError(f"Verification supports 1 <= max_n <= {MAX_VERIFY_QUBITS}, got {max_n}")
        self.logger.info(f"Running verification up to N={max_n}")

        checks = [
            ("bases_orthonormal", lambda: self.check_bases(max_n)),
            ("increment_permutation", lambda: self.check_increments(min(max_n + 1, MAX_INCREMENT_CHECK_QUBITS))),
            ("protocol1_factorization", lambda: self.check_protocol1_factorization(max_n)),
            ("protocol2_factorization", lambda: self.check_protocol2_factorization(max_n)),
            ("extension_rule", lambda: self.check_extension_rule(max_n)),
            ("zero_collapse", lambda: self.check_zero_collapse(max_n)),
            ("oracle_equivalence", lambda: self.check_oracle_equivalence(min(max_n, 4))),
            ("exact_round_trip", lambda: self.check_round_trip(max_n)),
            ("negative_control", lambda: self.check_negative_control(min(max_n, 3))),
        ]
        return [self._timed(name, check) for name, check in checks]

    def check_bases(self, max_n: int) -> str:
        worst = 0.0
        for n in range(1, max_n + 1):
            for builder in (build_c1, build_d1, build_d2):
                residual = builder(2 ** n).gram_residual()
                assert residual < ORTHONORMAL_LIMIT, f"{builder.__name__}(d={2 ** n}) Gram residual {residual:.2e}"
                worst = max(worst, residual)
        return f"max Gram residual {worst:.1e}"

    def check_increments(self, max_n: int) -> str:
        for n in range(1, max_n + 1):
            for direction, kind in ((1, "increment"), (-1, "decrement")):
                expected = shift_operator(2 ** n, kind).matrix().entries
                for variant in ("solid", "hollow"):
                    unitary = circuit_unitary(build_increment_circuit(n, direction, variant)).entries
                    deviation = float(np.max(np.abs(unitary - expected)))
                    assert deviation < 1e-12, f"{kind} n={n} ({variant}) deviates by {deviation:.2e}"
        return f"n=1..{max_n}, both variants"

    def check_protocol1_factorization(self, max_n: int) -> str:
        worst = 0.0
        for n in range(1, max_n + 1):
            found = outcome_map(build_protocol1_circuit(n, self.variant), build_c1(2 ** n))
            assert found.permutation == canonical_outcome_map(2 ** n).permutation, f"N={n}: unexpected outcome order"
            assert found.residual < FACTOR_RESIDUAL_LIMIT, f"N={n}: residual {found.residual:.2e}"
            worst = max(worst, found.residual)
        return f"max residual {worst:.1e}"

    def check_protocol2_factorization(self, max_n: int, v1: Optional[np.ndarray] = None) -> str:
        worst = 0.0
        for n in range(1, max_n + 1):
            d1_circuit, d2_circuit = build_protocol2_circuits(n, self.variant, v1)
            for circuit, basis in ((d1_circuit, build_d1(2 ** n)), (d2_circuit, build_d2(2 ** n))):
                found = outcome_map(circuit, basis)
                assert found.residual < FACTOR_RESIDUAL_LIMIT, f"{circuit.name}: residual {found.residual:.2e}"
                worst = max(worst, found.residual)
        return f"max residual {worst:.1e}"

    def check_extension_rule(self, max_n: int) -> str:
        checked = 0
        for n in range(2, max_n):
            grown = circuit_unitary(extend_protocol1_circuit(build_protocol1_circuit(n, self.variant), self.variant))
            direct = circuit_unitary(build_protocol1_circuit(n + 1, self.variant))
            deviation = float(np.max(np.abs(grown.entries - direct.entries)))
            assert deviation < 1e-12, f"N={n}->{n + 1}: unitaries differ by {deviation:.2e}"
            checked += 1
        return f"{checked} extensions"

    def check_zero_collapse(self, max_n: int) -> str:
        worst = 0.0
        for n in range(1, max_n + 1):
            d = 2 ** n
            for trial in range(self.haar_states):
                prep = NoisyPreparation(haar_random_state(n, seed=self.seed + trial))
                for basis in (build_d1(d), build_d2(d)):
                    probs = outcome_probabilities(prep, 0, basis)
                    for element in basis.kept_canonical():
                        if basis.support[element][0] >= d:
                            worst = max(worst, float(probs[element]))
        assert worst < ZERO_COLLAPSE_LIMIT, f"kept element probability {worst:.2e}"
        return f"max probability {worst:.1e}"

    def check_oracle_equivalence(self, max_n: int) -> str:
        """Projection probabilities against simulating the circuit on |ancilla>|phi>."""
        worst = 0.0
        for n in range(1, max_n + 1):
            d = 2 ** n
            for protocol_id in (1, 2):
                for setting in get_protocol(protocol_id, self.variant).measurement_settings(n):
                    for trial in range(self.haar_states):
                        phi = haar_random_state(n, seed=self.seed + 1000 + trial)
                        compound = np.zeros(2 * d, dtype=complex)
                        compound[setting.ancilla_bit * d:(setting.ancilla_bit + 1) * d] = phi.amplitudes
                        measured = simulate(setting.circuit, make_state(compound)).probabilities()
                        projected = setting.to_outcome_order(
                            outcome_probabilities(NoisyPreparation(phi), setting.ancilla_bit, setting.basis))
                        worst = max(worst, float(np.max(np.abs(measured - projected))))
        assert worst < ORACLE_LIMIT, f"probabilities differ by {worst:.2e}"
        return f"max deviation {worst:.1e}"

    def check_round_trip(self, max_n: int) -> str:
        worst = 0.0
        for n in range(1, max_n + 1):
            for protocol_id in (1, 2):
                protocol = get_protocol(protocol_id, self.variant)
                for trial in range(self.haar_states):
                    target = haar_random_state(n, seed=self.seed + trial)
                    z_counts, phase_counts = run_protocol(NoisyPreparation(target), protocol_id, 0)
                    counts = {"Z": z_counts, **{c.setting_label: c for c in phase_counts}}
                    infidelity = 1.0 - protocol.reconstruct(counts).fidelity_to(target)
                    worst = max(worst, infidelity)
        assert worst < ROUND_TRIP_LIMIT, f"worst infidelity {worst:.2e}"
        return f"worst infidelity {worst:.1e}"

    def check_negative_control(self, max_n: int) -> str:
        """A U3 decomposition with V1 transposed must be rejected."""
        try:
            self.check_protocol2_factorization(max_n, v1=v1_matrix().entries.T)
        except (TomographyError, AssertionError) as e:
            return f"rejected as expected: {e}"
        raise AssertionError("transposed V1 decomposition was accepted")
