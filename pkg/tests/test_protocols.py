"""Tests for the protocol classes, the protocol manager and the IBMQ regressions."""

import json

import numpy as np
import pytest

from core.protocol_manager import ProtocolManager
from modules.circuits import simulate
from modules.counts_io import Counts
from modules.errors import ReconstructionError
from modules.protocols import ConditionalShiftProtocol, GlobalShiftProtocol, get_protocol
from modules.sampling import NoisyPreparation, outcome_probabilities, run_protocol
from modules.statevector import haar_random_state, make_state


class TestMeasurementSettings:
    """Settings, circuits and outcome budgets."""

    def test_labels(self):
        assert [s.label for s in get_protocol(1).measurement_settings(2)] == ["C1_phi0", "C1_phi1"]
        assert [s.label for s in get_protocol(2).measurement_settings(2)] == ["D1", "D2"]

    def test_ancilla_bits(self):
        assert [s.ancilla_bit for s in get_protocol(1).measurement_settings(3)] == [0, 1]
        assert [s.ancilla_bit for s in get_protocol(2).measurement_settings(3)] == [0, 0]

    def test_settings_cached(self):
        protocol = ConditionalShiftProtocol({})
        assert protocol.measurement_settings(3)[0] is protocol.measurement_settings(3)[0]

    @pytest.mark.parametrize("d", [2, 4, 8, 16])
    def test_outcome_budget(self, d):
        assert get_protocol(1).outcome_budget(d) == 5 * d
        assert get_protocol(2).outcome_budget(d) == 4 * d + 1

    @pytest.mark.parametrize("protocol_id", [1, 2])
    @pytest.mark.parametrize("variant", ["solid", "hollow"])
    def test_circuits_verify(self, protocol_id, variant):
        maps = get_protocol(protocol_id, variant).verify_circuits(3)
        assert all(m.residual < 1e-10 for m in maps.values())

    def test_unknown_protocol(self):
        with pytest.raises(ReconstructionError):
            get_protocol(3)

    def test_zero_qubits(self):
        with pytest.raises(ReconstructionError):
            get_protocol(1).measurement_settings(0)


class TestOracleEquivalence:
    """Projection probabilities agree with simulating the measurement circuit."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("protocol_id", [1, 2])
    def test_projection_matches_circuit(self, n, protocol_id):
        d = 2 ** n
        for setting in get_protocol(protocol_id).measurement_settings(n):
            for seed in range(50):
                phi = haar_random_state(n, seed=seed)
                compound = np.zeros(2 * d, dtype=complex)
                compound[setting.ancilla_bit * d:(setting.ancilla_bit + 1) * d] = phi.amplitudes
                measured = simulate(setting.circuit, make_state(compound)).probabilities()
                projected = setting.to_outcome_order(
                    outcome_probabilities(NoisyPreparation(phi), setting.ancilla_bit, setting.basis))
                assert np.max(np.abs(measured - projected)) < 1e-10


class TestExactRoundTrip:
    """Both protocols recover Haar states from exact probabilities."""

    @pytest.mark.parametrize("n", range(1, 7))
    @pytest.mark.parametrize("protocol_id", [1, 2])
    def test_hundred_states(self, n, protocol_id):
        protocol = get_protocol(protocol_id)
        for seed in range(100):
            target = haar_random_state(n, seed=1000 * n + seed)
            z, phase = run_protocol(NoisyPreparation(target), protocol_id, 0)
            counts = {"Z": z, **{c.setting_label: c for c in phase}}
            assert protocol.reconstruct(counts).fidelity_to(target) >= 1 - 1e-9


class TestIbmqRegression:
    """Published IBMQ count tables against the uniform two-qubit target."""

    @pytest.mark.parametrize("protocol_id, backend, expected, tolerance", [
        (1, "simulator", 0.9998, 0.003),
        (1, "ibmqx", 0.9965, 0.003),
        (2, "simulator", 0.9989, 0.003),
        (2, "ibmqx", 0.8013, 0.01),
    ])
    def test_fidelity(self, ibmq_counts, uniform_target, protocol_id, backend, expected, tolerance):
        result = ProtocolManager({}).reconstruct(protocol_id, ibmq_counts(protocol_id, backend))
        assert abs(result.fidelity_to(uniform_target) - expected) <= tolerance

    def test_second_circuit_is_most_discrepant(self, ibmq_counts):
        result = get_protocol(2).reconstruct(ibmq_counts(2, "ibmqx"))
        assert result.most_discrepant_setting() == "D2"

    @pytest.mark.parametrize("protocol_id", [1, 2])
    @pytest.mark.parametrize("backend", ["simulator", "ibmqx"])
    def test_result_json_round_trip(self, ibmq_counts, uniform_target, protocol_id, backend):
        result = get_protocol(protocol_id).reconstruct(ibmq_counts(protocol_id, backend))
        payload = json.loads(json.dumps(result.to_dict(uniform_target)))
        assert payload["protocol"] == protocol_id
        assert payload["most_discrepant_setting"] == result.most_discrepant_setting()
        assert [p["clamped"] for p in payload["pairs"]] == [p.clamped for p in result.pair_diagnostics]
        assert all(type(p["clamped"]) is bool for p in payload["pairs"])
        assert payload["fidelity"] == pytest.approx(result.fidelity_to(uniform_target))

    def test_result_serializes(self, ibmq_counts, uniform_target):
        payload = get_protocol(1).reconstruct(ibmq_counts(1, "simulator")).to_dict(uniform_target)
        assert payload["protocol"] == 1
        assert len(payload["pairs"]) == 3
        assert payload["closure"]["pair"] == [3, 0]
        assert payload["fidelity"] == pytest.approx(0.9998, abs=0.003)


class TestProtocolManager:
    """Routing protocol ids to implementations."""

    def test_available(self):
        available = ProtocolManager({}).get_available_protocols()
        assert sorted(available) == [1, 2]
        assert available[1] == ConditionalShiftProtocol.description
        assert available[2] == GlobalShiftProtocol.description

    def test_missing_setting(self, ibmq_counts):
        counts = ibmq_counts(1, "simulator")
        del counts["C1_phi1"]
        with pytest.raises(ReconstructionError, match="C1_phi1"):
            ProtocolManager({}).reconstruct(1, counts)

    def test_unknown_id(self):
        with pytest.raises(ReconstructionError):
            ProtocolManager({}).get_protocol(7)

    def test_add_and_remove(self):
        manager = ProtocolManager({})
        manager.add_protocol(3, GlobalShiftProtocol({}))
        assert 3 in manager.get_available_protocols()
        manager.remove_protocol(3)
        assert 3 not in manager.get_available_protocols()

    def test_configured_estimator(self, ibmq_counts):
        config = {"reconstruction": {"estimator": "normalized"}}
        result = ProtocolManager(config).reconstruct(2, ibmq_counts(2, "simulator"))
        assert result.estimator == "normalized"

    def test_strict_override(self):
        counts = {"Z": Counts(10, {0: 10}, "Z", 4),
                  "C1_phi0": Counts(10, {0: 10}, "C1_phi0", 8),
                  "C1_phi1": Counts(10, {0: 10}, "C1_phi1", 8)}
        with pytest.raises(ReconstructionError):
            ProtocolManager({}).reconstruct(1, counts, strict=True)
