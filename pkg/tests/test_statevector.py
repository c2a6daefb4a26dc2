"""Tests for the dense statevector core."""

import numpy as np
import pytest

from modules.errors import GateError, StateError
from modules.statevector import (
    GateMatrix,
    apply_gate,
    embed_gate,
    fidelity,
    haar_random_state,
    inner_product,
    make_state,
)

X = GateMatrix(np.array([[0, 1], [1, 0]]), name="x")
H = GateMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2), name="h")


class TestMakeState:
    """Construction and validation of pure states."""

    def test_basis_state(self):
        state = make_state([1, 0])
        assert state.n_qubits == 1
        np.testing.assert_allclose(state.amplitudes, [1, 0])

    def test_uniform_two_qubit_state(self):
        state = make_state([0.5, 0.5, 0.5, 0.5])
        assert state.n_qubits == 2
        np.testing.assert_allclose(state.probabilities(), [0.25] * 4)

    def test_three_four_five(self):
        state = make_state([0.6, 0.8j])
        assert np.angle(state.amplitudes[1]) == pytest.approx(np.pi / 2)

    @pytest.mark.parametrize("vector", [[1, 0, 0], [1], [0, 0]])
    def test_rejects_bad_vectors(self, vector):
        with pytest.raises(StateError):
            make_state(vector)

    def test_rejects_unnormalized_without_flag(self):
        with pytest.raises(StateError):
            make_state([1, 1])
        np.testing.assert_allclose(make_state([1, 1], normalize=True).amplitudes, [2 ** -0.5] * 2)

    def test_amplitudes_are_read_only(self):
        state = make_state([1, 0])
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0


class TestHaarRandomState:
    """Seeded Haar sampling."""

    def test_same_seed_same_state(self):
        np.testing.assert_array_equal(haar_random_state(1, seed=7).amplitudes,
                                      haar_random_state(1, seed=7).amplitudes)

    def test_unit_norm(self):
        assert np.linalg.norm(haar_random_state(3, seed=11).amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_marginal(self):
        mean = np.mean([haar_random_state(2, seed=s).probabilities()[0] for s in range(10_000)])
        assert abs(mean - 0.25) < 0.01

    @pytest.mark.parametrize("n", [0, 13])
    def test_size_limits(self, n):
        with pytest.raises(StateError):
            haar_random_state(n, seed=0)


class TestApplyGate:
    """Bit-mask gate application against the dense kron oracle."""

    def test_bit_flip(self):
        np.testing.assert_allclose(apply_gate(make_state([1, 0]), X, [0]).amplitudes, [0, 1])

    def test_hadamard_is_involution(self):
        state = haar_random_state(3, seed=5)
        twice = apply_gate(apply_gate(state, H, [1]), H, [1])
        np.testing.assert_allclose(twice.amplitudes, state.amplitudes, atol=1e-12)

    @pytest.mark.parametrize("targets", [(0, 1), (1, 3), (3, 0), (2, 1)])
    def test_two_qubit_gate_matches_dense_oracle(self, targets):
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        gate = GateMatrix(q, name="random")
        state = haar_random_state(4, seed=9)

        expected = embed_gate(gate, targets, 4) @ state.amplitudes
        np.testing.assert_allclose(apply_gate(state, gate, targets).amplitudes, expected, atol=1e-12)

    def test_controls(self):
        # |10> -> |11> with a solid control on position 0; |00> untouched
        np.testing.assert_allclose(apply_gate(make_state([0, 0, 1, 0]), X, [1], [0]).amplitudes, [0, 0, 0, 1])
        np.testing.assert_allclose(apply_gate(make_state([1, 0, 0, 0]), X, [1], [0]).amplitudes, [1, 0, 0, 0])

    def test_hollow_control(self):
        np.testing.assert_allclose(apply_gate(make_state([1, 0, 0, 0]), X, [1], [0], [0]).amplitudes, [0, 1, 0, 0])

    def test_placement_errors(self):
        state = make_state([1, 0, 0, 0])
        with pytest.raises(GateError):
            apply_gate(state, X, [2])
        with pytest.raises(GateError):
            apply_gate(state, X, [0], [0])

    def test_non_unitary_rejected(self):
        with pytest.raises(GateError):
            GateMatrix(np.array([[1, 1], [0, 1]]))


class TestFidelity:
    """Overlap and fidelity of pure states."""

    def test_self_fidelity(self):
        state = haar_random_state(2, seed=1)
        assert fidelity(state, state) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert fidelity(make_state([1, 0]), make_state([0, 1])) == 0.0

    def test_half(self):
        assert fidelity(make_state([1, 0]), make_state([1, 1], normalize=True)) == pytest.approx(0.5)

    def test_global_phase_blind(self):
        state = haar_random_state(3, seed=2)
        assert fidelity(state, state.with_global_phase(1.3)) == pytest.approx(1.0)

    def test_inner_product_dimension_mismatch(self):
        with pytest.raises(StateError):
            inner_product(make_state([1, 0]), make_state([1, 0, 0, 0]))
