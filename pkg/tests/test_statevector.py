"""Statevector gates, QFT decoding and measurement"""

import math

import numpy as np
import pytest

from lib.errors import MessageValueError, QubitIndexError, SizeError, StateError
from lib.statevector import (
    MAX_QUBITS,
    Statevector,
    apply_controlled_phase,
    apply_encode,
    apply_hadamard,
    apply_inverse_qft,
    apply_phase,
    apply_qft,
    apply_scramble,
    basis_state,
    check_normalized,
    encode_phases,
    index_to_value,
    measure_all,
    measure_qubit,
    new_plus_state,
    value_probabilities,
    value_to_index,
)


class TestPreparation:
    def test_plus_state_amplitudes(self):
        state = new_plus_state(3)
        np.testing.assert_allclose(state.amplitudes, np.full(8, 1 / math.sqrt(8)), atol=1e-15)
        assert abs(state.norm() - 1.0) < 1e-12

    @pytest.mark.parametrize("p", [0, MAX_QUBITS + 1])
    def test_plus_state_size_limits(self, p):
        with pytest.raises(SizeError):
            new_plus_state(p)

    def test_basis_state_wire_order(self):
        # value 1 sets wire 0, the slowest amplitude index
        state = basis_state(3, 1)
        assert state.amplitudes[4] == 1.0
        np.testing.assert_allclose(value_probabilities(state), np.eye(8)[1])

    def test_basis_state_out_of_range(self):
        with pytest.raises(MessageValueError):
            basis_state(2, 4)

    def test_value_index_bit_reversal(self):
        for p in range(1, 6):
            for value in range(1 << p):
                assert value_to_index(index_to_value(value, p), p) == value
        assert index_to_value(0b001, 3) == 0b100

    def test_amplitude_length_checked(self):
        with pytest.raises(SizeError):
            Statevector(2, np.zeros(3, dtype=np.complex128))


class TestGates:
    def test_hadamard_twice_is_identity(self, rng):
        amplitudes = rng.normal(size=8) + 1j * rng.normal(size=8)
        state = Statevector(3, amplitudes / np.linalg.norm(amplitudes))
        for wire in range(3):
            back = apply_hadamard(apply_hadamard(state, wire), wire)
            np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_hadamard_on_zero(self):
        state = apply_hadamard(basis_state(1, 0), 0)
        np.testing.assert_allclose(state.amplitudes, [1 / math.sqrt(2)] * 2, atol=1e-15)

    def test_phase_only_touches_one_branch(self):
        state = apply_phase(new_plus_state(2), 1, math.pi / 2)
        expected = np.array([1, 1j, 1, 1j]) / 2
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)

    def test_phase_bad_wire(self):
        with pytest.raises(QubitIndexError):
            apply_phase(new_plus_state(2), 2, 0.1)

    def test_controlled_phase(self):
        state = apply_controlled_phase(new_plus_state(2), 0, 1, math.pi)
        np.testing.assert_allclose(state.amplitudes, np.array([1, 1, 1, -1]) / 2, atol=1e-15)
        with pytest.raises(QubitIndexError):
            apply_controlled_phase(state, 1, 1, 0.3)

    def test_inputs_are_not_mutated(self):
        state = new_plus_state(2)
        before = state.amplitudes.copy()
        apply_phase(state, 0, 1.0)
        apply_hadamard(state, 1)
        apply_scramble(state, [0.3, 0.4])
        np.testing.assert_array_equal(state.amplitudes, before)


class TestScramble:
    def test_scramble_inverse_restores_state(self, rng):
        theta = rng.uniform(0, 2 * math.pi, size=5)
        state = new_plus_state(5)
        back = apply_scramble(apply_scramble(state, theta), theta, sign=-1)
        np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_scramble_matches_single_phases(self, rng):
        theta = rng.uniform(0, 2 * math.pi, size=3)
        state = new_plus_state(3)
        expected = state
        for wire, angle in enumerate(theta):
            expected = apply_phase(expected, wire, angle)
        np.testing.assert_allclose(
            apply_scramble(state, theta).amplitudes, expected.amplitudes, atol=1e-12
        )

    def test_scramble_length_and_sign(self):
        with pytest.raises(SizeError):
            apply_scramble(new_plus_state(2), [0.1])
        with pytest.raises(ValueError):
            apply_scramble(new_plus_state(1), [0.1], sign=2)


class TestEncodeDecode:
    def test_encode_phases(self):
        np.testing.assert_allclose(
            encode_phases(5, 3), [math.pi, math.pi / 2, 5 * math.pi / 4], atol=1e-15
        )

    def test_encode_out_of_range(self):
        with pytest.raises(MessageValueError):
            apply_encode(new_plus_state(3), 8, 3)

    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
    def test_inverse_qft_reads_back_every_message(self, p):
        for m in range(1 << p):
            state = apply_inverse_qft(apply_encode(new_plus_state(p), m, p))
            probs = value_probabilities(state)
            assert abs(probs[m] - 1.0) < 1e-12

    def test_encode_on_a_compartment(self):
        # wires 1 and 3 form the register, wires 0 and 2 stay |+>
        state = apply_encode(new_plus_state(4), 0b10, wires=[1, 3])
        state = apply_inverse_qft(state, wires=[1, 3])
        for wire in (0, 2):
            state = apply_hadamard(state, wire)
        probs = value_probabilities(state)
        # local bit 1 lands on wire 3
        assert abs(probs[0b1000] - 1.0) < 1e-12

    def test_qft_is_adjoint_of_inverse(self, rng):
        amplitudes = rng.normal(size=16) + 1j * rng.normal(size=16)
        state = Statevector(4, amplitudes / np.linalg.norm(amplitudes))
        back = apply_qft(apply_inverse_qft(state))
        np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)

    def test_duplicate_register_wires(self):
        with pytest.raises(QubitIndexError):
            apply_inverse_qft(new_plus_state(3), wires=[0, 0])


class TestMeasurement:
    def test_measure_all_deterministic_state(self, rng):
        value, collapsed = measure_all(basis_state(4, 11), rng)
        assert value == 11
        np.testing.assert_array_equal(collapsed.amplitudes, basis_state(4, 11).amplitudes)

    def test_measure_all_distribution(self):
        rng = np.random.default_rng(7)
        counts = np.zeros(4)
        for _ in range(4000):
            value, _ = measure_all(new_plus_state(2), rng)
            counts[value] += 1
        np.testing.assert_allclose(counts / 4000, [0.25] * 4, atol=0.03)

    def test_measure_qubit_collapses_and_renormalizes(self, rng):
        bit, collapsed = measure_qubit(new_plus_state(3), 1, rng)
        check_normalized(collapsed)
        tensor = collapsed.tensor()
        assert np.allclose(tensor[:, 1 - bit, :], 0.0)

    def test_measure_is_seed_reproducible(self):
        state = new_plus_state(5)
        first = [measure_all(state, np.random.default_rng(3))[0] for _ in range(3)]
        second = [measure_all(state, np.random.default_rng(3))[0] for _ in range(3)]
        assert first == second

    def test_unnormalized_state_rejected(self, rng):
        state = Statevector(1, np.array([1.0, 1.0], dtype=np.complex128))
        with pytest.raises(StateError):
            measure_all(state, rng)
        with pytest.raises(StateError):
            measure_qubit(state, 0, rng)
