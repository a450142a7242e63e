"""
Dense Statevector Simulator

Provides exactly the gates the QFT-based protocols need: Hadamard, single-wire
phase Z^angle, controlled phase, the phase scramble Scr(theta), the message
encoding Enc(m), and the swapless inverse QFT, plus full and single-wire
measurement.

Amplitude layout:
- wire 0 is the first transmitted (top) wire and the SLOWEST index of the
  amplitude array: amplitude index = sum(bit_w << (p - 1 - w)).
- the array is viewed as a [2] * p tensor where axis w is wire w.
- measured integers use the bit<->wire map "bit t of the value is wire t",
  so value and amplitude index are bit-reversals of each other.

Every operation returns a new Statevector; inputs are never mutated.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import MessageValueError, QubitIndexError, SizeError, StateError

MAX_QUBITS = 24
NORM_TOLERANCE = 1e-9
SQRT2_INV = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Statevector:
    """Dense amplitude vector over num_qubits wires"""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if len(self.amplitudes) != 1 << self.num_qubits:
            raise SizeError(
                f"Expected {1 << self.num_qubits} amplitudes for "
                f"{self.num_qubits} qubits, got {len(self.amplitudes)}"
            )

    def tensor(self) -> np.ndarray:
        """Copy of the amplitudes as a [2] * p tensor, axis w = wire w"""
        return self.amplitudes.reshape([2] * self.num_qubits).copy()

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def _check_size(p: int) -> None:
    if not 1 <= p <= MAX_QUBITS:
        raise SizeError(f"Qubit count must be in 1..{MAX_QUBITS}, got {p}")


def _check_wire(state: Statevector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise QubitIndexError(
            f"Wire {qubit} out of range for {state.num_qubits} qubits"
        )


def _from_tensor(p: int, psi: np.ndarray) -> Statevector:
    return Statevector(p, psi.reshape(-1))


def _wire_slice(p: int, assignments: dict) -> tuple:
    index = [slice(None)] * p
    for wire, bit in assignments.items():
        index[wire] = bit
    return tuple(index)


def check_normalized(state: Statevector, tolerance: float = NORM_TOLERANCE) -> None:
    """Raise StateError unless sum |a|^2 is within tolerance of 1"""
    norm = state.norm()
    if abs(norm - 1.0) > tolerance:
        raise StateError(f"State norm {norm!r} deviates from 1 by more than {tolerance}")


def index_to_value(index: int, p: int) -> int:
    """Amplitude index -> measured integer (bit t = wire t)"""
    value = 0
    for wire in range(p):
        value |= ((index >> (p - 1 - wire)) & 1) << wire
    return value


def value_to_index(value: int, p: int) -> int:
    """Measured integer -> amplitude index; the map is its own inverse"""
    return index_to_value(value, p)


def new_plus_state(p: int) -> Statevector:
    """|+>^p: every amplitude 2^(-p/2)"""
    _check_size(p)
    dim = 1 << p
    return Statevector(p, np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128))


def basis_state(p: int, value: int) -> Statevector:
    """Computational basis state whose wire t holds bit t of value"""
    _check_size(p)
    if not 0 <= value < (1 << p):
        raise MessageValueError(f"Basis value {value} out of range for {p} qubits")
    amplitudes = np.zeros(1 << p, dtype=np.complex128)
    amplitudes[value_to_index(value, p)] = 1.0
    return Statevector(p, amplitudes)


def apply_phase(state: Statevector, qubit: int, angle: float) -> Statevector:
    """Z^angle on one wire: multiplies the |1> branch by e^(i angle)"""
    _check_wire(state, qubit)
    psi = state.tensor()
    psi[_wire_slice(state.num_qubits, {qubit: 1})] *= np.exp(1j * angle)
    return _from_tensor(state.num_qubits, psi)


def apply_controlled_phase(
    state: Statevector, control: int, target: int, angle: float
) -> Statevector:
    """Phase e^(i angle) on basis states where both wires are 1"""
    _check_wire(state, control)
    _check_wire(state, target)
    if control == target:
        raise QubitIndexError("control and target must differ")
    psi = state.tensor()
    psi[_wire_slice(state.num_qubits, {control: 1, target: 1})] *= np.exp(1j * angle)
    return _from_tensor(state.num_qubits, psi)


def apply_hadamard(state: Statevector, qubit: int) -> Statevector:
    """Standard Hadamard on one wire"""
    _check_wire(state, qubit)
    p = state.num_qubits
    psi = state.tensor()
    zero = psi[_wire_slice(p, {qubit: 0})]
    one = psi[_wire_slice(p, {qubit: 1})]
    out = np.stack(((zero + one) * SQRT2_INV, (zero - one) * SQRT2_INV), axis=qubit)
    return _from_tensor(p, out)


def apply_scramble(
    state: Statevector, phases: Sequence[float], sign: int = 1
) -> Statevector:
    """Scr(theta) for sign=+1, Scr(theta)^-1 for sign=-1; phases[t] acts on wire t"""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    p = state.num_qubits
    if len(phases) != p:
        raise SizeError(f"Expected {p} phases, got {len(phases)}")

    # Scr is diagonal: one multiply by the outer product of per-wire factors
    factors = np.ones(1 << p, dtype=np.complex128).reshape([2] * p)
    for wire, angle in enumerate(phases):
        factors[_wire_slice(p, {wire: 1})] *= np.exp(1j * sign * float(angle))
    return Statevector(p, state.amplitudes * factors.reshape(-1))


def encode_phases(m: int, n: int) -> np.ndarray:
    """Per-wire Enc(m) angles for an n-wire register: pi * m / 2^t on local wire t"""
    if not 0 <= m < (1 << n):
        raise MessageValueError(f"Message {m} out of range for {n} qubits")
    # m mod 2^(t+1) keeps the angle in [0, 2pi) without losing precision
    return np.array(
        [math.pi * (m % (1 << (t + 1))) / (1 << t) for t in range(n)], dtype=float
    )


def apply_encode(
    state: Statevector, m: int, p: Optional[int] = None, wires: Optional[Sequence[int]] = None
) -> Statevector:
    """Enc(m) on the given wires (all wires by default)

    Local wire t of the register receives Z^(pi m / 2^t), i.e. U_p(2^(p-1-t) m),
    so after apply_inverse_qft bit t of m is read out on local wire t.
    """
    wires = list(range(state.num_qubits)) if wires is None else list(wires)
    if p is not None and p != len(wires):
        raise SizeError(f"Register size {p} does not match {len(wires)} wires")
    for wire in wires:
        _check_wire(state, wire)
    angles = encode_phases(m, len(wires))
    full = np.zeros(state.num_qubits)
    full[wires] = angles
    return apply_scramble(state, full, sign=1)


def apply_inverse_qft(
    state: Statevector, wires: Optional[Sequence[int]] = None
) -> Statevector:
    """Swapless QFT^dagger on the given wires (all wires by default)

    Local wire 0 is decoded first. Every later wire t gets the controlled
    corrections -pi / 2^(t-j) from each earlier wire j before its Hadamard,
    which is the coherent form of measuring lower bits first.
    """
    wires = list(range(state.num_qubits)) if wires is None else list(wires)
    if len(set(wires)) != len(wires):
        raise QubitIndexError(f"Duplicate wires in register: {wires}")
    for t, target in enumerate(wires):
        for j in range(t):
            state = apply_controlled_phase(
                state, wires[j], target, -math.pi / (1 << (t - j))
            )
        state = apply_hadamard(state, target)
    return state


def apply_qft(state: Statevector, wires: Optional[Sequence[int]] = None) -> Statevector:
    """Adjoint of apply_inverse_qft"""
    wires = list(range(state.num_qubits)) if wires is None else list(wires)
    for t in reversed(range(len(wires))):
        target = wires[t]
        state = apply_hadamard(state, target)
        for j in range(t):
            state = apply_controlled_phase(
                state, wires[j], target, math.pi / (1 << (t - j))
            )
    return state


def value_probabilities(state: Statevector) -> np.ndarray:
    """Born probabilities indexed by measured value (bit t = wire t)"""
    p = state.num_qubits
    probs = (np.abs(state.amplitudes) ** 2).reshape([2] * p)
    return probs.transpose(list(reversed(range(p)))).reshape(-1)


def measure_all(
    state: Statevector, rng: np.random.Generator, tolerance: float = NORM_TOLERANCE
) -> Tuple[int, Statevector]:
    """Measure every wire; returns (value, collapsed basis state)"""
    check_normalized(state, tolerance)
    probs = np.abs(state.amplitudes) ** 2
    index = int(rng.choice(len(probs), p=probs / probs.sum()))
    value = index_to_value(index, state.num_qubits)
    collapsed = np.zeros_like(state.amplitudes)
    collapsed[index] = 1.0
    return value, Statevector(state.num_qubits, collapsed)


def measure_qubit(
    state: Statevector,
    qubit: int,
    rng: np.random.Generator,
    tolerance: float = NORM_TOLERANCE,
) -> Tuple[int, Statevector]:
    """Z-basis measurement of one wire with collapse and renormalization"""
    _check_wire(state, qubit)
    check_normalized(state, tolerance)
    p = state.num_qubits
    psi = state.tensor()
    one = psi[_wire_slice(p, {qubit: 1})]
    p_one = float(np.sum(np.abs(one) ** 2)) / state.norm()
    bit = int(rng.random() < p_one)

    psi[_wire_slice(p, {qubit: 1 - bit})] = 0.0
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)))
    return bit, _from_tensor(p, psi)
