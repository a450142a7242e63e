"""
Protocol Runs

End-to-end executable runs of the three protocols over a channel an
eavesdropper may tap:

- two_pass:   Bob scrambles |+>^p, Alice encodes m, Bob unscrambles, applies
              QFT^dagger per compartment, measures and extracts.
- three_pass: Alice encodes and scrambles, Bob adds his scramble, Alice
              removes hers, Bob removes his and decodes.
- bb84:       per-wire random-basis transmission with sifting.

A channel pass is a function Statevector -> Statevector; the honest channel is
the identity and a tapped channel routes the state through adversary.intercept.
Every run takes an injected numpy Generator, so identical seeds give identical
transcripts.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .adversary import (
    X_BASIS,
    Z_BASIS,
    BasisModel,
    EveStrategy,
    Observation,
    intercept,
    measure_in_basis,
)
from .config_manager import get_logger
from .errors import CapacityError, SchemeError
from .scheme_manager import (
    Message,
    VerificationScheme,
    Verdict,
    assemble_message,
    bits_to_value,
    extract_key,
    message_from_bits,
    value_to_bits,
)
from .statevector import (
    MAX_QUBITS,
    NORM_TOLERANCE,
    Statevector,
    apply_encode,
    apply_hadamard,
    apply_inverse_qft,
    apply_scramble,
    basis_state,
    measure_all,
    new_plus_state,
)

logger = get_logger("protocols")

MAX_SIFT_ATTEMPTS = 256


class Protocol(Enum):
    TWO_PASS = "two_pass"
    THREE_PASS = "three_pass"
    BB84 = "bb84"


@dataclass(frozen=True)
class ProtocolParams:
    """Scheme and run settings shared by all protocols"""

    scheme: VerificationScheme
    mismatch_limit: int = 0
    seed: int = 0
    max_qubits: int = MAX_QUBITS
    norm_tolerance: float = NORM_TOLERANCE

    def __post_init__(self):
        if self.mismatch_limit < 0:
            raise SchemeError(f"mismatch_limit must be >= 0, got {self.mismatch_limit}")
        if self.norm_tolerance <= 0:
            raise SchemeError(f"norm_tolerance must be > 0, got {self.norm_tolerance}")

    def check_capacity(self) -> None:
        p = self.scheme.total_qubits
        if p > self.max_qubits:
            raise CapacityError(
                f"Scheme needs {p} qubits, above the statevector cap of {self.max_qubits}"
            )


@dataclass
class Transcript:
    """Record of one protocol run"""

    protocol: str
    intended_message: Message
    measured_message: Message
    verdict: Verdict
    mismatches: int
    alice_key: Tuple[int, ...]
    eve_observations: List[Observation] = field(default_factory=list)
    key_agreed: Optional[Tuple[int, ...]] = None
    bases: Optional[Dict[str, List[str]]] = None
    attempts: Optional[List[int]] = None
    sifted: Optional[List[int]] = None
    eve_key_guesses: int = 0
    eve_key_correct: int = 0

    @property
    def detected(self) -> bool:
        return self.verdict is Verdict.FAIL


def honest_channel(state: Statevector, pass_index: int) -> Statevector:
    return state


class TappedChannel:
    """Channel that hands every pass to Eve and keeps her observations"""

    def __init__(
        self,
        strategy: EveStrategy,
        rng: np.random.Generator,
        scheme: VerificationScheme,
    ):
        self.strategy = strategy
        self.rng = rng
        self.scheme = scheme
        self.observations: List[Observation] = []

    def __call__(self, state: Statevector, pass_index: int) -> Statevector:
        state, seen = intercept(self.strategy, state, pass_index, self.rng, self.scheme)
        self.observations.extend(seen)
        return state


def _random_key(scheme: VerificationScheme, rng: np.random.Generator) -> Tuple[int, ...]:
    return tuple(int(b) for b in rng.integers(0, 2, size=scheme.num_key_qubits))


def _encode_message(state: Statevector, message: Message, scheme: VerificationScheme) -> Statevector:
    for group in scheme.compartments:
        local_value = bits_to_value([message.bits[w] for w in group])
        state = apply_encode(state, local_value, wires=group)
    return state


def _decode_and_measure(
    state: Statevector, params: ProtocolParams, rng: np.random.Generator
) -> Message:
    scheme = params.scheme
    for group in scheme.compartments:
        state = apply_inverse_qft(state, wires=group)
    value, _ = measure_all(state, rng, params.norm_tolerance)
    return message_from_bits(value_to_bits(value, scheme.total_qubits), scheme)


def _eve_key_score(
    observations: Sequence[Observation], message: Message, scheme: VerificationScheme
) -> Tuple[int, int]:
    """(key wires Eve holds a guess for, guesses equal to Alice's bit); last observation per wire wins"""
    key_wires = set(scheme.key_positions)
    last: Dict[int, int] = {}
    for observation in observations:
        if observation.wire in key_wires:
            last[observation.wire] = observation.bit
    correct = sum(1 for wire, bit in last.items() if bit == message.bits[wire])
    return len(last), correct


def _finish(
    protocol: Protocol,
    params: ProtocolParams,
    intended: Message,
    measured: Message,
    key: Tuple[int, ...],
    observations: List[Observation],
) -> Transcript:
    extraction = extract_key(measured, params.scheme, params.mismatch_limit)
    logger.debug(
        f"{protocol.value} on {params.scheme.name}: {extraction.verdict.value}, "
        f"{extraction.mismatches} mismatches, {len(observations)} eve observations"
    )
    guesses, correct = _eve_key_score(observations, intended, params.scheme)
    return Transcript(
        protocol=protocol.value,
        intended_message=intended,
        measured_message=measured,
        verdict=extraction.verdict,
        mismatches=extraction.mismatches,
        alice_key=key,
        eve_observations=observations,
        key_agreed=extraction.key if extraction.verdict is Verdict.PASS else None,
        eve_key_guesses=guesses,
        eve_key_correct=correct,
    )


def run_two_pass_qkd(
    params: ProtocolParams,
    eve: EveStrategy,
    rng: np.random.Generator,
    key_bits: Optional[Sequence[int]] = None,
) -> Transcript:
    """Two-pass QFT key distribution

    Pass 1 carries Bob's scrambled register to Alice, pass 2 carries Alice's
    encoded register back.
    """
    params.check_capacity()
    scheme = params.scheme
    p = scheme.total_qubits
    channel = TappedChannel(eve, rng, scheme)

    # Bob: scramble phases are fresh per run
    theta = rng.uniform(0.0, 2.0 * math.pi, size=p)
    state = apply_scramble(new_plus_state(p), theta)
    state = channel(state, 1)

    # Alice
    key = tuple(int(b) for b in key_bits) if key_bits is not None else _random_key(scheme, rng)
    message = assemble_message(key, scheme)
    state = _encode_message(state, message, scheme)
    state = channel(state, 2)

    # Bob
    state = apply_scramble(state, theta, sign=-1)
    measured = _decode_and_measure(state, params, rng)
    return _finish(Protocol.TWO_PASS, params, message, measured, key, channel.observations)


def run_three_pass_encryption(
    plaintext_key_bits: Optional[Sequence[int]],
    params: ProtocolParams,
    eve: EveStrategy,
    rng: np.random.Generator,
) -> Transcript:
    """Three-pass QFT message encryption with U_A = Scr(theta), U_B = Scr(phi)"""
    params.check_capacity()
    scheme = params.scheme
    p = scheme.total_qubits
    channel = TappedChannel(eve, rng, scheme)

    key = (
        tuple(int(b) for b in plaintext_key_bits)
        if plaintext_key_bits is not None
        else _random_key(scheme, rng)
    )
    message = assemble_message(key, scheme)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=p)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=p)

    # Alice encodes and locks
    state = apply_scramble(_encode_message(new_plus_state(p), message, scheme), theta)
    state = channel(state, 1)
    # Bob adds his lock
    state = channel(apply_scramble(state, phi), 2)
    # Alice removes hers
    state = channel(apply_scramble(state, theta, sign=-1), 3)
    # Bob removes his and decodes
    state = apply_scramble(state, phi, sign=-1)
    measured = _decode_and_measure(state, params, rng)
    return _finish(Protocol.THREE_PASS, params, message, measured, key, channel.observations)


def _prepare_bb84(bit: int, basis: str) -> Statevector:
    state = basis_state(1, bit)
    return apply_hadamard(state, 0) if basis == X_BASIS else state


def _random_basis(rng: np.random.Generator) -> str:
    return Z_BASIS if rng.integers(0, 2) == 0 else X_BASIS


def run_bb84(
    params: ProtocolParams,
    eve: EveStrategy,
    rng: np.random.Generator,
    key_bits: Optional[Sequence[int]] = None,
    alice_bases: Optional[Sequence[str]] = None,
    eve_bases: Optional[Dict[int, str]] = None,
    sift: str = "retransmit",
) -> Transcript:
    """BB84 with Eve optionally measuring chosen wires in random bases

    BB84 has a single quantum pass, so any non-passive strategy taps it. Wire
    i of the scheme is one logical position of the message.

    Args:
        sift: "retransmit" resends a wire with a fresh Alice basis until Bob's
              basis matches, so every scheme position survives sifting;
              "discard" sends each wire once and drops mismatched bases
        alice_bases: fixed per-wire sending bases (many-copies premise)
        eve_bases: forced Eve basis per wire, overriding her random choice
    """
    if sift not in ("retransmit", "discard"):
        raise ValueError(f"Unknown sift mode {sift!r}")
    scheme = params.scheme
    p = scheme.total_qubits
    strategy = eve.with_basis_model(BasisModel.RANDOM_ZX)
    targets = set(strategy.targets(scheme))

    key = tuple(int(b) for b in key_bits) if key_bits is not None else _random_key(scheme, rng)
    message = assemble_message(key, scheme)

    send: List[str] = []
    measure: List[str] = []
    attempts: List[int] = []
    received: List[int] = []
    observations: List[Observation] = []
    last_eve: Dict[int, Observation] = {}

    for wire in range(p):
        for attempt in range(1, MAX_SIFT_ATTEMPTS + 1):
            a_basis = alice_bases[wire] if alice_bases is not None else _random_basis(rng)
            state = _prepare_bb84(message.bits[wire], a_basis)
            if wire in targets:
                e_basis = (eve_bases or {}).get(wire) or _random_basis(rng)
                e_bit, state = measure_in_basis(state, 0, e_basis, rng)
                last_eve[wire] = Observation(wire, e_bit, e_basis)
                observations.append(last_eve[wire])
            b_basis = _random_basis(rng)
            b_bit, _ = measure_in_basis(state, 0, b_basis, rng)
            if b_basis == a_basis or sift == "discard":
                break
        else:
            raise CapacityError(f"Wire {wire} failed to sift after {MAX_SIFT_ATTEMPTS} attempts")
        send.append(a_basis)
        measure.append(b_basis)
        attempts.append(attempt)
        received.append(b_bit)

    measured = message_from_bits(received, scheme)
    sifted = [w for w in range(p) if send[w] == measure[w]]
    intended = scheme.intended
    mismatches = sum(1 for w in sifted if w in intended and received[w] != intended[w])
    verdict = Verdict.PASS if mismatches <= params.mismatch_limit else Verdict.FAIL
    sifted_key = tuple(received[w] for w in scheme.key_positions if w in sifted)

    # a basis match gives Eve the exact bit, a mismatch a fair coin
    known = [obs for w, obs in last_eve.items() if w in scheme.key_positions and w in sifted]
    eve_correct = sum(1 for obs in known if obs.bit == message.bits[obs.wire])

    return Transcript(
        protocol=Protocol.BB84.value,
        intended_message=message,
        measured_message=measured,
        verdict=verdict,
        mismatches=mismatches,
        alice_key=key,
        eve_observations=observations,
        key_agreed=sifted_key if verdict is Verdict.PASS else None,
        bases={"send": send, "measure": measure},
        attempts=attempts,
        sifted=sifted,
        eve_key_guesses=len(known),
        eve_key_correct=eve_correct,
    )


def run_protocol(
    protocol: str,
    params: ProtocolParams,
    eve: EveStrategy,
    rng: np.random.Generator,
    key_bits: Optional[Sequence[int]] = None,
) -> Transcript:
    """Dispatch by protocol name"""
    try:
        kind = Protocol(protocol)
    except ValueError:
        known = ", ".join(p.value for p in Protocol)
        raise SchemeError(f"Unknown protocol '{protocol}' (known: {known})") from None
    if kind is Protocol.TWO_PASS:
        return run_two_pass_qkd(params, eve, rng, key_bits)
    if kind is Protocol.THREE_PASS:
        return run_three_pass_encryption(key_bits, params, eve, rng)
    return run_bb84(params, eve, rng, key_bits)


def transcript_to_dict(transcript: Transcript) -> Dict[str, Any]:
    """JSON-ready transcript; bits as 0/1 arrays"""
    return {
        "protocol": transcript.protocol,
        "intended_message": list(transcript.intended_message.bits),
        "measured_message": list(transcript.measured_message.bits),
        "verdict": transcript.verdict.value,
        "mismatches": transcript.mismatches,
        "alice_key": list(transcript.alice_key),
        "eve_observations": [
            {"wire": o.wire, "bit": o.bit, "basis": o.basis} for o in transcript.eve_observations
        ],
        "key_agreed": list(transcript.key_agreed) if transcript.key_agreed is not None else None,
        "bases": transcript.bases,
        "attempts": transcript.attempts,
        "sifted": transcript.sifted,
        "eve_key_guesses": transcript.eve_key_guesses,
        "eve_key_correct": transcript.eve_key_correct,
    }


def guess_accuracy(transcripts: Sequence[Transcript]) -> Optional[float]:
    """Fraction of Eve's key-wire guesses that matched Alice's bit

    Around 0.5 means her outcomes carry no information about the key; None
    when she observed no key wire at all.
    """
    guesses = sum(t.eve_key_guesses for t in transcripts)
    if guesses == 0:
        return None
    return sum(t.eve_key_correct for t in transcripts) / guesses
