"""
Eavesdropper Strategies

Eve is an intercept-resend attacker. On a tapped channel pass she measures
each targeted wire and forwards her post-measurement state.

Basis models:
- x_basis_with_random_unscramble: Eve cannot know the secret scramble phases,
  so she undoes a uniformly random phase, measures in the X basis and resends
  H|bit> under a fresh uniformly random phase (QFT protocols). The resent
  phase is independent of the intercepted one, so a touched wire decodes as
  a fair coin.
- random_zx: measure in Z or X with equal probability and resend the measured
  state (BB84). A forced per-copy basis schedule is used by the many-copies
  attack.

Descriptors accepted from the command line:
    none | full | keys | subset=i,j,...
and from JSON:
    {"kind": "...", "indices": [...], "copies": n, "passes": [...]}
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .detection_engine import EveTouchSet
from .errors import ParameterError, QubitIndexError, SchemeError
from .scheme_manager import VerificationScheme
from .statevector import Statevector, apply_hadamard, apply_phase, measure_qubit

Z_BASIS = "z"
X_BASIS = "x"
STRATEGY_FIELDS = ("kind", "indices", "copies", "passes", "basis_model")


class EveKind(Enum):
    NONE = "none"
    FULL = "full"
    SUBSET = "subset"
    SCHEME_AWARE = "scheme_aware"
    MANY_COPIES = "many_copies"


class BasisModel(Enum):
    X_RANDOM_UNSCRAMBLE = "x_basis_with_random_unscramble"
    RANDOM_ZX = "random_zx"


@dataclass(frozen=True)
class Observation:
    """One of Eve's single-wire measurement results"""

    wire: int
    bit: int
    basis: str = X_BASIS


@dataclass(frozen=True)
class EveStrategy:
    """Immutable attacker descriptor"""

    kind: EveKind = EveKind.NONE
    indices: Tuple[int, ...] = ()
    copies: int = 1
    basis_model: BasisModel = BasisModel.X_RANDOM_UNSCRAMBLE
    passes_tapped: FrozenSet[int] = field(default_factory=lambda: frozenset({2}))

    def __post_init__(self):
        if self.copies < 1:
            raise SchemeError(f"copies must be >= 1, got {self.copies}")
        if any(i < 0 for i in self.indices):
            raise SchemeError(f"Eve indices must be non-negative: {self.indices}")
        if self.kind in (EveKind.SUBSET, EveKind.MANY_COPIES) and not self.indices:
            raise SchemeError(f"{self.kind.value} strategy needs target indices")

    @property
    def is_passive(self) -> bool:
        return self.kind is EveKind.NONE

    def targets(self, scheme: VerificationScheme) -> Tuple[int, ...]:
        """Wires this strategy measures on a tapped pass"""
        p = scheme.total_qubits
        if self.kind is EveKind.NONE:
            return ()
        if self.kind is EveKind.FULL:
            return tuple(range(p))
        if self.kind is EveKind.SCHEME_AWARE:
            return scheme.key_positions
        for wire in self.indices:
            if wire >= p:
                raise QubitIndexError(f"Eve wire {wire} out of range for {p} qubits")
        return tuple(sorted(set(self.indices)))

    def touch_set(self, scheme: VerificationScheme) -> EveTouchSet:
        return EveTouchSet(frozenset(self.targets(scheme)))

    def with_basis_model(self, basis_model: BasisModel) -> "EveStrategy":
        return EveStrategy(self.kind, self.indices, self.copies, basis_model, self.passes_tapped)


NO_EVE = EveStrategy()


def parse_eve_descriptor(text: str, passes: Sequence[int] = (2,)) -> EveStrategy:
    """Parse the command line form none | full | keys | subset=i,j,..."""
    text = (text or "none").strip()
    tapped = frozenset(int(p) for p in passes)
    if text == "none":
        return EveStrategy(passes_tapped=tapped)
    if text == "full":
        return EveStrategy(EveKind.FULL, passes_tapped=tapped)
    if text == "keys":
        return EveStrategy(EveKind.SCHEME_AWARE, passes_tapped=tapped)
    if text.startswith("subset="):
        raw = text[len("subset="):]
        try:
            indices = tuple(int(i) for i in raw.split(",") if i.strip() != "")
        except ValueError:
            raise SchemeError(f"Invalid subset indices: {raw!r}") from None
        return EveStrategy(EveKind.SUBSET, indices=indices, passes_tapped=tapped)
    raise SchemeError(f"Unknown eve descriptor {text!r} (expected none, full, keys or subset=i,j)")


def resolve_touch_set(scheme: VerificationScheme, descriptor: str) -> EveTouchSet:
    """Wires the descriptor measures on this scheme"""
    touch = parse_eve_descriptor(descriptor).touch_set(scheme)
    touch.validate(scheme.total_qubits)
    return touch


def strategy_from_dict(data: Dict[str, Any]) -> EveStrategy:
    """Parse the JSON strategy descriptor; unknown fields are rejected"""
    unknown = sorted(set(data) - set(STRATEGY_FIELDS))
    if unknown:
        raise SchemeError(f"Unknown fields in strategy: {', '.join(unknown)}")
    kind_name = data.get("kind", "none")
    if kind_name == "keys":
        kind_name = EveKind.SCHEME_AWARE.value
    try:
        kind = EveKind(kind_name)
        basis_model = BasisModel(data.get("basis_model", BasisModel.X_RANDOM_UNSCRAMBLE.value))
    except ValueError as e:
        raise SchemeError(str(e)) from None
    return EveStrategy(
        kind=kind,
        indices=tuple(int(i) for i in data.get("indices", ())),
        copies=int(data.get("copies", 1)),
        basis_model=basis_model,
        passes_tapped=frozenset(int(p) for p in data.get("passes", (2,))),
    )


def strategy_to_dict(strategy: EveStrategy) -> Dict[str, Any]:
    return {
        "kind": strategy.kind.value,
        "indices": list(strategy.indices),
        "copies": strategy.copies,
        "passes": sorted(strategy.passes_tapped),
        "basis_model": strategy.basis_model.value,
    }


def measure_x_with_random_unscramble(
    state: Statevector, wire: int, rng: np.random.Generator
) -> Tuple[int, Statevector]:
    """Undo a random phase guess, measure in X, resend H|bit> with a fresh random phase

    The resent phase is drawn independently of the guess, so nothing about
    the intercepted phase survives on the wire and Bob reads it as a fair coin.
    """
    guess = rng.uniform(0.0, 2.0 * math.pi)
    state = apply_hadamard(apply_phase(state, wire, -guess), wire)
    bit, state = measure_qubit(state, wire, rng)
    resent = rng.uniform(0.0, 2.0 * math.pi)
    return bit, apply_phase(apply_hadamard(state, wire), wire, resent)


def measure_in_basis(
    state: Statevector, wire: int, basis: str, rng: np.random.Generator
) -> Tuple[int, Statevector]:
    """Z or X measurement; the collapsed state is what gets resent"""
    if basis == Z_BASIS:
        return measure_qubit(state, wire, rng)
    if basis == X_BASIS:
        bit, state = measure_qubit(apply_hadamard(state, wire), wire, rng)
        return bit, apply_hadamard(state, wire)
    raise ValueError(f"Unknown basis {basis!r}")


def intercept(
    strategy: EveStrategy,
    state: Statevector,
    pass_index: int,
    rng: np.random.Generator,
    scheme: Optional[VerificationScheme] = None,
    wires: Optional[Sequence[int]] = None,
) -> Tuple[Statevector, List[Observation]]:
    """Apply Eve to one channel pass

    Args:
        strategy: attacker descriptor
        state: state in transit
        pass_index: 1-based channel pass number
        rng: Eve's random source
        scheme: resolves scheme-aware targets; full-state wires are used otherwise
        wires: explicit target wires, overriding the strategy's

    Returns:
        (state forwarded to the receiver, observations)
    """
    if strategy.is_passive or pass_index not in strategy.passes_tapped:
        return state, []

    if wires is None:
        if scheme is None:
            scheme = VerificationScheme(
                state.num_qubits, (), (tuple(range(state.num_qubits)),)
            )
        wires = strategy.targets(scheme)

    observations: List[Observation] = []
    for wire in wires:
        if not 0 <= wire < state.num_qubits:
            raise QubitIndexError(f"Eve wire {wire} out of range for {state.num_qubits} qubits")
        if strategy.basis_model is BasisModel.X_RANDOM_UNSCRAMBLE:
            bit, state = measure_x_with_random_unscramble(state, wire, rng)
            observations.append(Observation(wire, bit, X_BASIS))
        else:
            basis = Z_BASIS if rng.integers(0, 2) == 0 else X_BASIS
            bit, state = measure_in_basis(state, wire, basis, rng)
            observations.append(Observation(wire, bit, basis))
    return state, observations


def alternating_basis(copy_index: int) -> str:
    """Many-copies schedule: Z, X, Z, X, ..."""
    return Z_BASIS if copy_index % 2 == 0 else X_BASIS


def infer_from_copies(observations: Sequence[Observation]) -> Optional[int]:
    """Pick the basis whose outcomes never changed; None when ambiguous

    The preparation basis always gives the same outcome. The other basis gives
    a fair coin each copy, so it only looks consistent by chance.
    """
    by_basis: Dict[str, List[int]] = {}
    for observation in observations:
        by_basis.setdefault(observation.basis, []).append(observation.bit)

    consistent = {
        basis: bits[0]
        for basis, bits in by_basis.items()
        if len(bits) >= 2 and len(set(bits)) == 1
    }
    if len(by_basis) < 2 or len(consistent) != 1:
        return None
    return next(iter(consistent.values()))


@dataclass
class ManyCopiesResult:
    """Outcome of attacking one wire across repeated identical messages"""

    protocol: str
    target_wire: int
    secret_bit: int
    inferred_bit: Optional[int]
    detected: bool
    observations: List[Observation]
    transcripts: List[Any] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        return self.inferred_bit is not None and self.inferred_bit == self.secret_bit


def many_copies_attack(
    protocol: str,
    target_wire: int,
    copies: int,
    rng: np.random.Generator,
    params: Any,
) -> ManyCopiesResult:
    """Eve measures one wire of `copies` identical messages

    bb84: Alice's key bits and sending bases stay fixed across copies and Eve
    alternates Z and X on the target wire, so the preparation basis shows up
    as the one whose outcomes never change.

    two_pass: Bob draws a fresh scramble per copy, so each X measurement of
    the target wire is a fair coin and nothing accumulates.

    Args:
        protocol: "bb84" or "two_pass"
        target_wire: wire Eve measures on every copy
        copies: number of identical messages (>= 2)
        rng: random source for the whole attack
        params: ProtocolParams for the runs
    """
    # protocol_manager imports this module
    from .protocol_manager import Protocol, run_bb84, run_two_pass_qkd

    if copies < 2:
        raise ParameterError(f"The many-copies attack needs copies >= 2, got {copies}")
    scheme = params.scheme
    if not 0 <= target_wire < scheme.total_qubits:
        raise QubitIndexError(
            f"Target wire {target_wire} out of range for {scheme.total_qubits} qubits"
        )

    key = tuple(int(b) for b in rng.integers(0, 2, size=scheme.num_key_qubits))
    transcripts = []
    if protocol == Protocol.BB84.value:
        strategy = EveStrategy(
            EveKind.MANY_COPIES,
            indices=(target_wire,),
            copies=copies,
            basis_model=BasisModel.RANDOM_ZX,
            passes_tapped=frozenset({1}),
        )
        bases = [Z_BASIS if b == 0 else X_BASIS for b in rng.integers(0, 2, size=scheme.total_qubits)]
        for copy_index in range(copies):
            transcripts.append(
                run_bb84(
                    params,
                    strategy,
                    rng,
                    key_bits=key,
                    alice_bases=bases,
                    eve_bases={target_wire: alternating_basis(copy_index)},
                    sift="discard",
                )
            )
    elif protocol == Protocol.TWO_PASS.value:
        strategy = EveStrategy(
            EveKind.MANY_COPIES, indices=(target_wire,), copies=copies, passes_tapped=frozenset({2})
        )
        for _ in range(copies):
            transcripts.append(run_two_pass_qkd(params, strategy, rng, key_bits=key))
    else:
        raise SchemeError(f"Many-copies attack supports bb84 and two_pass, got '{protocol}'")

    observations = [
        obs for transcript in transcripts for obs in transcript.eve_observations
        if obs.wire == target_wire
    ]
    secret_bit = transcripts[0].intended_message.bits[target_wire]
    return ManyCopiesResult(
        protocol=protocol,
        target_wire=target_wire,
        secret_bit=secret_bit,
        inferred_bit=infer_from_copies(observations),
        detected=any(t.detected for t in transcripts),
        observations=observations,
        transcripts=transcripts,
    )
