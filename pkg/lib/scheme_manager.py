"""
Verification Scheme Management

This module defines verification schemes (which wires carry verification bits,
what those bits are meant to read, how the wires are split into independently
QFT-encoded compartments), builds the six built-in layouts, assembles a
transmitted message from key bits, and extracts key and verdict from a
measured message.

Built-in kinds:
- bb84_random         random verification placement, one wire per compartment
- qft_random          random verification placement, one QFT compartment
- pair_compartment    key, v per compartment
- pair_flat           key, v, key, v, ... in one compartment
- triple_compartment  key, v, v per compartment
- triple_flat         key, v, v, key, v, v, ... in one compartment

Scheme documents are JSON:
    {"total_qubits": int, "verification": [{"index": int, "bit": 0|1}],
     "compartments": [[int, ...], ...], "public": bool}
"""

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import SchemeError, SizeError

SCHEME_FIELDS = ("total_qubits", "verification", "compartments", "public")
VERIFICATION_FIELDS = ("index", "bit")


class SchemeKind(Enum):
    """Built-in verification layouts"""

    BB84_RANDOM = "bb84_random"
    QFT_RANDOM = "qft_random"
    PAIR_COMPARTMENT = "pair_compartment"
    PAIR_FLAT = "pair_flat"
    TRIPLE_COMPARTMENT = "triple_compartment"
    TRIPLE_FLAT = "triple_flat"


class Verdict(Enum):
    """Outcome of the verification comparison"""

    PASS = "pass"
    FAIL = "fail"


@dataclass(frozen=True)
class VerificationScheme:
    """Verification positions, intended bits and compartment partition"""

    total_qubits: int
    verification: Tuple[Tuple[int, int], ...]
    compartments: Tuple[Tuple[int, ...], ...]
    public: bool = True
    kind: Optional[str] = None

    def __post_init__(self):
        """Validate positions and partition"""
        p = self.total_qubits
        if p < 1:
            raise SchemeError(f"total_qubits must be >= 1, got {p}")

        indices = [index for index, _ in self.verification]
        if len(set(indices)) != len(indices):
            raise SchemeError(f"Duplicate verification indices: {sorted(indices)}")
        for index, bit in self.verification:
            if not 0 <= index < p:
                raise SchemeError(f"Verification index {index} out of range for {p} qubits")
            if bit not in (0, 1):
                raise SchemeError(f"Intended bit at {index} must be 0 or 1, got {bit}")

        covered = [wire for group in self.compartments for wire in group]
        if any(len(group) == 0 for group in self.compartments):
            raise SchemeError("Compartments must not be empty")
        if sorted(covered) != list(range(p)):
            raise SchemeError(
                f"Compartments must partition 0..{p - 1} exactly, got {self.compartments}"
            )

    @property
    def verification_positions(self) -> Tuple[int, ...]:
        return tuple(sorted(index for index, _ in self.verification))

    @property
    def intended(self) -> Dict[int, int]:
        """Verification wire -> intended bit"""
        return dict(self.verification)

    @property
    def key_positions(self) -> Tuple[int, ...]:
        verification = self.intended
        return tuple(i for i in range(self.total_qubits) if i not in verification)

    @property
    def num_key_qubits(self) -> int:
        return self.total_qubits - len(self.verification)

    @property
    def name(self) -> str:
        return self.kind or "custom"

    def intended_bits(self, key_bits: Sequence[int]) -> Tuple[int, ...]:
        """Full intended outcome B for the given key assignment"""
        return assemble_message(key_bits, self).bits


@dataclass(frozen=True)
class Message:
    """Transmitted or measured bit string over all p wires"""

    p: int
    bits: Tuple[int, ...]
    key_bits: Tuple[int, ...]
    value: int


@dataclass(frozen=True)
class Extraction:
    """Result of splitting a measured message into key and verification bits"""

    key: Tuple[int, ...]
    verification_observed: Tuple[int, ...]
    verdict: Verdict
    mismatches: int


def bits_to_value(bits: Sequence[int]) -> int:
    """bit t of the value is bits[t]"""
    return sum(int(bit) << t for t, bit in enumerate(bits))


def value_to_bits(value: int, p: int) -> Tuple[int, ...]:
    return tuple((value >> t) & 1 for t in range(p))


def message_from_bits(bits: Sequence[int], scheme: VerificationScheme) -> Message:
    """Message over the scheme's wires; key_bits are the bits at key positions"""
    bits = tuple(int(b) for b in bits)
    if len(bits) != scheme.total_qubits:
        raise SizeError(f"Expected {scheme.total_qubits} bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise SchemeError(f"Message bits must be 0 or 1: {bits}")
    key_bits = tuple(bits[i] for i in scheme.key_positions)
    return Message(p=len(bits), bits=bits, key_bits=key_bits, value=bits_to_value(bits))


def message_from_value(value: int, scheme: VerificationScheme) -> Message:
    return message_from_bits(value_to_bits(value, scheme.total_qubits), scheme)


def _layout(kind: SchemeKind, k: int, rng: np.random.Generator) -> VerificationScheme:
    if kind in (SchemeKind.BB84_RANDOM, SchemeKind.QFT_RANDOM):
        # |V| = |k| by default
        p = 2 * k
        positions = sorted(int(i) for i in rng.choice(p, size=k, replace=False))
        bits = [int(b) for b in rng.integers(0, 2, size=k)]
        verification = tuple(zip(positions, bits))
        if kind is SchemeKind.BB84_RANDOM:
            compartments = tuple((i,) for i in range(p))
        else:
            compartments = (tuple(range(p)),)
        return VerificationScheme(p, verification, compartments, public=False, kind=kind.value)

    group = 2 if kind in (SchemeKind.PAIR_COMPARTMENT, SchemeKind.PAIR_FLAT) else 3
    p = group * k
    verification = tuple(
        (start + offset, 0) for start in range(0, p, group) for offset in range(1, group)
    )
    if kind in (SchemeKind.PAIR_COMPARTMENT, SchemeKind.TRIPLE_COMPARTMENT):
        compartments = tuple(tuple(range(s, s + group)) for s in range(0, p, group))
    else:
        compartments = (tuple(range(p)),)
    return VerificationScheme(p, verification, compartments, public=True, kind=kind.value)


def build_scheme(
    kind: str, num_key_qubits: int, rng: Optional[np.random.Generator] = None
) -> VerificationScheme:
    """Build one of the six built-in layouts

    Args:
        kind: SchemeKind value, e.g. "pair_compartment"
        num_key_qubits: key length |k| >= 1
        rng: needed by the *_random kinds

    Raises:
        SchemeError: unknown kind or bad size
    """
    try:
        scheme_kind = SchemeKind(kind)
    except ValueError:
        known = ", ".join(k.value for k in SchemeKind)
        raise SchemeError(f"Unknown scheme kind '{kind}' (known: {known})") from None
    if num_key_qubits < 1:
        raise SchemeError(f"num_key_qubits must be >= 1, got {num_key_qubits}")
    if rng is None:
        rng = np.random.default_rng(0)
    return _layout(scheme_kind, num_key_qubits, rng)


def assemble_message(key_bits: Sequence[int], scheme: VerificationScheme) -> Message:
    """Insert the intended verification bits around the key bits"""
    key_bits = [int(b) for b in key_bits]
    if len(key_bits) != scheme.num_key_qubits:
        raise SizeError(
            f"Scheme has {scheme.num_key_qubits} key positions, got {len(key_bits)} key bits"
        )
    intended = scheme.intended
    remaining = iter(key_bits)
    bits = [intended[i] if i in intended else next(remaining) for i in range(scheme.total_qubits)]
    return message_from_bits(bits, scheme)


def extract_key(
    measured: Message, scheme: VerificationScheme, mismatch_limit: int = 0
) -> Extraction:
    """Split a measured message; pass iff Hamming(v', v) <= mismatch_limit"""
    if measured.p != scheme.total_qubits:
        raise SizeError(
            f"Measured message has {measured.p} bits, scheme expects {scheme.total_qubits}"
        )
    if mismatch_limit < 0:
        raise SchemeError(f"mismatch_limit must be >= 0, got {mismatch_limit}")

    positions = scheme.verification_positions
    intended = scheme.intended
    observed = tuple(measured.bits[i] for i in positions)
    mismatches = sum(1 for i, bit in zip(positions, observed) if bit != intended[i])
    key = tuple(measured.bits[i] for i in scheme.key_positions)
    verdict = Verdict.PASS if mismatches <= mismatch_limit else Verdict.FAIL
    return Extraction(key=key, verification_observed=observed, verdict=verdict, mismatches=mismatches)


def scheme_to_dict(scheme: VerificationScheme) -> Dict[str, Any]:
    return {
        "total_qubits": scheme.total_qubits,
        "verification": [
            {"index": index, "bit": bit} for index, bit in sorted(scheme.verification)
        ],
        "compartments": [list(group) for group in scheme.compartments],
        "public": scheme.public,
    }


def _reject_unknown(data: Dict[str, Any], allowed: Iterable[str], where: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise SchemeError(f"Unknown fields in {where}: {', '.join(unknown)}")


def _integer(value: Any, what: str) -> int:
    # JSON true/false decode to bool, which is an int subclass
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemeError(f"{what} must be an integer, got {value!r}")
    return value


def scheme_from_dict(data: Dict[str, Any], kind: Optional[str] = None) -> VerificationScheme:
    """Parse a scheme document; unknown fields are rejected"""
    if not isinstance(data, dict):
        raise SchemeError("Scheme document must be a JSON object")
    _reject_unknown(data, SCHEME_FIELDS, "scheme")
    missing = [f for f in SCHEME_FIELDS if f not in data]
    if missing:
        raise SchemeError(f"Missing fields in scheme: {', '.join(missing)}")

    if not isinstance(data["verification"], list):
        raise SchemeError("verification must be a list of {index, bit} objects")
    verification: List[Tuple[int, int]] = []
    for entry in data["verification"]:
        if not isinstance(entry, dict):
            raise SchemeError(f"Verification entry must be an object: {entry!r}")
        _reject_unknown(entry, VERIFICATION_FIELDS, "verification entry")
        if set(entry) != set(VERIFICATION_FIELDS):
            raise SchemeError(f"Verification entry needs index and bit: {entry!r}")
        verification.append((_integer(entry["index"], "index"), _integer(entry["bit"], "bit")))

    groups = data["compartments"]
    if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
        raise SchemeError("compartments must be a list of wire lists")

    if not isinstance(data["public"], bool):
        raise SchemeError("public must be a boolean")

    return VerificationScheme(
        total_qubits=_integer(data["total_qubits"], "total_qubits"),
        verification=tuple(verification),
        compartments=tuple(tuple(_integer(w, "compartment wire") for w in g) for g in groups),
        public=data["public"],
        kind=kind,
    )


def load_scheme(path: Path) -> VerificationScheme:
    """Read a scheme JSON file"""
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise SchemeError(f"Scheme file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise SchemeError(f"Invalid JSON in scheme file {path}: {e}") from e
    return scheme_from_dict(data, kind=path.stem)


def dump_scheme(scheme: VerificationScheme, path: Path) -> None:
    with open(path, "w") as f:
        json.dump(scheme_to_dict(scheme), f, indent=2)
        f.write("\n")
