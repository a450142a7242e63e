"""
Interference Detection Analytics

Exact probabilities that a verification wire reads its intended bit after an
intercept-resend eavesdropper, and the resulting detection probability
Pr_e = 1 - prod Pr_c over verification wires.

Two models are provided:

- recursion: the per-qubit recursion. Pr_c(t, B) sums, over every outcome A of
  the earlier wires of the compartment, Pr_p(t, A, B) * Pr_r(theta_e(t, A, B)),
  where Pr_p multiplies the earlier wires' marginal correctness probabilities
  as if they were independent. A wire Eve measured reads correctly with 1/2.
  Because Pr_p is a product, the 2^t sum factorises; method="closed_form"
  evaluates it in O(t), method="enumerate" performs the literal sum and is
  capped.
- exact: the joint outcome distribution of the semiclassical QFT^dagger,
  wire by wire, each outcome drawn with its conditional probability given the
  earlier outcomes. This is what a statevector simulation converges to.
  exact_correct_probabilities gives the per-wire marginals of the same chain.

The recursion is not a bound on the exact model. On flat compartments a
single wire's marginal can be off by about 0.15 and a scheme's mean detection
by about 0.15 (triple_flat with two key qubits: 0.647 against 0.492).

All wire indices inside R, theta_e and Pr_c are compartment-local: local wire
0 is the first wire listed in the compartment and carries bit 0 of the
compartment's value.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .config_manager import get_logger
from .errors import CapacityError, QubitIndexError, SizeError
from .scheme_manager import VerificationScheme, bits_to_value, value_to_bits
from .statevector import (
    apply_inverse_qft,
    apply_scramble,
    encode_phases,
    new_plus_state,
    value_probabilities,
)

logger = get_logger("detection")

MAX_COMPARTMENT_ENUMERATION = 20
MAX_B_SPACE_BITS = 16
EVE_MEASURED_CORRECT = 0.5
BB84_SURVIVAL = 0.75

STATISTICS = ("mean", "min")
MODELS = ("recursion", "exact")
METHODS = ("closed_form", "enumerate")


@dataclass(frozen=True)
class EveTouchSet:
    """Wires Eve measured"""

    measured: FrozenSet[int] = frozenset()

    def validate(self, p: int) -> None:
        for wire in self.measured:
            if not 0 <= wire < p:
                raise QubitIndexError(f"Eve wire {wire} out of range for {p} qubits")

    def local(self, compartment: Sequence[int]) -> FrozenSet[int]:
        """Compartment-local indices of the touched wires"""
        return frozenset(t for t, wire in enumerate(compartment) if wire in self.measured)


@dataclass(frozen=True)
class DetectionReport:
    """Aggregated detection probability over intended outcomes B"""

    probability: float
    statistic: str
    b_space_size: int
    sampled: bool = False
    trials: int = 0
    confidence_halfwidth: float = 0.0
    model: str = "recursion"
    argmin_key: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1.0 + 1e-12:
            raise ValueError(f"probability {self.probability} outside [0, 1]")
        if self.confidence_halfwidth < 0:
            raise ValueError("confidence_halfwidth must be >= 0")


def prob_correct_given_phase_error(theta_e: float) -> float:
    """Pr_r(theta_e) = |(1 + e^(i theta_e)) / 2|^2 = cos^2(theta_e / 2)"""
    return math.cos(theta_e / 2.0) ** 2


def rotation_effect(t: int, j: int, a_j: int, b_j: int) -> float:
    """R(t, j, A, B) = (b_j - a_j) * pi / 2^(t - j) for an earlier wire j < t"""
    if not 0 <= j < t:
        raise QubitIndexError(f"Rotation source j={j} must satisfy 0 <= j < t={t}")
    return (b_j - a_j) * math.pi / (1 << (t - j))


def cumulative_phase_error(t: int, A: Sequence[int], B: Sequence[int]) -> float:
    """theta_e(t, A, B): sum of rotation effects of wires 0..t-1 on wire t"""
    if len(A) < t or len(B) < t:
        raise SizeError(f"Need at least {t} measured and intended bits, got {len(A)} and {len(B)}")
    return sum(rotation_effect(t, j, A[j], B[j]) for j in range(t))


def _enumerate_target(t: int, B: Tuple[int, ...], earlier: Sequence[float]) -> float:
    # Doubles the outcome list one earlier wire at a time; 2^t entries at the end
    probs = np.ones(1)
    theta = np.zeros(1)
    for j in range(t):
        miss = (2 * B[j] - 1) * math.pi / (1 << (t - j))
        probs = np.concatenate((probs * earlier[j], probs * (1.0 - earlier[j])))
        theta = np.concatenate((theta, theta + miss))
    return float(np.sum(probs * np.cos(theta / 2.0) ** 2))


def _closed_form_target(t: int, B: Tuple[int, ...], earlier: Sequence[float]) -> float:
    expectation = 1.0 + 0.0j
    for j in range(t):
        miss = (2 * B[j] - 1) * math.pi / (1 << (t - j))
        expectation *= earlier[j] + (1.0 - earlier[j]) * complex(math.cos(miss), math.sin(miss))
    return 0.5 * (1.0 + expectation.real)


@lru_cache(maxsize=65536)
def compartment_correct_probabilities(
    B: Tuple[int, ...],
    touched: FrozenSet[int],
    method: str = "closed_form",
    cap: int = MAX_COMPARTMENT_ENUMERATION,
) -> Tuple[float, ...]:
    """Pr_c(t, B) for every local wire t of one compartment, memoized per (B, touched)"""
    if method not in METHODS:
        raise ValueError(f"Unknown method '{method}' (known: {', '.join(METHODS)})")
    if method == "enumerate" and len(B) > cap:
        raise CapacityError(
            f"Compartment of {len(B)} qubits exceeds the enumeration cap of {cap}; "
            "use method='closed_form' or Monte Carlo estimation"
        )
    target = _enumerate_target if method == "enumerate" else _closed_form_target

    correct: List[float] = []
    for t in range(len(B)):
        if t in touched:
            correct.append(EVE_MEASURED_CORRECT)
        else:
            correct.append(target(t, B, correct))
    return tuple(correct)


def prob_qubit_correct(
    t: int,
    B: Sequence[int],
    eve: EveTouchSet,
    method: str = "enumerate",
    cap: int = MAX_COMPARTMENT_ENUMERATION,
    model: str = "recursion",
) -> float:
    """Pr_c(t, B) for local wire t of a compartment whose intended bits are B

    eve.measured holds compartment-local indices here. model="exact" returns
    the joint-distribution marginal instead of the recursion value; on flat
    compartments the two can differ by more than 0.1.
    """
    B = tuple(int(b) for b in B)
    if not 0 <= t < len(B):
        raise QubitIndexError(f"Target {t} outside compartment of {len(B)} qubits")
    eve.validate(len(B))
    if model == "exact":
        return exact_correct_probabilities(B, frozenset(eve.measured), cap)[t]
    if model != "recursion":
        raise ValueError(f"Unknown model '{model}' (known: {', '.join(MODELS)})")
    return compartment_correct_probabilities(B, frozenset(eve.measured), method, cap)[t]


def _compartments(
    scheme: VerificationScheme, B: Sequence[int], eve: EveTouchSet
) -> Iterable[Tuple[Tuple[int, ...], FrozenSet[int], Tuple[int, ...]]]:
    """Per compartment: (local B, local touched set, local verification indices)"""
    if len(B) != scheme.total_qubits:
        raise SizeError(f"B has {len(B)} bits, scheme has {scheme.total_qubits} qubits")
    eve.validate(scheme.total_qubits)
    intended = scheme.intended
    for group in scheme.compartments:
        local_b = tuple(int(B[w]) for w in group)
        local_v = tuple(t for t, w in enumerate(group) if w in intended)
        yield local_b, eve.local(group), local_v


def recursion_pass_probability(
    scheme: VerificationScheme,
    B: Sequence[int],
    eve: EveTouchSet,
    method: str = "closed_form",
    cap: int = MAX_COMPARTMENT_ENUMERATION,
) -> float:
    """prod over verification wires of Pr_c(t, B), compartment by compartment"""
    survival = 1.0
    for local_b, touched, local_v in _compartments(scheme, B, eve):
        if not local_v:
            continue
        correct = compartment_correct_probabilities(local_b, touched, method, cap)
        for t in local_v:
            survival *= correct[t]
    return survival


def _wrong_outcome_kick(B: Tuple[int, ...], t: int, shifts: np.ndarray) -> np.ndarray:
    # a wrong outcome on wire t adds (b_t - a_t) pi / 2^(t'-t) to each later wire t'
    kick = np.zeros(len(B))
    later = shifts > t
    kick[later] = (2 * B[t] - 1) * math.pi / np.exp2(shifts[later] - t)
    return kick


@lru_cache(maxsize=4096)
def exact_correct_probabilities(
    B: Tuple[int, ...],
    touched: FrozenSet[int],
    cap: int = MAX_COMPARTMENT_ENUMERATION,
) -> Tuple[float, ...]:
    """Pr[local wire t reads B[t]] for every t, from the joint outcome distribution

    Unlike the recursion, each wire is scored against the phase error actually
    left by the earlier outcomes that preceded it, so these marginals equal the
    statevector ones.
    """
    n = len(B)
    if n - 1 > cap:
        raise CapacityError(
            f"Compartment has {n - 1} branching qubits, above the exact cap of {cap}"
        )
    shifts = np.arange(n)

    probs = np.ones(1)
    phases = np.zeros((1, n))
    marginals: List[float] = []
    for t in range(n):
        if t in touched:
            correct = np.full(len(probs), EVE_MEASURED_CORRECT)
        else:
            correct = np.cos(phases[:, t] / 2.0) ** 2
        marginals.append(float(np.sum(probs * correct)))
        if t == n - 1:
            break
        probs = np.concatenate((probs * correct, probs * (1.0 - correct)))
        phases = np.concatenate((phases, phases + _wrong_outcome_kick(B, t, shifts)))
        keep = probs > 0.0
        probs, phases = probs[keep], phases[keep]
    return tuple(marginals)


def _exact_compartment_pass(
    B: Tuple[int, ...], touched: FrozenSet[int], verification: FrozenSet[int], cap: int
) -> float:
    n = len(B)
    branching = sum(1 for t in range(n) if t not in verification)
    if branching > cap:
        raise CapacityError(
            f"Compartment has {branching} non-verification qubits, above the exact cap of {cap}"
        )
    last_v = max(verification)
    shifts = np.arange(n)

    probs = np.ones(1)
    phases = np.zeros((1, n))
    for t in range(last_v + 1):
        residual = phases[:, t]
        if t in touched:
            correct = np.full(len(probs), EVE_MEASURED_CORRECT)
        else:
            correct = np.cos(residual / 2.0) ** 2
        if t in verification:
            probs = probs * correct
        else:
            kick = _wrong_outcome_kick(B, t, shifts)
            probs = np.concatenate((probs * correct, probs * (1.0 - correct)))
            phases = np.concatenate((phases, phases + kick))
        keep = probs > 0.0
        probs, phases = probs[keep], phases[keep]
        if not len(probs):
            return 0.0
    return float(np.sum(probs))


def exact_pass_probability(
    scheme: VerificationScheme,
    B: Sequence[int],
    eve: EveTouchSet,
    cap: int = MAX_COMPARTMENT_ENUMERATION,
) -> float:
    """Pr[every verification wire reads its intended bit] under the joint model"""
    survival = 1.0
    for local_b, touched, local_v in _compartments(scheme, B, eve):
        if local_v:
            survival *= _exact_compartment_pass(local_b, touched, frozenset(local_v), cap)
    return survival


def detection_probability(
    scheme: VerificationScheme,
    B: Sequence[int],
    eve: EveTouchSet,
    model: str = "recursion",
    method: str = "closed_form",
    cap: int = MAX_COMPARTMENT_ENUMERATION,
) -> float:
    """Pr_e(V, B) = 1 - Pr[all verification wires correct]"""
    if model == "recursion":
        survival = recursion_pass_probability(scheme, B, eve, method, cap)
    elif model == "exact":
        survival = exact_pass_probability(scheme, B, eve, cap)
    else:
        raise ValueError(f"Unknown model '{model}' (known: {', '.join(MODELS)})")
    return min(1.0, max(0.0, 1.0 - survival))


def key_assignments(num_key_bits: int) -> Iterable[Tuple[int, ...]]:
    """Every key assignment in increasing integer order (key bit i = bit i)"""
    for value in range(1 << num_key_bits):
        yield value_to_bits(value, num_key_bits)


def aggregate_detection(
    scheme: VerificationScheme,
    eve: EveTouchSet,
    statistic: str = "mean",
    b_mode: str = "exhaustive",
    samples: int = 0,
    seed: int = 0,
    model: str = "recursion",
    method: str = "closed_form",
    max_b_space_bits: int = MAX_B_SPACE_BITS,
    cap: int = MAX_COMPARTMENT_ENUMERATION,
    confidence: float = 0.95,
) -> DetectionReport:
    """Detection probability aggregated over key assignments

    Verification bits of B are fixed by the scheme; key bits range over all
    2^|k| assignments (exhaustive) or `samples` uniform draws (sampled). The
    min over a sample only bounds the true min from above; the report is
    flagged sampled.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"statistic must be mean or min, got {statistic}")
    k = scheme.num_key_qubits
    b_space_size = 1 << k

    if b_mode == "exhaustive":
        if k > max_b_space_bits:
            raise CapacityError(
                f"{k} key bits exceed the exhaustive B-space cap of {max_b_space_bits}; "
                "use sampled mode"
            )
        keys = list(key_assignments(k))
    elif b_mode == "sampled":
        if samples < 1:
            raise ValueError("sampled mode needs samples >= 1")
        rng = np.random.default_rng(seed)
        keys = [tuple(int(b) for b in row) for row in rng.integers(0, 2, size=(samples, k))]
    else:
        raise ValueError(f"Unknown b_mode '{b_mode}'")

    values = [
        detection_probability(scheme, scheme.intended_bits(key), eve, model, method, cap)
        for key in keys
    ]
    logger.debug(f"{scheme.name}: evaluated {len(values)} key assignments ({model})")

    if statistic == "mean":
        probability = math.fsum(values) / len(values)
        argmin_key = None
    else:
        best = int(np.argmin(values))
        probability = values[best]
        argmin_key = keys[best]

    halfwidth = 0.0
    if b_mode == "sampled" and statistic == "mean" and len(values) > 1:
        z = float(stats.norm.ppf(0.5 + confidence / 2.0))
        halfwidth = z * float(np.std(values, ddof=1)) / math.sqrt(len(values))

    return DetectionReport(
        probability=probability,
        statistic=statistic,
        b_space_size=b_space_size,
        sampled=b_mode == "sampled",
        trials=len(values) if b_mode == "sampled" else 0,
        confidence_halfwidth=halfwidth,
        model=model,
        argmin_key=argmin_key,
    )


def bb84_detection_probability(
    V: Iterable[int], eve: EveTouchSet, mismatch_limit: int = 0
) -> float:
    """Pr[more than mismatch_limit of the |V & E| exposed wires mismatch]

    Each exposed verification wire mismatches independently with 1/4, so the
    limit-0 case is 1 - 0.75^|V & E|.
    """
    if mismatch_limit < 0:
        raise ValueError(f"mismatch_limit must be >= 0, got {mismatch_limit}")
    exposed = len(set(V) & set(eve.measured))
    if mismatch_limit == 0:
        return 1.0 - BB84_SURVIVAL**exposed
    return float(stats.binom.sf(mismatch_limit, exposed, 1.0 - BB84_SURVIVAL))


def bb84_expected_detection(num_verification: int, fraction_measured: float) -> float:
    """1 - 0.75^(Pr[q in V] * |V|) for an Eve measuring a random fraction of wires"""
    if not 0.0 <= fraction_measured <= 1.0:
        raise ValueError(f"fraction_measured must be in [0, 1], got {fraction_measured}")
    return 1.0 - BB84_SURVIVAL ** (fraction_measured * num_verification)


def _oracle_compartment(
    B: Tuple[int, ...], touched: FrozenSet[int], verification: Tuple[int, ...], grid_points: int
) -> Tuple[float, np.ndarray]:
    n = len(B)
    base = encode_phases(bits_to_value(B), n)
    touched_wires = sorted(touched)
    grid = 2.0 * math.pi * np.arange(grid_points) / grid_points

    outcomes = np.arange(1 << n)
    bits = (outcomes[:, None] >> np.arange(n)) & 1
    correct_bits = bits == np.array(B)
    if verification:
        passing = np.all(correct_bits[:, list(verification)], axis=1)
    else:
        passing = np.ones(len(outcomes), dtype=bool)

    pass_total = 0.0
    marginal_total = np.zeros(n)
    combos = 0
    for resent in itertools.product(grid, repeat=len(touched_wires)):
        phases = base.copy()
        phases[touched_wires] = resent
        state = apply_inverse_qft(apply_scramble(new_plus_state(n), phases))
        probs = value_probabilities(state)
        pass_total += float(np.sum(probs[passing]))
        marginal_total += probs @ correct_bits
        combos += 1
    return pass_total / combos, marginal_total / combos


def phase_oracle(
    scheme: VerificationScheme, B: Sequence[int], eve: EveTouchSet, grid_points: int = 64
) -> Tuple[float, Dict[int, float]]:
    """Statevector brute-force oracle

    Every wire Eve measured reaches Bob's QFT^dagger, after he undoes his
    scramble, with a phase uniform over [0, 2pi) that no longer depends on
    the message. The oracle replaces those phases by a uniform grid, decodes
    each grid point with the statevector simulator, and averages the exact
    Born probabilities. Outcome probabilities have degree one in each
    e^(i phase), so any grid of two or more points integrates them exactly.

    Returns:
        (pass probability, {wire: probability that wire reads its intended bit})
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    survival = 1.0
    marginals: Dict[int, float] = {}
    per_compartment = zip(scheme.compartments, _compartments(scheme, B, eve))
    for group, (local_b, touched, local_v) in per_compartment:
        passed, local_marginals = _oracle_compartment(local_b, touched, local_v, grid_points)
        survival *= passed
        for t, wire in enumerate(group):
            marginals[wire] = float(local_marginals[t])
    return survival, marginals

