"""
Monte Carlo Detection Estimates

Empirical detection probabilities from repeated protocol runs, and the
cross-validation harness that checks them against the analytic engine.

Trial i always draws from numpy.random.default_rng([seed, i]), so an estimate
depends only on (seed, trials) and not on how trials are scheduled.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .adversary import NO_EVE, EveKind, EveStrategy
from .config_manager import get_logger
from .detection_engine import (
    MAX_B_SPACE_BITS,
    MAX_COMPARTMENT_ENUMERATION,
    DetectionReport,
    EveTouchSet,
    aggregate_detection,
    bb84_detection_probability,
)
from .errors import ParameterError, SchemeError, SizeError
from .protocol_manager import (
    Protocol,
    ProtocolParams,
    Transcript,
    run_protocol,
    run_two_pass_qkd,
)
from .scheme_manager import VerificationScheme
from .statevector import MAX_QUBITS, NORM_TOLERANCE

logger = get_logger("montecarlo")

DEFAULT_SIGMA = 3.0
DEFAULT_AGREEMENT_FLOOR = 1e-3

BPolicy = Union[str, Sequence[int]]


@dataclass(frozen=True)
class Estimate:
    """Fraction of trials whose verdict was fail"""

    mean: float
    standard_error: float
    trials: int
    seed: int
    detections: int = 0

    @classmethod
    def from_count(cls, detections: int, trials: int, seed: int) -> "Estimate":
        mean = detections / trials
        return cls(
            mean=mean,
            standard_error=math.sqrt(mean * (1.0 - mean) / trials),
            trials=trials,
            seed=seed,
            detections=detections,
        )


@dataclass(frozen=True)
class CrossValidation:
    """Analytic value, empirical estimate and their agreement"""

    analytic: DetectionReport
    empirical: Estimate
    agree: bool
    tolerance: float

    @property
    def difference(self) -> float:
        return abs(self.analytic.probability - self.empirical.mean)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    if seed < 0:
        raise ParameterError(f"seed must be >= 0, got {seed}")
    return np.random.default_rng([seed, trial])


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")


def _fixed_key(scheme: VerificationScheme, bits: Sequence[int]) -> Tuple[int, ...]:
    """Key bits from either a key assignment or a full intended outcome B"""
    bits = tuple(int(b) for b in bits)
    if len(bits) == scheme.num_key_qubits:
        return bits
    if len(bits) == scheme.total_qubits:
        for index, bit in scheme.intended.items():
            if bits[index] != bit:
                raise SchemeError(f"B[{index}] = {bits[index]} contradicts intended bit {bit}")
        return tuple(bits[i] for i in scheme.key_positions)
    raise SizeError(
        f"Fixed B needs {scheme.num_key_qubits} key bits or {scheme.total_qubits} bits, got {len(bits)}"
    )


def strategy_for_touch_set(eve: EveTouchSet) -> EveStrategy:
    """Pass-2 strategy measuring exactly the touched wires"""
    if not eve.measured:
        return NO_EVE
    return EveStrategy(EveKind.SUBSET, indices=tuple(sorted(eve.measured)))


def estimate_detection(
    protocol: str,
    params: ProtocolParams,
    eve: EveStrategy,
    b_policy: BPolicy = "random",
    trials: int = 10000,
    seed: int = 0,
    on_transcript: Optional[Callable[[int, Transcript], None]] = None,
) -> Estimate:
    """Run `trials` independent protocol runs and count fail verdicts

    Args:
        protocol: two_pass, three_pass or bb84
        params: scheme and mismatch limit
        eve: attacker for every run
        b_policy: "random" draws fresh key bits per trial (mean statistic);
                  a bit sequence fixes B for every trial
        trials: number of runs
        seed: base seed; trial i uses default_rng([seed, i])
        on_transcript: called with (trial, transcript) after every run
    """
    _check_trials(trials)
    key = None if isinstance(b_policy, str) else _fixed_key(params.scheme, b_policy)
    if isinstance(b_policy, str) and b_policy != "random":
        raise ValueError(f"b_policy must be 'random' or a bit sequence, got {b_policy!r}")

    detections = 0
    for trial in range(trials):
        transcript = run_protocol(protocol, params, eve, trial_rng(seed, trial), key)
        if on_transcript is not None:
            on_transcript(trial, transcript)
        detections += int(transcript.detected)

    estimate = Estimate.from_count(detections, trials, seed)
    logger.debug(
        f"{protocol} on {params.scheme.name}: {detections}/{trials} detected "
        f"(mean {estimate.mean:.6f} +/- {estimate.standard_error:.6f})"
    )
    return estimate


def crossvalidate(
    scheme: VerificationScheme,
    eve: EveTouchSet,
    statistic: str = "mean",
    trials: int = 10000,
    seed: int = 0,
    model: str = "exact",
    protocol: str = "two_pass",
    mismatch_limit: int = 0,
    sigma: float = DEFAULT_SIGMA,
    floor: float = DEFAULT_AGREEMENT_FLOOR,
    analytic_override: Optional[float] = None,
    max_qubits: int = MAX_QUBITS,
    max_b_space_bits: int = MAX_B_SPACE_BITS,
    cap: int = MAX_COMPARTMENT_ENUMERATION,
    norm_tolerance: float = NORM_TOLERANCE,
) -> CrossValidation:
    """Compare the analytic detection probability with simulation

    mean compares against runs with fresh random key bits; min compares
    against runs with B fixed at the key assignment attaining the analytic
    minimum. With protocol bb84 the analytic side is the chance that more
    than mismatch_limit exposed verification wires mismatch.

    Args:
        analytic_override: replaces the analytic probability before the
            comparison (negative controls)

    Returns:
        CrossValidation with agree = |analytic - empirical| <= sigma * se + floor
    """
    eve.validate(scheme.total_qubits)
    if mismatch_limit != 0 and protocol != Protocol.BB84.value:
        raise SchemeError("Analytic QFT detection assumes mismatch_limit 0")
    params = ProtocolParams(scheme, mismatch_limit, seed, max_qubits, norm_tolerance)
    strategy = strategy_for_touch_set(eve)

    if protocol == Protocol.BB84.value:
        analytic = DetectionReport(
            probability=bb84_detection_probability(
                scheme.verification_positions, eve, mismatch_limit
            ),
            statistic=statistic,
            b_space_size=1 << scheme.num_key_qubits,
            model="bb84",
        )
        b_policy: BPolicy = "random"
    else:
        analytic = aggregate_detection(
            scheme,
            eve,
            statistic,
            seed=seed,
            model=model,
            max_b_space_bits=max_b_space_bits,
            cap=cap,
        )
        b_policy = analytic.argmin_key if statistic == "min" else "random"

    empirical = estimate_detection(protocol, params, strategy, b_policy, trials, seed)

    if analytic_override is not None:
        analytic = DetectionReport(
            probability=analytic_override,
            statistic=analytic.statistic,
            b_space_size=analytic.b_space_size,
            model=analytic.model,
            argmin_key=analytic.argmin_key,
        )

    tolerance = sigma * empirical.standard_error + floor
    agree = abs(analytic.probability - empirical.mean) <= tolerance
    logger.info(
        f"{scheme.name} {statistic} ({analytic.model}): analytic {analytic.probability:.6f}, "
        f"empirical {empirical.mean:.6f}, {'agree' if agree else 'DISAGREE'}"
    )
    return CrossValidation(analytic=analytic, empirical=empirical, agree=agree, tolerance=tolerance)


def estimate_many_copies_detection(
    scheme: VerificationScheme,
    eve: EveStrategy,
    copies: int,
    trials: int = 10000,
    seed: int = 0,
    key_bits: Optional[Sequence[int]] = None,
    mismatch_limit: int = 0,
) -> Estimate:
    """Cumulative detection over `copies` two-pass runs of the same message

    Each copy gets a fresh scramble, so per-copy detections are independent
    and the expectation for a fixed B is 1 - (1 - Pr_e)^copies.
    """
    _check_trials(trials)
    if copies < 1:
        raise ParameterError(f"copies must be >= 1, got {copies}")
    params = ProtocolParams(scheme, mismatch_limit, seed)
    fixed = _fixed_key(scheme, key_bits) if key_bits is not None else None

    detections = 0
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        key = fixed
        if key is None:
            key = tuple(int(b) for b in rng.integers(0, 2, size=scheme.num_key_qubits))
        detected = False
        for _ in range(copies):
            if run_two_pass_qkd(params, eve, rng, key_bits=key).detected:
                detected = True
                break
        detections += int(detected)
    return Estimate.from_count(detections, trials, seed)
