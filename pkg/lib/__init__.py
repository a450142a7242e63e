"""
QFT-QKD Simulator Library Package

This package contains the modular components of the QFT-based quantum key
distribution simulator and its eavesdropper detection analytics.
"""

from .errors import (
    CapacityError,
    ConfigError,
    MessageValueError,
    QKDError,
    QubitIndexError,
    SchemeError,
    SizeError,
    StateError,
)
from .config_manager import ProjectConfig, load_config, resolve_seed, setup_logging
from .statevector import Statevector
from .scheme_manager import (
    Message,
    SchemeKind,
    Verdict,
    VerificationScheme,
    assemble_message,
    build_scheme,
    extract_key,
)
from .detection_engine import (
    DetectionReport,
    EveTouchSet,
    aggregate_detection,
    detection_probability,
)
from .adversary import EveKind, EveStrategy, many_copies_attack, parse_eve_descriptor
from .protocol_manager import (
    Protocol,
    ProtocolParams,
    Transcript,
    run_bb84,
    run_three_pass_encryption,
    run_two_pass_qkd,
)
from .montecarlo_engine import Estimate, crossvalidate, estimate_detection

__all__ = [
    "CapacityError",
    "ConfigError",
    "MessageValueError",
    "QKDError",
    "QubitIndexError",
    "SchemeError",
    "SizeError",
    "StateError",
    "ProjectConfig",
    "load_config",
    "resolve_seed",
    "setup_logging",
    "Statevector",
    "Message",
    "SchemeKind",
    "Verdict",
    "VerificationScheme",
    "assemble_message",
    "build_scheme",
    "extract_key",
    "DetectionReport",
    "EveTouchSet",
    "aggregate_detection",
    "detection_probability",
    "EveKind",
    "EveStrategy",
    "many_copies_attack",
    "parse_eve_descriptor",
    "Protocol",
    "ProtocolParams",
    "Transcript",
    "run_bb84",
    "run_three_pass_encryption",
    "run_two_pass_qkd",
    "Estimate",
    "crossvalidate",
    "estimate_detection",
]
