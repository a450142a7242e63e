"""
Exception hierarchy shared by the simulator modules.

Every error raised on purpose by this package derives from QKDError so the
CLI can map it to an exit code. Where a built-in exception already names the
failure (ValueError, IndexError) the subclass inherits from it as well, so
callers that only know the built-ins keep working.
"""

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_DISAGREEMENT = 4


class QKDError(Exception):
    """Base class for all simulator errors"""

    exit_code = EXIT_UNEXPECTED


class SizeError(QKDError, ValueError):
    """Qubit count or array length outside the supported range"""

    exit_code = EXIT_USAGE


class QubitIndexError(QKDError, IndexError):
    """Wire index outside 0..p-1"""

    exit_code = EXIT_USAGE


class MessageValueError(QKDError, ValueError):
    """Message integer outside 0..2^p-1"""

    exit_code = EXIT_USAGE


class StateError(QKDError):
    """Statevector is not normalized within tolerance"""


class SchemeError(QKDError, ValueError):
    """Invalid verification scheme, scheme document, or strategy descriptor"""

    exit_code = EXIT_USAGE


class CapacityError(QKDError):
    """Exact enumeration requested beyond the configured cap"""

    exit_code = EXIT_CAPACITY


class ConfigError(QKDError):
    """config.yaml could not be parsed or holds invalid values"""

    exit_code = EXIT_USAGE


class ParameterError(QKDError, ValueError):
    """Run parameter (seed, trials, copies) outside its valid range"""

    exit_code = EXIT_USAGE
