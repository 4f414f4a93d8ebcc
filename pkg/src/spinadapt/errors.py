"""Exception types shared across the package."""


class SpinAdaptError(Exception):
    """Base class for all package errors."""


class InvalidQuantumNumbersError(SpinAdaptError, ValueError):
    """Quantum numbers (N, 2S, 2M, truncation) are inconsistent or out of range."""


class UnphysicalPathError(SpinAdaptError, ValueError):
    """A height or step sequence violates the angular-momentum addition rules."""


class ResourceLimitError(SpinAdaptError, RuntimeError):
    """A brute-force routine was asked for a system size beyond its guard."""


class UnsupportedConfigurationError(SpinAdaptError, ValueError):
    """Requested a qubit encoding or circuit outside the supported truncations."""
