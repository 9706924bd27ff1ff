"""Exception types shared across the package."""


class SyntomoError(Exception):
    """Base class for library errors."""


class PrecisionError(SyntomoError):
    """Raised when a result cannot be certified at the requested precision."""


class MembershipError(SyntomoError):
    """Raised when a coefficient falls below its decoration's valuation floor."""

    def __init__(self, message: str, degrees: list[int] | None = None):
        super().__init__(message)
        self.degrees = degrees or []


class BandError(SyntomoError):
    """Raised when an operation needs degrees outside the configured band."""


class CommutationError(SyntomoError):
    """Raised when a square or chain map fails to commute, or d∘d ≠ 0."""


class ConfigError(SyntomoError):
    """Raised for invalid pipeline or CLI configuration."""


class ConvergenceError(SyntomoError):
    """Raised when an iterative solver or operator series fails to converge."""
