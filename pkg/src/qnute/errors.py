"""Exception types shared across the package."""


class QnuteError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(QnuteError):
    """Operands act on registers of different sizes."""


class CapacityError(QnuteError):
    """Requested dense object exceeds the desk-scale qubit guard."""


class DegenerateInputError(QnuteError):
    """Input vector carries no usable signal (e.g. all zeros)."""


class StepSizeError(QnuteError):
    """Scale-factor radicand is non-positive; the time step is too large."""


class SingularSystemError(QnuteError):
    """Every eigenvalue of the fitting system fell below the cutoff."""


class InvalidDomainError(QnuteError):
    """Unitary domain size is incompatible with the register."""


class UnsupportedSizeError(QnuteError):
    """Construction is undefined at this register size."""


class ProtocolFailureError(QnuteError):
    """Both grid boundaries are degenerate; the rescaling protocol fails."""


class RescaleDegeneracyError(QnuteError):
    """Boundary amplitude of the state is too small to divide by."""


class ConfigError(QnuteError):
    """Run configuration is malformed; the message names the offending field."""
