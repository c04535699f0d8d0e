"""Exception types raised across the package."""


class TPMError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(TPMError, ValueError):
    pass


class NoConvergence(TPMError, RuntimeError):
    pass


class DimensionMismatch(TPMError, ValueError):
    pass


class NotAState(TPMError, ValueError):
    pass


class SupportViolation(TPMError, ValueError):
    """Raised when a relative entropy (or a log-ratio of probabilities) diverges."""


class InvalidBeta(TPMError, ValueError):
    pass


class InvalidTemperatureOrder(TPMError, ValueError):
    pass


class InvalidAssignment(TPMError, ValueError):
    pass


class OutcomeOutOfRange(TPMError, IndexError):
    pass


class NotNormalized(TPMError, ValueError):
    pass


class BasisMismatch(TPMError, ValueError):
    pass


class NotUnitary(TPMError, ValueError):
    pass


class DegenerateSpectrum(TPMError, ValueError):
    pass


class NotTimeReversalSymmetric(TPMError, ValueError):
    pass


class NonRealResult(TPMError, ArithmeticError):
    pass


class ChiZero(TPMError, ArithmeticError):
    pass


class MissingTimeFamily(TPMError, ValueError):
    pass


class ConfigError(TPMError, ValueError):
    """Invalid or malformed scenario configuration."""


class ConfigMismatch(ConfigError):
    """A figure pipeline was handed parameters that differ from the figure's."""
