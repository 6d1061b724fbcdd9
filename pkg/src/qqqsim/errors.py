"""Exception types shared across the package."""


class QqqError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(QqqError):
    """A physical parameter is out of its valid range."""


class NonTransmonRegimeError(InvalidParameterError):
    """Mode stiffness alpha_k <= 0: no real harmonic frequency."""


class DegenerateDressingError(QqqError):
    """delta = 0 with no drive mixing: dressed-state labels are ambiguous."""


class ConfigError(QqqError):
    """Malformed or incomplete configuration input (CLI exit code 2)."""


class IntegrationError(QqqError):
    """Numerical propagation failed or violated an invariant (exit code 3)."""
