"""Exception hierarchy shared by every module."""


class BeurlingLabError(Exception):
    """Base class for all errors raised by beurling_lab."""


class ParseError(BeurlingLabError, ValueError):
    """Malformed expression text."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class DomainError(BeurlingLabError, ValueError):
    """Argument outside the domain of a function."""


class NonFiniteError(BeurlingLabError, ArithmeticError):
    """An evaluation produced inf or nan."""


class PositivityError(BeurlingLabError, ValueError):
    """A function required to be positive returned a non-positive value."""


class QuadratureError(BeurlingLabError, ArithmeticError):
    """Adaptive quadrature could not reach its tolerance."""


class IntegrationError(BeurlingLabError, ArithmeticError):
    """ODE integration failed (step underflow or blow-up)."""


class LimitError(BeurlingLabError, ArithmeticError):
    """A limit could not be extrapolated, or is zero where it must not be."""


class ConfigError(BeurlingLabError, ValueError):
    """Invalid scenario configuration."""
