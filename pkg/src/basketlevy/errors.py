"""Exception hierarchy. Each class maps to one CLI exit code."""


class BasketLevyError(Exception):
    exit_code = 1


class ConfigError(BasketLevyError, ValueError):
    exit_code = 2


class DomainError(BasketLevyError, ValueError):
    """Argument outside the region where a formula is defined."""

    exit_code = 3


class CalibrationError(DomainError):
    pass


class NumericError(BasketLevyError, ArithmeticError):
    exit_code = 4


class GridTooSmallError(NumericError):
    pass


class CapabilityError(BasketLevyError):
    exit_code = 5
