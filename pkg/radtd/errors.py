from __future__ import annotations

from typing import Optional


class RadtdError(Exception):
    """Base class for every error raised by radtd."""


class ConfigError(RadtdError, ValueError):
    """Invalid parameters (window geometry, ELM sizes, thresholds)."""


class DataError(RadtdError, ValueError):
    """Input data cannot be used as given."""


class LoadError(DataError):
    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None) -> None:
        super().__init__(message)
        self.row = row
        self.column = column


class InsufficientDataError(DataError):
    pass


class ShapeError(DataError):
    pass


class FingerprintError(DataError):
    pass


class EmptySelfSetError(DataError):
    pass


class UndefinedAucError(DataError):
    pass


class FormatError(DataError):
    """Self-set payload could not be decoded."""


class FormatVersionError(FormatError):
    pass


class IntegrityError(FormatError):
    pass


class NumericError(RadtdError, ArithmeticError):
    def __init__(self, message: str, condition: Optional[float] = None) -> None:
        if condition is not None:
            message = f"{message} (condition={condition:.3e})"
        super().__init__(message)
        self.condition = condition
