"""
Exception hierarchy shared by every stage.

Each error carries the process exit code the command line reports for it:
1 usage, 2 data error, 3 numeric failure.
"""

from enum import Enum
from typing import Optional


class FfrToolError(Exception):
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return self.message.splitlines()[0] if self.message else self.__class__.__name__


class UsageError(FfrToolError):
    exit_code = 1


class DataError(FfrToolError):
    exit_code = 2


class NumericError(FfrToolError):
    exit_code = 3


class ParseErrorKind(str, Enum):
    syntax = "syntax error"
    unknown_kind = "unknown gate kind"
    duplicate_name = "duplicate cell name"
    unresolved_fanin = "unresolved fan-in"
    arity = "arity mismatch"
    repeated_fanin = "repeated fan-in"
    combinational_cycle = "combinational cycle"


class NetlistParseError(DataError):
    def __init__(self, kind: ParseErrorKind, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {kind.value}: {message}")
        self.kind = kind
        self.line = line
        self.column = column


class GmlError(DataError):
    pass


class StimulusError(DataError):
    pass


class InjectionError(DataError):
    pass


class CampaignError(DataError):
    pass


class ConeTooLargeError(DataError):
    def __init__(self, ff_name: str, support: int, limit: int):
        super().__init__(
            f"cone of {ff_name} has {support} independent inputs, enumeration limit is {limit}"
        )
        self.support = support


class DimensionError(DataError):
    pass


class DatasetError(DataError):
    pass


class ConfigError(DataError):
    pass


class ReportError(DataError):
    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class TrainingDivergenceError(NumericError):
    def __init__(self, stage: str, epoch: int, loss: float):
        super().__init__(f"{stage} loss became non-finite ({loss}) at epoch {epoch}")
        self.epoch = epoch


class MetricsError(NumericError):
    pass
