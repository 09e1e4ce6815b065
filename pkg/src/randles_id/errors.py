"""Exception families raised by the toolkit.

Each family carries the process exit code the CLI maps it to.
"""

from __future__ import annotations


class EcmError(Exception):
    exit_code = 1


class ValidationError(EcmError, ValueError):
    """Bad argument values or violated type invariants."""

    exit_code = 2


class ConfigurationError(ValidationError):
    """Inconsistent filter / simulator settings (e.g. sample rate too low)."""


class ContractError(ValidationError):
    """Caller broke a precondition (mismatched grids, mismatched frequencies)."""


class ParseError(EcmError):
    exit_code = 3

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SelectionError(EcmError):
    """No usable frequency triplet could be picked from a spectrum."""

    exit_code = 4


class RangeError(SelectionError):
    """Requested frequency lies outside the spectrum (no extrapolation)."""


class SolverError(EcmError):
    exit_code = 5

    def __init__(self, message: str, value: float | None = None, freq_hz: float | None = None):
        self.value = value
        self.freq_hz = freq_hz
        if freq_hz is not None:
            message = f"{message} (at {freq_hz:g} Hz)"
        super().__init__(message)


class NonPhysicalFitError(SolverError):
    """An identified quantity came out non-positive."""


class DegenerateInputError(SolverError):
    """The measurement carries no information for the requested parameter."""


class DspError(EcmError):
    exit_code = 6


class InsufficientDataError(DspError):
    pass


class LowSignalError(DspError):
    pass


class ZeroMagnitudeError(EcmError, ZeroDivisionError):
    """Division by a zero amplitude or zero reference magnitude."""

    exit_code = 6
