"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class TwoSolveError(Exception):
    """Base class. ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 1

    def __init__(self, message: str, *, stage: str | None = None):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class GridError(TwoSolveError, ValueError):
    exit_code = 2


class ConfigError(TwoSolveError, ValueError):
    exit_code = 2

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, stage="config")
        self.line = line


class RegimeError(TwoSolveError):
    """A necessary spectral condition failed (e.g. lambda1(-c-mu f) <= 0)."""

    exit_code = 3

    def __init__(self, message: str, *, condition: str, stage: str | None = None):
        super().__init__(message, stage=stage)
        self.condition = condition


class DegenerateWeightError(TwoSolveError):
    """Weighted eigenproblem: int f u^2 vanished for every iterate."""

    exit_code = 3


class ConvergenceError(TwoSolveError):
    exit_code = 4

    def __init__(self, message: str, *, residual: float = float("nan"),
                 iterations: int = 0, stage: str | None = None):
        super().__init__(message, stage=stage)
        self.residual = residual
        self.iterations = iterations


class GeometryError(TwoSolveError):
    """Mountain-pass geometry could not be established or collapsed."""

    exit_code = 5


class TransformDomainError(TwoSolveError, ValueError):
    exit_code = 4
