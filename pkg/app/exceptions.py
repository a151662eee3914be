"""Error hierarchy shared by the services and the command line.

Every class carries the process exit code the CLI reports for it.
"""
from typing import Optional


class IrsAnalysisError(Exception):
    exit_code = 1


class ConfigError(IrsAnalysisError, ValueError):
    """Invalid configuration or argument outside an operation's domain"""
    exit_code = 2


class NumericalRegimeError(IrsAnalysisError, ArithmeticError):
    """A formula left its valid numerical regime (log of non-positive value, PSD breach, ...)"""
    exit_code = 3


class NonConvergenceError(IrsAnalysisError, RuntimeError):
    """An iterative solver hit its cap before reaching tolerance"""
    exit_code = 4

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message if residual is None else f"{message} (residual={residual:.3e})")
        self.residual = residual
