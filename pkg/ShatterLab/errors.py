"""Exception hierarchy shared by the library and the command line.

Library code raises; only ``main.py`` turns an exception into an exit code.
"""
from __future__ import annotations

from typing import Optional


class ShatterLabError(Exception):
    exit_code = 1


class InputError(ShatterLabError):
    """Unreadable or malformed input (matrix files, configs)."""

    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None, pointer: Optional[str] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if pointer is not None:
            location.append(f"at {pointer or '/'}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.line = line
        self.column = column
        self.pointer = pointer


class DomainError(ShatterLabError, ValueError):
    """A precondition on the mathematical inputs does not hold."""

    exit_code = 2


class ConvergenceError(ShatterLabError, ArithmeticError):
    """A dense eigen/singular value iteration failed to converge."""

    exit_code = 3

    def __init__(self, message: str, iterations: Optional[int] = None):
        if iterations is not None:
            message = f"{message} (LAPACK info={iterations})"
        super().__init__(message)
        self.iterations = iterations
