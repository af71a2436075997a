# codeswitch/errors.py
"""
Exception hierarchy. Every class carries the CLI exit code it maps to:
  0 success, 2 input-format error, 3 statistical degeneracy, 4 alignment error.
"""
from __future__ import annotations


class CodeSwitchError(Exception):
    exit_code: int = 1


class InputFormatError(CodeSwitchError, ValueError):
    """Malformed corpus file, unknown label/tag, empty input."""
    exit_code = 2


class DegenerateModelError(CodeSwitchError, ValueError):
    """A fit, test or training set that cannot produce a meaningful model."""
    exit_code = 3


class ConvergenceError(CodeSwitchError, ArithmeticError):
    """Iterative numerics that diverged or did not converge."""
    exit_code = 3


class AlignmentError(CodeSwitchError, ValueError):
    """Two corpora (or two fits) that should line up do not."""
    exit_code = 4
