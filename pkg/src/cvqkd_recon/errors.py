"""Exception types shared across the library.

Every exception carries a short stable ``code`` string so that callers
driving the CLI (or wrapping it from another language) can map failures
without parsing prose messages.
"""


class ReconciliationError(Exception):
    """Base class for all library errors."""

    code = "error"


class DimensionMismatchError(ReconciliationError, ValueError):
    """Operands do not share the required dimension or length."""

    code = "dim-mismatch"


class DegenerateInputError(ReconciliationError, ValueError):
    """An element or block has (numerically) zero norm and cannot be inverted."""

    code = "degenerate-input"


class InvalidSpecError(ReconciliationError, ValueError):
    """A code specification is outside the supported rate family."""

    code = "invalid-spec"


class AlistParseError(ReconciliationError, ValueError):
    """An alist file is malformed. Carries the offending 1-based line."""

    code = "alist-parse"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ReconciliationError, ValueError):
    """Invalid run configuration (CLI exit code 2)."""

    code = "config"
