"""Exception types.

Every error carries a short machine-readable ``code`` (e.g. ``"alpha_ge_N"``)
next to the human message, so callers and the command line can branch on it.
"""


class FCNLSError(Exception):
    """Base class; ``code`` names the failure."""

    def __init__(self, code, message=None):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class ValidationError(FCNLSError, ValueError):
    """Inadmissible parameters or malformed input."""


class NumericalError(FCNLSError, ArithmeticError):
    """A computation failed to converge or produced non-finite values."""


class SnapshotError(FCNLSError, OSError):
    """Malformed field snapshot file."""


class ConfigError(ValidationError):
    """Bad configuration text; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, code, message=None, line=0):
        self.line = line
        where = f"line {line}: " if line else ""
        super().__init__(code, where + (message or ""))
