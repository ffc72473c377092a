"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run/solver configuration is invalid or inconsistent."""


class FormatError(ValueError):
    """A data file is malformed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericsError(RuntimeError):
    """A numeric routine failed (non-finite iterates, SVD breakdown, ...)."""


class ConvergenceError(RuntimeError):
    """An iterative reference solve did not reach its tolerance in budget."""


class RunAborted(RuntimeError):
    """A solver run stopped early; carries the partial trace collected so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace
