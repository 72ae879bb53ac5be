"""Exception types shared across the package.

Contract and data errors map to CLI exit code 1, config errors to exit
code 2 (see cli module).
"""


class ContractError(ValueError):
    """A documented precondition or invariant was violated by the caller."""


class ModelIntegrityError(ContractError):
    """Model parameters are inconsistent (shape/dimension mismatch)."""


class DataError(ValueError):
    """Input data is malformed or semantically invalid."""


class ParseError(DataError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" ({path}"
            where += f", line {line})" if line is not None else ")"
        elif line is not None:
            where = f" (line {line})"
        super().__init__(message + where)


class AmbiguityError(DataError):
    """A name string maps to more than one entity type."""


class ConfigError(ValueError):
    """Invalid or missing configuration (paths, thresholds, mixes)."""


class RetrievalError(RuntimeError):
    """Candidate retrieval failed.

    ``transient`` distinguishes retryable failures (e.g. a flaky search
    backend) from permanent ones (e.g. a document missing from a corpus).
    """

    def __init__(self, message, transient=False):
        super().__init__(message)
        self.transient = transient
