"""Exception types shared across the package."""


class TopkBoostError(Exception):
    """Base class for all package errors."""


class ContractError(TopkBoostError, ValueError):
    """An operation was called with arguments violating its contract."""


class ConfigError(TopkBoostError, ValueError):
    """An experiment or session configuration is invalid."""


class ScaleGuardError(TopkBoostError):
    """A brute-force oracle refused to run beyond its hard size limit."""


class InformationBarrierError(TopkBoostError):
    """Relevance information was requested or supplied outside the revealed top-k."""


class ArffParseError(TopkBoostError, ValueError):
    """Malformed ARFF input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UndefinedEdgeError(TopkBoostError):
    """An empirical edge is undefined because its weight normalizer is zero."""
