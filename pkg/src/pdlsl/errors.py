"""Exception hierarchy shared by every stage."""

from __future__ import annotations


class PdlslError(Exception):
    """Base class for all data errors raised by the library."""


class ParseError(PdlslError):
    """Lexical, syntactic or sort error in formula text, with a source location."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")


class ReductionError(PdlslError):
    """Unknown definition, arity/sort mismatch or cycle during beta reduction."""


class TraceError(PdlslError):
    pass


class SegmentationError(PdlslError):
    pass


class ModelError(PdlslError):
    pass


class CheckError(PdlslError):
    pass


class EvaluationError(PdlslError):
    pass


class ConfigError(PdlslError):
    pass


class InvariantError(Exception):
    """A produced artifact broke an internal invariant; indicates a bug, not bad input."""
