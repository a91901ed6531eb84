"""Exception hierarchy for the codec.

Every class carries a stable ``exit_code`` so the command-line tool can
report error categories to scripts; see the README for the full table.
"""


class CodecError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InvalidInputError(CodecError):
    """Input data violates a precondition (non-finite values, empty tensors, ...)."""

    exit_code = 10


class RangeError(CodecError):
    """A value or severity lies outside its legal interval."""

    exit_code = 11


class ConfigError(CodecError):
    """A configuration object does not match the data it is applied to."""

    exit_code = 12


class InfeasibleError(CodecError):
    """The request cannot be satisfied by the data (e.g. K exceeds distinct points)."""

    exit_code = 13


class ConsistencyError(CodecError):
    """Hierarchy-consistent projection was asked for a tensor off the chain's support."""

    exit_code = 14


class FormatError(CodecError):
    """A container, tensor file, or image file is malformed."""

    exit_code = 15


class CodingError(CodecError):
    """Entropy coding failed (uncovered symbol, bad table)."""

    exit_code = 16


class TruncationError(CodingError):
    """The coded bit payload ended before all symbols were decoded."""

    exit_code = 17


class CorruptionError(CodingError):
    """The coded bits do not form a valid prefix-code sequence."""

    exit_code = 18


class DegenerateInputError(CodecError):
    """An operand is degenerate for the requested operation (e.g. zero-norm spectrum)."""

    exit_code = 19


class InsufficientDataError(CodecError):
    """Not enough data points (or pixels) for the operation."""

    exit_code = 20
