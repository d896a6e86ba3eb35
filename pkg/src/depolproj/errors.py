"""Exception hierarchy.

Every error raised by the package derives from :class:`DepolprojError`, and
each carries a category used by the command-line runner to pick an exit code.
"""


class DepolprojError(Exception):
    """Base class for all package errors."""

    category = "numeric"


class ValidationError(DepolprojError, ValueError):
    """An argument violates a documented precondition."""

    category = "validation"


class NumericError(DepolprojError, ArithmeticError):
    """A numerical invariant failed during computation."""

    category = "numeric"


# linear algebra
class NotHermitian(ValidationError):
    pass


# states
class NotNormalized(ValidationError):
    pass


class NotPure(ValidationError):
    pass


class SpaceMismatch(ValidationError):
    pass


class NonHermitianResult(NumericError):
    pass


# channels
class IncompleteKraus(ValidationError):
    pass


class RateOutOfRange(ValidationError):
    pass


class TargetOutOfRange(ValidationError):
    pass


class DuplicateTarget(ValidationError):
    pass


class NonUnitaryFrame(ValidationError):
    pass


# circuits
class BadSpec(ValidationError):
    pass


class ParamLengthMismatch(ValidationError):
    pass


class ChannelSpaceMismatch(ValidationError):
    pass


# projection theory
class MOutOfRange(ValidationError):
    pass


class FirstOrderInvalid(ValidationError):
    pass


# mitigation
class IncompletePauliSet(ValidationError):
    pass


class PurityBelowFloor(NumericError):
    pass


class PurityAboveOne(NumericError):
    pass


class FullyDepolarized(NumericError):
    pass


# vqe
class TooLarge(ValidationError):
    pass


class OptimizerDiverged(NumericError):
    pass


# configuration and output
class ParseError(DepolprojError):
    """Malformed configuration text at ``line``:``column`` (1-based)."""

    category = "parse"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ConfigValidationError(ValidationError):
    """A configuration value fails validation; ``key`` names it."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class ConfigErrors(DepolprojError):
    """Every problem found in one configuration text.

    The category is ``parse`` if any syntax error was found, otherwise
    ``validation``.
    """

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))

    @property
    def category(self) -> str:
        if any(isinstance(e, ParseError) for e in self.errors):
            return "parse"
        return "validation"


class IoError(DepolprojError, OSError):
    category = "io"
