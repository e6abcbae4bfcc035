"""Exception types shared across the package."""


class ModcommError(Exception):
    """Base class for all errors raised by this package."""


class FieldMismatch(ModcommError):
    pass


class BaseFieldHasNoConjugation(ModcommError):
    pass


class InvalidField(ModcommError):
    pass


class ParseError(ModcommError):
    pass


class NotTorsionFree(ModcommError):
    pass


class NotTransitive(ModcommError):
    pass


class NotAMember(ModcommError):
    pass


class EmptyWord(ModcommError):
    pass


class NotNormal(ModcommError):
    pass


class IdentityElement(ModcommError):
    pass


class NoSeparator(ModcommError):
    pass


class SearchExhausted(ModcommError):
    pass


class DepthBeyondDecidable(ModcommError):
    pass


class SpanSearchExhausted(ModcommError):
    pass


class NoSolution(ModcommError):
    pass


class NonRationalTSquare(ModcommError):
    pass


class NBoundExceeded(ModcommError):
    pass


class NotInConjugate(ModcommError):
    pass


class NoStabilizingElement(ModcommError):
    pass


class NotConjugate(ModcommError):
    pass


class NoRealScaling(ModcommError):
    pass


class ZeroLeadingCoefficient(ModcommError):
    pass


class HashMismatch(ModcommError):
    pass


class ReplayFailure(ModcommError):
    pass


class DivisionByZero(ModcommError, ZeroDivisionError):
    pass
