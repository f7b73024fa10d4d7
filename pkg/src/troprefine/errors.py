"""Exception hierarchy shared by every module.

Validation problems derive from ``ValidationError`` (CLI exit code 2);
self-consistency failures derive from ``ConsistencyError`` (exit code 3).
"""


class TropError(Exception):
    """Base class for all package errors."""


class ValidationError(TropError, ValueError):
    pass


class ConsistencyError(TropError, RuntimeError):
    pass


class InvalidVector(ValidationError):
    pass


class NotBalanced(ValidationError):
    pass


class Degenerate(ValidationError):
    pass


class NotEven(ValidationError):
    pass


class NotSimple(ValidationError):
    pass


class NotElliptic(ValidationError):
    pass


class NoParity(ValidationError):
    pass


class NotAdmissible(ValidationError):
    pass


class ZeroSum(ValidationError):
    pass


class DegenerateWedge(ValidationError):
    pass


class FragmentMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class EmptyVSet(TropError):
    """No admissible cycle direction exists; the invariant has no cyclic data."""


class GeneralPositionFailure(TropError):
    """Constraints are not generic enough; callers re-perturb."""


class InternalInconsistency(ConsistencyError):
    pass


class DuplicateCurve(ConsistencyError):
    pass
