"""Exception hierarchy.

``ValidationError`` subclasses signal malformed input (CLI exit code 2);
``ShapeError`` subclasses signal incompatible but individually valid inputs
(CLI exit code 3).
"""


class MultiplexGMError(Exception):
    """Base class for all package errors."""


class ValidationError(MultiplexGMError, ValueError):
    pass


class ShapeError(MultiplexGMError, ValueError):
    pass


# multiplex validation
class EmptyChannelIntersection(ValidationError):
    pass


class LabelOutOfRange(ValidationError):
    pass


class UnionIncomplete(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class ParseError(ValidationError):
    pass


# padding / objective
class TargetOrderTooSmall(ShapeError):
    pass


class ChannelCountMismatch(ShapeError):
    pass


class OrderMismatch(ShapeError):
    pass


class DimensionMismatch(ShapeError):
    pass


# assignment
class NonSquare(ShapeError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class InfeasibleFixing(ValidationError):
    pass


# solver
class InfeasibleSeedInitialization(ValidationError):
    pass


class NonStochasticRows(ValidationError):
    pass


# generators
class InfeasibleRho(ValidationError):
    pass


# matched filter
class NonInjectiveMatch(ValidationError):
    pass


# matchability lab
class MissingSources(ValidationError):
    pass


class OrderTooLargeForEnumeration(ValidationError):
    pass
