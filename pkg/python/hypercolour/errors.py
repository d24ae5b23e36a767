"""Exception types raised by hypercolour.

Everything derives from HypercolourError (a ValueError), so callers that only
care about "bad input" can catch one type. Outcomes the algorithms treat as
values (a failed rejection run, a guard exit) are never raised.
"""


class HypercolourError(ValueError):
    pass


class EdgeArityError(HypercolourError):
    pass


class VertexOutOfRangeError(HypercolourError):
    pass


class InstanceFormatError(HypercolourError):
    pass


class InvalidQError(HypercolourError):
    pass


class ColourOutOfRangeError(HypercolourError):
    pass


class BucketOutOfRangeError(HypercolourError):
    pass


class DegenerateInstanceError(HypercolourError):
    pass


class BudgetExceededError(HypercolourError):
    pass


class EmptySupportError(HypercolourError):
    pass


class PreconditionUnmetError(HypercolourError):
    pass


class InvalidInputError(HypercolourError):
    pass


class InfeasibleError(HypercolourError):
    pass
