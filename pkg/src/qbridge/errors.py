"""Exception hierarchy.

Every error raised by the library derives from :class:`QBridgeError`. Errors
that describe a measured violation keep the measured number on ``.value`` so
callers (and the CLI) can report it next to the tolerance that was exceeded.
"""


class QBridgeError(Exception):
    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class InputError(QBridgeError, ValueError):
    """Base class for errors caused by invalid user input."""


class DimensionMismatch(InputError):
    pass


class NotHermitian(InputError):
    pass


class NotPositive(InputError):
    pass


class TraceNotOne(InputError):
    pass


class SpecInvalid(InputError):
    pass


class PriorDegenerate(InputError):
    """A prior probability the model requires to be strictly positive is not."""


class NoSplitChannel(InputError):
    pass


class InfeasibleMarginals(InputError):
    pass


class TooLarge(InputError):
    pass


class SupportViolation(InputError):
    pass


class SingularBelowFloor(QBridgeError):
    pass


class NoConvergence(QBridgeError):
    def __init__(self, message, max_iter=None, residual=None):
        super().__init__(message, residual)
        self.max_iter = max_iter
        self.residual = residual


class ZeroConditional(QBridgeError):
    pass


class ZeroOverlap(QBridgeError):
    pass


class AssumptionViolated(QBridgeError):
    pass


class QuadratureTolExceeded(QBridgeError):
    pass


class VerificationError(QBridgeError):
    """An identity that must hold on the solution was violated."""

    def __init__(self, message, residuals=None):
        super().__init__(message, residuals)
        self.residuals = residuals or {}


class ConsistencyViolation(VerificationError):
    pass


class EquivalenceViolation(VerificationError):
    pass
