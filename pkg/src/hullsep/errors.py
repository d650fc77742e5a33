"""Exception hierarchy shared by every hullsep module."""


class HullsepError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(HullsepError, ValueError):
    pass


class DegenerateSegment(HullsepError, ValueError):
    pass


class DegeneratePair(HullsepError, ValueError):
    pass


class ZeroNormal(HullsepError, ValueError):
    pass


class ZeroDirection(HullsepError, ValueError):
    pass


class EmptyBody(HullsepError, ValueError):
    pass


class UnboundedBody(HullsepError):
    pass


class InfeasibleBody(HullsepError):
    pass


class NumericalBreakdown(HullsepError):
    """A simplex pivot element became too small to trust."""


class StartNotInBody(HullsepError, ValueError):
    pass


class PreconditionError(HullsepError, ValueError):
    pass


class MaxIterExceeded(HullsepError):
    """Iteration limit hit. Carries the best state reached and the trace so far."""

    def __init__(self, message, state=None, trace=None):
        super().__init__(message)
        self.state = state
        self.trace = trace


class NotAWitness(HullsepError, ValueError):
    pass


class InvariantViolation(HullsepError):
    pass


class StaleCache(HullsepError):
    pass


class TooManyVertices(HullsepError, ValueError):
    pass


class NotPositiveDefinite(HullsepError, ValueError):
    pass


class UnboundedFeasibleSet(HullsepError, ValueError):
    pass


class ParseError(HullsepError, ValueError):
    """Malformed instance or report file; the message names the offending field."""


class VerificationFailed(HullsepError):
    def __init__(self, failures):
        names = ", ".join(f.name for f in failures)
        super().__init__(f"verification failed: {names}")
        self.failures = failures
