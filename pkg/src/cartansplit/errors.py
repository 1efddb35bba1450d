"""Exception hierarchy.

Every error carries a short machine-readable ``code`` which the command line
front end writes into its error record.
"""


class SplittingError(Exception):
    code = "error"

    def to_record(self):
        return {"error": self.code, "message": str(self)}


class InvalidParameter(SplittingError, ValueError):
    code = "invalid-parameter"


class InvalidInput(SplittingError, ValueError):
    code = "invalid-input"


class InvalidGrid(SplittingError, ValueError):
    code = "invalid-grid"


class OutOfRange(SplittingError, ValueError):
    code = "out-of-range"


class PreconditionViolation(SplittingError):
    code = "precondition-violation"


class DomainViolation(SplittingError):
    """Raised when points leave the domain of a map; ``points`` lists them."""

    code = "domain-violation"

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)

    def to_record(self):
        rec = super().to_record()
        rec["points"] = [[float(p.real), float(p.imag)] for p in self.points[:20]]
        return rec


class NumericalFailure(SplittingError):
    code = "numerical-failure"

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class IllConditionedContour(SplittingError):
    code = "ill-conditioned-contour"


class InvalidSupport(SplittingError):
    code = "invalid-support"


class NotAdmissible(SplittingError):
    """A Cartan pair failed one of the admissibility items (1-4)."""

    code = "not-admissible"

    def __init__(self, message, item):
        super().__init__(message)
        self.item = item

    def to_record(self):
        rec = super().to_record()
        rec["item"] = self.item
        return rec


class GeometryInfeasible(SplittingError):
    code = "geometry-infeasible"


class GeometryError(SplittingError):
    """A range inclusion needed for a composite to be well defined failed."""

    code = "geometry-error"

    def __init__(self, message, inclusion=""):
        super().__init__(message)
        self.inclusion = inclusion


class NotHolomorphic(SplittingError):
    code = "not-holomorphic"


class ThresholdError(SplittingError):
    code = "threshold-error"


class IterationAborted(SplittingError):
    """The iteration stopped early; ``trace`` holds the steps done so far."""

    code = "aborted-with-trace"

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class InvalidOverlap(SplittingError):
    code = "invalid-overlap"


class ConfigParseError(SplittingError):
    code = "parse-error"


class ConfigValidationError(SplittingError):
    code = "validation-error"

    def __init__(self, message, field):
        super().__init__(message)
        self.field = field

    def to_record(self):
        rec = super().to_record()
        rec["field"] = self.field
        return rec
