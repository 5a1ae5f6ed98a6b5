"""Exception hierarchy shared by all gbctopo modules."""


class GBCError(Exception):
    """Base class for every error raised by gbctopo."""


class RankDeficient(GBCError):
    """Tangent frame lost rank (e.g. a coordinate pole)."""


class NonPositive(GBCError):
    """Metric determinant is not positive."""


class NonSPD(GBCError):
    """Metric is not symmetric positive definite."""


class DimensionMismatch(GBCError):
    pass


class IdentityViolation(GBCError):
    """A closed-form identity failed to hold; indicates a bug, not bad data."""


class CalibrationFailure(GBCError):
    pass


class NoConvergence(GBCError):
    pass


class DegenerateZero(GBCError):
    """Jacobian determinant vanishes at a zero; use the winding route."""


class AmbiguousWinding(GBCError):
    pass


class EnclosesOtherZero(GBCError):
    pass


class Unsupported(GBCError):
    pass


class IncompleteRecord(GBCError):
    pass


class DegenerateJacobian(GBCError):
    """Spatial Jacobian vanishes at a zero: a creation/annihilation is imminent."""


class GatingViolation(GBCError):
    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class DegenerateCritical(GBCError):
    pass


class IncompletePoint(GBCError):
    pass


class MethodInapplicable(GBCError):
    pass


class ParseError(GBCError):
    pass


class SchemaError(GBCError):
    pass


class ConfigError(GBCError):
    pass


class UnbalancedEventWarning(UserWarning):
    """A group of appearing/disappearing zeros did not net to zero charge."""
