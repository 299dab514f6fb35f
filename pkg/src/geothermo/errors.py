"""Exception types shared across the package."""


class GeothermoError(Exception):
    """Base class for all package errors."""


class DomainViolation(GeothermoError):
    """A point lies outside the validity domain of a fundamental relation.

    ``violations`` lists human-readable descriptions of the failed
    predicates (may be a single entry, e.g. "ln of non-positive argument").
    """

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [message]


class NonFinite(GeothermoError):
    """A derivative or function value overflowed or became NaN."""


class ParseError(GeothermoError):
    """Syntax error in a relation source string."""

    def __init__(self, message, position, expected=None):
        super().__init__(f"{message} (at position {position})")
        self.position = position
        self.expected = tuple(expected) if expected else ()


class UnknownIdentifier(GeothermoError):
    """An identifier resolves to neither a coordinate nor a parameter."""

    def __init__(self, name, position=None):
        msg = f"unknown identifier '{name}'"
        if position is not None:
            msg += f" (at position {position})"
        super().__init__(msg)
        self.name = name
        self.position = position


class UnboundParameter(GeothermoError):
    """A relation references a parameter with no bound value."""

    def __init__(self, name):
        super().__init__(f"parameter '{name}' has no bound value")
        self.name = name


class SingularPrefactor(GeothermoError):
    """Some E^j dPhi/dE^j in the conformal sum vanishes at the point."""


class DegenerateMetric(GeothermoError):
    """|det g| fell below the degeneracy threshold; curvature is undefined.

    Carries the offending ``metric`` (a MetricTensor) when available so
    diagnostics such as the determinant remain accessible.
    """

    def __init__(self, message, metric=None):
        super().__init__(message)
        self.metric = metric


class InversionFailure(GeothermoError):
    """A Legendre/representation inversion could not be carried out.

    ``witness`` optionally holds a pair of sample points demonstrating
    non-monotonicity of the map being inverted.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SingularDenominator(GeothermoError):
    """A closed-form oracle denominator vanishes at the requested point."""

    def __init__(self, message, factor=None):
        super().__init__(message)
        self.factor = factor


class PreconditionFailure(GeothermoError):
    """An operation was invoked with inputs violating its stated precondition."""


class EmptyGrid(GeothermoError):
    """A grid specification contains no points."""
