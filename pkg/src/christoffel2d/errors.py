"""Exception hierarchy for christoffel2d.

Every error raised by the library derives from ChristoffelError so callers
can catch one type at the boundary. Input problems and numerical problems
are kept on separate branches because the CLI maps them to different exit
codes (2 for bad input, 3 for numerical failure).
"""


class ChristoffelError(Exception):
    """Base class for all christoffel2d errors."""


class InputError(ChristoffelError):
    """Caller passed something invalid. CLI exit code 2."""


class ComputeError(ChristoffelError):
    """A numerical procedure failed to certify its result. CLI exit code 3."""


class InvalidPolygon(InputError):
    """Vertex list does not describe a strictly convex CCW polygon."""


class DegenerateInput(InputError):
    """Points are affinely dependent (no interior, no enclosing ellipse)."""


class AtOrigin(InputError):
    """Query point coincides with the chart origin; no ray direction."""


class Outside(InputError):
    """Query point lies outside the (closed) polygon."""


class GridTooLarge(InputError):
    """Requested evaluation grid exceeds the configured size cap."""


class DegreeTooLarge(InputError):
    """Requested polynomial degree exceeds the supported range."""


class OutOfRegime(InputError):
    """Point too far from the boundary for the boundary-regime certificates."""


class TooCloseToBoundary(ComputeError):
    """Gap underflowed; chart quantities would be dominated by roundoff."""


class NumericalFailure(ComputeError):
    """Iteration budget exhausted without meeting the certified tolerance."""


class IllConditioned(ComputeError):
    """Gram matrix lost positive definiteness at the requested degree."""


class ChartFailure(ComputeError):
    """Boundary chart construction produced an inconsistent profile."""


class NotCase3(ComputeError):
    """Parabola fit requested for a chart that dispatches to case 1 or 2."""


class DegenerateTangency(ComputeError):
    """Profile touches the half-gap line but admits no positive curvature fit."""


class CompressionFailed(ComputeError):
    """Quadrature compression did not reach the moment residual target."""
