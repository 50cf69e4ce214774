"""Exception hierarchy.

Every error raised by the package derives from :class:`JumpdensityError`
and is named after the invariant it reports, so CLI error text can simply
echo the class name.
"""


class JumpdensityError(Exception):
    """Base class for all package errors."""


class SelfLoop(JumpdensityError):
    """An edge joins a vertex to itself."""


class DuplicateEdge(JumpdensityError):
    """The same unordered vertex pair appears twice in the edge list."""


class NonPositiveWeight(JumpdensityError):
    """An edge weight is zero, negative, or not finite."""


class DisconnectedGraph(JumpdensityError):
    """The graph does not connect all vertices (or is degenerate)."""


class UnknownVertex(JumpdensityError):
    """A vertex label is not part of the graph."""


class NegativeArgument(JumpdensityError):
    """Bessel evaluation requested at a negative argument."""


class Overflow(JumpdensityError):
    """Linear-scale Bessel value exceeds double range; use the log form."""


class TreeNotSpanning(JumpdensityError):
    """An operation needs a spanning tree but got a partial one."""


class NotATree(JumpdensityError):
    """The graph has a cycle where a tree is required."""


class InvalidOutcome(JumpdensityError):
    """A joint outcome violates the density hypotheses."""


class InvalidTarget(JumpdensityError):
    """A verification target is not a realizable outcome."""


class GraphTooLarge(JumpdensityError):
    """Exact enumeration requested beyond the supported size."""


class EventCapExceeded(JumpdensityError):
    """A simulated path exceeded the configured event cap."""
