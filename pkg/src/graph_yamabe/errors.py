"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`YamabeError`,
so callers (and the command line front end) can catch one base class and map
the concrete subclass to an exit status.
"""


class YamabeError(Exception):
    """Base class for all package errors."""


# -- graph construction and domains -------------------------------------------

class GraphError(YamabeError, ValueError):
    pass


class NonPositiveMeasure(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class DuplicateVertex(GraphError):
    pass


class UnknownVertexInEdge(GraphError):
    pass


class UnknownVertex(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DisconnectedDomain(GraphError):
    pass


class EmptyDomain(GraphError):
    pass


# -- operators, spaces, spectra -----------------------------------------------

class BadExponent(YamabeError, ValueError):
    pass


class EmptyInterior(YamabeError, ValueError):
    pass


class NonPositivePotential(YamabeError, ValueError):
    pass


class TrivialAdmissibleSpace(YamabeError, ValueError):
    """The boundary constraints leave only the zero field; enlarge the domain."""


class InadmissibleField(YamabeError, ValueError):
    pass


class HypothesisViolation(YamabeError, ValueError):
    pass


# -- solvers -------------------------------------------------------------------

class SolverError(YamabeError, RuntimeError):
    pass


class GeometryNotFound(SolverError):
    pass


class MaxIterations(SolverError):
    pass


class StalledPath(SolverError):
    pass


class NoNehariRoot(SolverError):
    pass


class TrivialSolution(SolverError):
    pass


class SingularJacobian(SolverError):
    """Recorded as a flag by Newton refinement; not raised by the solvers."""


# -- files ---------------------------------------------------------------------

class FormatError(YamabeError, ValueError):
    pass


class ParseError(FormatError):
    pass


class VertexMismatch(FormatError):
    pass


class DisconnectedAfterRetries(YamabeError, RuntimeError):
    pass
