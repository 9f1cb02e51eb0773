"""Exception types shared across the package."""


class GossipOptError(Exception):
    """Base class for all package-specific errors."""


class InvalidMatrix(GossipOptError):
    """Matrix input violates a structural requirement (symmetry, finiteness)."""


class ShapeError(GossipOptError):
    """Operands have incompatible shapes."""


class EigenSolveFailed(GossipOptError):
    """The Jacobi sweep limit was reached before convergence."""


class DisconnectedGraph(GossipOptError):
    """The graph (or its Laplacian spectrum) is not connected."""


class InvalidSize(GossipOptError):
    """Node count or dimension outside the supported range."""


class InvalidParameter(GossipOptError):
    """A numeric parameter is outside its valid range."""


class InvalidEigengap(GossipOptError):
    """Eigengap must lie in (0, 1]."""


class DimensionTooSmall(GossipOptError):
    """Ambient dimension too small for the requested construction."""


class ReferenceSolveFailed(GossipOptError):
    """The centralized reference solve did not converge."""


class ParseError(GossipOptError):
    """Malformed input file."""


class LabelError(GossipOptError):
    """Dataset labels are not binary."""


class StepSizeInfeasible(GossipOptError):
    """The step-size positive-semidefiniteness condition is violated."""


class ScheduleExhausted(GossipOptError):
    """The run was advanced past its configured horizon."""


class ConfigError(GossipOptError):
    """Invalid experiment configuration; message carries the field path."""


class BudgetTooSmall(GossipOptError):
    """Comparison budget precedes the first recorded point of a trace."""
