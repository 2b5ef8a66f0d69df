"""Exception hierarchy shared across the toolkit."""


class MeshRankError(Exception):
    """Base class for all toolkit errors."""


class ObjParseError(MeshRankError):
    """Malformed OBJ input. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DesignError(MeshRankError):
    """Invalid experiment design (duplicate ids, too few stimuli, ...)."""


class ProtocolError(MeshRankError):
    """A choice submission violates the pairing protocol."""


class SessionStateError(MeshRankError):
    """Operation applied in the wrong session phase."""


class DecimationError(MeshRankError):
    """Simplification could not be performed as requested."""


class TopologyLockError(DecimationError):
    """Collapse queue exhausted before the target was reached.

    Carries the best mesh achieved so the caller can keep the partial result.
    """

    def __init__(self, message: str, best_mesh, achieved: int):
        super().__init__(message)
        self.best_mesh = best_mesh
        self.achieved = achieved


class DegenerateInputError(MeshRankError):
    """Statistic undefined for this input (constant sample, all-zero diffs)."""


class AggregationError(MeshRankError):
    """Session set cannot be aggregated (missing pairs, mixed designs)."""


class DataError(MeshRankError):
    """Recorded value outside its declared bounds."""
