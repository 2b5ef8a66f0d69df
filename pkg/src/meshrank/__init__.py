"""meshrank: paired-comparison psychophysics toolkit for 3D mesh quality.

Prepares mesh stimuli at controlled triangle budgets, runs forced-choice
participant sessions under a bounded adaptive pairing protocol, and
computes preference scores, consistency checks and rank statistics.
"""

from .errors import (
    AggregationError,
    DataError,
    DecimationError,
    DegenerateInputError,
    DesignError,
    MeshRankError,
    ObjParseError,
    ProtocolError,
    SessionStateError,
    TopologyLockError,
)
from .objio import Mesh, ValidationReport, parse_obj, validate, write_obj
from .simplify import (
    DecimationReport,
    ErrorSummary,
    Quadric,
    decimate,
    decimate_ladder,
    geometric_error,
    simplify_to,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationError",
    "DataError",
    "DecimationError",
    "DegenerateInputError",
    "DesignError",
    "MeshRankError",
    "ObjParseError",
    "ProtocolError",
    "SessionStateError",
    "TopologyLockError",
    "Mesh",
    "ValidationReport",
    "parse_obj",
    "validate",
    "write_obj",
    "DecimationReport",
    "ErrorSummary",
    "Quadric",
    "decimate",
    "decimate_ladder",
    "geometric_error",
    "simplify_to",
    "__version__",
]
