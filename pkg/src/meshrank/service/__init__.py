from .app import create_app
from .storage import (
    AssetResolutionError,
    ExperimentStore,
    SessionHandle,
    StaleSubmissionError,
    UnknownIdError,
)

__all__ = [
    "create_app",
    "AssetResolutionError",
    "ExperimentStore",
    "SessionHandle",
    "StaleSubmissionError",
    "UnknownIdError",
]
