from .design import (
    DEFAULT_PROMPT,
    ExperimentDesign,
    ShadingMode,
    Stimulus,
    design_from_dict,
    design_to_dict,
    full_factorial,
    generate_pairs,
)
from .events import (
    SessionRecorder,
    append_event,
    dump_events,
    group_by_session,
    load_events,
    replay_events,
)
from .rng import SessionStreams
from .session import (
    ChoiceRecord,
    PairOutcome,
    Phase,
    Presentation,
    QuestionnaireResponse,
    SessionState,
    build_schedule,
    pair_outcome,
    preference_extremes,
    record_choice,
    repetition_count,
    session_duration,
    session_outcomes,
    session_scores,
    submit_questionnaire,
)

__all__ = [
    "DEFAULT_PROMPT",
    "ExperimentDesign",
    "ShadingMode",
    "Stimulus",
    "design_from_dict",
    "design_to_dict",
    "full_factorial",
    "generate_pairs",
    "SessionRecorder",
    "append_event",
    "dump_events",
    "group_by_session",
    "load_events",
    "replay_events",
    "SessionStreams",
    "ChoiceRecord",
    "PairOutcome",
    "Phase",
    "Presentation",
    "QuestionnaireResponse",
    "SessionState",
    "build_schedule",
    "pair_outcome",
    "preference_extremes",
    "record_choice",
    "repetition_count",
    "session_duration",
    "session_outcomes",
    "session_scores",
    "submit_questionnaire",
]
