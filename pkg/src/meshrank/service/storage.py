"""File-backed experiment and session persistence.

Layout under the store root:

    experiments/<eid>/experiment.json       design + asset dir + created_at
    experiments/<eid>/sessions/<sid>.jsonl  append-only event log

Every accepted mutation is appended (and fsynced) to the session log
before the response is built, so replaying the logs reconstructs every
session exactly, including after a crash at any point.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DesignError, MeshRankError
from ..protocol.design import ExperimentDesign, design_from_dict, design_to_dict
from ..protocol.events import SessionRecorder, append_event, load_events
from ..protocol.session import Phase, QuestionnaireResponse, preference_extremes

REALISM_PROMPT = "How much from 1 to 10 does this mesh look like the real object?"
CONFIDENCE_PROMPT = "How often were you certain of the answers or were you guessing?"
CONFIDENCE_ANCHORS = {"1": "always certain", "10": "always guessing"}


class UnknownIdError(MeshRankError):
    """No experiment or session under that id."""


class AssetResolutionError(MeshRankError):
    """A stimulus references an asset that does not exist."""


class StaleSubmissionError(MeshRankError):
    """Submission does not match the current head or the last accepted one."""


@dataclass
class ExperimentRecord:
    experiment_id: str
    design: ExperimentDesign
    asset_dir: Path
    created_at: float


@dataclass
class SessionHandle:
    session_id: str
    experiment_id: str
    recorder: SessionRecorder
    participant_label: str | None
    log_path: Path
    lock: threading.Lock = field(default_factory=threading.Lock)
    flushed: int = 0

    @property
    def state(self):
        return self.recorder.state


class ExperimentStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "experiments").mkdir(parents=True, exist_ok=True)
        self._experiments: dict[str, ExperimentRecord] = {}
        self._sessions: dict[str, SessionHandle] = {}
        self._registry_lock = threading.Lock()
        self._load_existing()

    # -- persistence ------------------------------------------------------

    def _experiment_dir(self, experiment_id: str) -> Path:
        return self.root / "experiments" / experiment_id

    def _load_existing(self) -> None:
        for exp_dir in sorted((self.root / "experiments").iterdir()):
            meta_path = exp_dir / "experiment.json"
            if not meta_path.is_file():
                continue
            meta = json.loads(meta_path.read_text())
            record = ExperimentRecord(
                experiment_id=meta["experiment_id"],
                design=design_from_dict(meta["design"]),
                asset_dir=Path(meta["asset_dir"]),
                created_at=meta["created_at"],
            )
            self._experiments[record.experiment_id] = record
            sessions_dir = exp_dir / "sessions"
            if not sessions_dir.is_dir():
                continue
            for log_path in sorted(sessions_dir.glob("*.jsonl")):
                events = load_events(str(log_path))
                if not events:
                    continue
                recorder = SessionRecorder.resume(events)
                handle = SessionHandle(
                    session_id=recorder.session_id,
                    experiment_id=record.experiment_id,
                    recorder=recorder,
                    participant_label=events[0].get("participant_label"),
                    log_path=log_path,
                    flushed=len(events),
                )
                self._sessions[handle.session_id] = handle

    def _flush(self, handle: SessionHandle) -> None:
        # Write-ahead: all new events hit disk before any response is built.
        while handle.flushed < len(handle.recorder.events):
            append_event(str(handle.log_path), handle.recorder.events[handle.flushed])
            handle.flushed += 1

    # -- experiments ------------------------------------------------------

    def create_experiment(self, design_doc: dict, asset_dir: str | Path) -> str:
        design = design_from_dict(design_doc)
        asset_root = Path(asset_dir)
        for stimulus in design.stimuli:
            refs = [stimulus.mesh_ref]
            if stimulus.texture_ref:
                refs.append(stimulus.texture_ref)
            for ref in refs:
                target = (asset_root / ref).resolve()
                if not target.is_file():
                    raise AssetResolutionError(
                        f"stimulus {stimulus.id!r}: asset {ref!r} not found under {asset_root}"
                    )
        experiment_id = secrets.token_urlsafe(8)
        record = ExperimentRecord(
            experiment_id=experiment_id,
            design=design,
            asset_dir=asset_root,
            created_at=time.time(),
        )
        exp_dir = self._experiment_dir(experiment_id)
        (exp_dir / "sessions").mkdir(parents=True, exist_ok=True)
        (exp_dir / "experiment.json").write_text(
            json.dumps(
                {
                    "experiment_id": experiment_id,
                    "design": design_to_dict(design),
                    "asset_dir": str(asset_root),
                    "created_at": record.created_at,
                },
                indent=2,
            )
        )
        with self._registry_lock:
            self._experiments[experiment_id] = record
        return experiment_id

    def get_experiment(self, experiment_id: str) -> ExperimentRecord:
        try:
            return self._experiments[experiment_id]
        except KeyError:
            raise UnknownIdError(f"unknown experiment {experiment_id!r}") from None

    # -- sessions ---------------------------------------------------------

    def start_session(self, experiment_id: str, seed: int | None = None,
                      participant_label: str | None = None) -> SessionHandle:
        record = self.get_experiment(experiment_id)
        if seed is None:
            seed = secrets.randbits(63)
        session_id = secrets.token_urlsafe(12)
        log_path = self._experiment_dir(experiment_id) / "sessions" / f"{session_id}.jsonl"
        recorder = SessionRecorder(
            record.design, seed, session_id, participant_label=participant_label
        )
        handle = SessionHandle(
            session_id=session_id,
            experiment_id=experiment_id,
            recorder=recorder,
            participant_label=participant_label,
            log_path=log_path,
        )
        self._flush(handle)
        with self._registry_lock:
            self._sessions[session_id] = handle
        return handle

    def get_session(self, session_id: str) -> SessionHandle:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownIdError(f"unknown session {session_id!r}") from None

    def sessions_of(self, experiment_id: str) -> list[SessionHandle]:
        return sorted(
            (h for h in self._sessions.values() if h.experiment_id == experiment_id),
            key=lambda h: h.session_id,
        )

    # -- participant-facing payloads --------------------------------------

    def _asset_url(self, experiment_id: str, ref: str | None) -> str | None:
        return f"/assets/{experiment_id}/{ref}" if ref else None

    def _stimulus_payload(self, experiment_id: str, design: ExperimentDesign,
                          stimulus_id: str) -> dict:
        stimulus = design.stimulus(stimulus_id)
        # Quality (triangle count) is deliberately absent: participants see
        # only what rendering requires.
        return {
            "stimulus_id": stimulus.id,
            "mesh_url": self._asset_url(experiment_id, stimulus.mesh_ref),
            "texture_url": self._asset_url(experiment_id, stimulus.texture_ref),
            "shading": stimulus.shading.value,
        }

    def current_payload(self, handle: SessionHandle) -> dict:
        state = handle.state
        if state.phase is Phase.COMPARING:
            handle.recorder.ensure_head_shown()
            self._flush(handle)
            head = state.current_presentation()
            design = state.design
            return {
                "phase": "comparing",
                "session_id": handle.session_id,
                "presentation_id": head.presentation_id,
                "sequence_index": state.next_sequence_index,
                "prompt": design.prompt,
                "left": self._stimulus_payload(handle.experiment_id, design, head.left_id),
                "right": self._stimulus_payload(handle.experiment_id, design, head.right_id),
            }
        if state.phase is Phase.QUESTIONNAIRE:
            extremes = preference_extremes(state)
            return {
                "phase": "questionnaire",
                "session_id": handle.session_id,
                "questions": {
                    "realism_most": {
                        "prompt": REALISM_PROMPT,
                        "stimulus_id": extremes["most_preferred"],
                        "scale": [1, 10],
                    },
                    "realism_least": {
                        "prompt": REALISM_PROMPT,
                        "stimulus_id": extremes["least_preferred"],
                        "scale": [1, 10],
                    },
                    "confidence": {
                        "prompt": CONFIDENCE_PROMPT,
                        "scale": [1, 10],
                        "anchors": CONFIDENCE_ANCHORS,
                    },
                },
                "tie_most": extremes["tie_most"],
                "tie_least": extremes["tie_least"],
            }
        return {"phase": "complete", "session_id": handle.session_id}

    def submit_choice(self, session_id: str, presentation_id: str, chosen_id: str,
                      response_time: float) -> dict:
        handle = self.get_session(session_id)
        with handle.lock:
            state = handle.state
            history = state.history
            if history and history[-1].presentation.presentation_id == presentation_id:
                # Idempotent duplicate of the last accepted submission: same
                # response, nothing recorded twice.
                return self.current_payload(handle)
            head = state.current_presentation()
            if head is None or head.presentation_id != presentation_id:
                raise StaleSubmissionError(
                    f"presentation {presentation_id!r} is neither current nor "
                    "the last accepted submission"
                )
            handle.recorder.record(presentation_id, chosen_id, response_time)
            self._flush(handle)
            return self.current_payload(handle)

    def submit_questionnaire(self, session_id: str,
                             response: QuestionnaireResponse) -> dict:
        handle = self.get_session(session_id)
        with handle.lock:
            extremes = preference_extremes(handle.state)
            handle.recorder.submit_questionnaire(
                response,
                most_preferred=extremes["most_preferred"],
                least_preferred=extremes["least_preferred"],
                tie_most=extremes["tie_most"],
                tie_least=extremes["tie_least"],
            )
            self._flush(handle)
            return {
                "phase": "complete",
                "session_id": handle.session_id,
                "most_preferred": extremes["most_preferred"],
                "least_preferred": extremes["least_preferred"],
            }

    def resolve_asset(self, experiment_id: str, ref: str) -> Path:
        record = self.get_experiment(experiment_id)
        root = record.asset_dir.resolve()
        target = (root / ref).resolve()
        if root not in target.parents and target != root:
            raise AssetResolutionError(f"asset path {ref!r} escapes the asset dir")
        if not target.is_file():
            raise UnknownIdError(f"no asset {ref!r} in experiment {experiment_id!r}")
        return target
