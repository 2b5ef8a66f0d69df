"""Append-only JSONL session logs and their replay.

Every record carries a schema version ``v``, a per-session monotonically
increasing ``seq``, the ``session_id`` and a timestamp ``at``.  The
session_started record embeds the full design document and seed, so a log
file is self-contained: replaying any prefix reconstructs the exact
session state at that point.
"""

from __future__ import annotations

import json
import os
import time
from typing import IO, Iterable

from ..errors import ProtocolError
from .design import design_from_dict, design_to_dict
from .session import (
    Phase,
    Presentation,
    QuestionnaireResponse,
    SessionState,
    build_schedule,
    record_choice,
    submit_questionnaire,
)

EVENT_VERSION = 1

SESSION_STARTED = "session_started"
PRESENTATION_SHOWN = "presentation_shown"
CHOICE_MADE = "choice_made"
QUESTIONNAIRE_SUBMITTED = "questionnaire_submitted"
SESSION_COMPLETED = "session_completed"


class SessionRecorder:
    """Drives a SessionState while appending protocol events."""

    def __init__(self, design, seed: int, session_id: str,
                 started_at: float | None = None, participant_label: str | None = None):
        self.session_id = session_id
        self.state = build_schedule(design, seed, started_at=started_at)
        self.events: list[dict] = []
        self._shown: set[str] = set()
        self._append(
            SESSION_STARTED,
            self.state.started_at,
            design=design_to_dict(design),
            seed=seed,
            participant_label=participant_label,
        )
        self._mark_shown(self.state.started_at)

    @classmethod
    def resume(cls, events: list[dict]) -> "SessionRecorder":
        """Rebuild a live recorder from a previously persisted log."""
        state = replay_events(events)
        recorder = cls.__new__(cls)
        recorder.session_id = events[0]["session_id"]
        recorder.state = state
        recorder.events = list(events)
        recorder._shown = {
            e["presentation"]["presentation_id"]
            for e in events
            if e["type"] == PRESENTATION_SHOWN
        }
        return recorder

    def _append(self, event_type: str, at: float, **payload) -> dict:
        event = {
            "v": EVENT_VERSION,
            "seq": len(self.events),
            "type": event_type,
            "session_id": self.session_id,
            "at": at,
            **payload,
        }
        self.events.append(event)
        return event

    def _mark_shown(self, at: float) -> None:
        head = self.state.current_presentation()
        if head is not None and head.presentation_id not in self._shown:
            self._shown.add(head.presentation_id)
            self._append(
                PRESENTATION_SHOWN,
                at,
                presentation=head.to_dict(),
                sequence_index=self.state.next_sequence_index,
            )

    def ensure_head_shown(self, at: float | None = None) -> None:
        """Emit presentation_shown for the current head if not yet logged."""
        self._mark_shown(time.time() if at is None else at)

    def record(self, presentation_id: str, chosen_id: str, response_time: float,
               at: float | None = None) -> None:
        at = time.time() if at is None else at
        record_choice(self.state, presentation_id, chosen_id, response_time, at=at)
        self._append(
            CHOICE_MADE,
            at,
            presentation_id=presentation_id,
            chosen=chosen_id,
            response_time=response_time,
        )
        self._mark_shown(at)

    def submit_questionnaire(self, response: QuestionnaireResponse,
                             at: float | None = None, **extra) -> None:
        at = time.time() if at is None else at
        submit_questionnaire(self.state, response, at=at)
        self._append(QUESTIONNAIRE_SUBMITTED, at, response=response.to_dict(), **extra)
        self._append(SESSION_COMPLETED, at)


def replay_events(events: Iterable[dict]) -> SessionState:
    """Fold a (possibly truncated) event sequence back into a state."""
    state: SessionState | None = None
    for event in events:
        etype = event["type"]
        if etype == SESSION_STARTED:
            if state is not None:
                raise ProtocolError("duplicate session_started event")
            design = design_from_dict(event["design"])
            state = build_schedule(design, event["seed"], started_at=event["at"])
        elif state is None:
            raise ProtocolError(f"event {etype} before session_started")
        elif etype == PRESENTATION_SHOWN:
            head = state.current_presentation()
            claimed = Presentation(
                pair=tuple(event["presentation"]["pair"]),
                left_id=event["presentation"]["left"],
                round=event["presentation"]["round"],
            )
            if head != claimed:
                raise ProtocolError(
                    f"log shows {claimed.presentation_id} but replay expects "
                    f"{head.presentation_id if head else 'none'}"
                )
        elif etype == CHOICE_MADE:
            record_choice(
                state,
                event["presentation_id"],
                event["chosen"],
                event["response_time"],
                at=event["at"],
            )
        elif etype == QUESTIONNAIRE_SUBMITTED:
            submit_questionnaire(
                state,
                QuestionnaireResponse(**event["response"]),
                at=event["at"],
            )
        elif etype == SESSION_COMPLETED:
            if state.phase is not Phase.COMPLETE:
                raise ProtocolError("session_completed event on an incomplete session")
        else:
            raise ProtocolError(f"unknown event type {etype!r}")
    if state is None:
        raise ProtocolError("log contains no session_started event")
    return state


def dump_events(events: Iterable[dict], stream: IO[str]) -> None:
    for event in events:
        stream.write(json.dumps(event, sort_keys=True, separators=(",", ":")))
        stream.write("\n")


def append_event(path: str, event: dict) -> None:
    """Durably append one event (write-ahead: fsync before returning)."""
    line = json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n"
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line)
        fh.flush()
        os.fsync(fh.fileno())


def load_events(path: str) -> list[dict]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


def group_by_session(events: Iterable[dict]) -> dict[str, list[dict]]:
    """Split a multi-session event stream by session id, order preserved."""
    sessions: dict[str, list[dict]] = {}
    for event in events:
        sessions.setdefault(event["session_id"], []).append(event)
    return sessions
