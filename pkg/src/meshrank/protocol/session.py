"""Forced-choice session state machine.

A session shows every pair twice in a seed-shuffled order with seeded
left/right assignment.  When the two answers for a pair disagree, a third
presentation of that pair is inserted at a seeded uniformly random slot
among the remaining pending items, so the pair can never end tied.  The
whole session is a deterministic fold of the choice list over
(design, seed): replaying the same choices reproduces the state exactly.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

from ..errors import DataError, ProtocolError, SessionStateError
from .design import ExperimentDesign, design_to_dict
from .rng import SessionStreams


class Phase(str, enum.Enum):
    COMPARING = "comparing"
    QUESTIONNAIRE = "questionnaire"
    COMPLETE = "complete"


@dataclass(frozen=True)
class Presentation:
    pair: tuple[str, str]  # canonical: lower id first
    left_id: str
    round: int  # 1 or 2 from the base schedule, 3 for a tie-break

    @property
    def presentation_id(self) -> str:
        return f"{self.pair[0]}~{self.pair[1]}#r{self.round}"

    @property
    def right_id(self) -> str:
        return self.pair[1] if self.left_id == self.pair[0] else self.pair[0]

    def to_dict(self) -> dict:
        return {
            "presentation_id": self.presentation_id,
            "pair": list(self.pair),
            "left": self.left_id,
            "round": self.round,
        }


@dataclass(frozen=True)
class ChoiceRecord:
    presentation: Presentation
    sequence_index: int  # realized position in the session, 0-based
    chosen_id: str
    response_time: float
    at: float  # seconds since epoch (virtual for simulations)

    def to_dict(self) -> dict:
        return {
            "presentation_id": self.presentation.presentation_id,
            "sequence_index": self.sequence_index,
            "chosen": self.chosen_id,
            "response_time": self.response_time,
            "at": self.at,
        }


@dataclass(frozen=True)
class QuestionnaireResponse:
    """Post-session ratings, all on the 1-10 integer scale.

    Confidence reads 1 = always certain, 10 = always guessing.
    """

    realism_most_preferred: int
    realism_least_preferred: int
    confidence: int

    def __post_init__(self):
        for label in ("realism_most_preferred", "realism_least_preferred", "confidence"):
            value = getattr(self, label)
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 10:
                raise DataError(f"{label} must be an integer in 1..10, got {value!r}")

    def to_dict(self) -> dict:
        return {
            "realism_most_preferred": self.realism_most_preferred,
            "realism_least_preferred": self.realism_least_preferred,
            "confidence": self.confidence,
        }


@dataclass(frozen=True)
class PairOutcome:
    pair: tuple[str, str]
    t_a: int
    t_b: int

    @property
    def ps(self) -> float:
        return pair_outcome(self.t_a, self.t_b)


def pair_outcome(t_a: int, t_b: int) -> float:
    """Signed preference strength (t_a - t_b) / (t_a + t_b)."""
    if t_a + t_b not in (2, 3):
        raise ProtocolError(f"a pair is presented 2 or 3 times, got {t_a + t_b}")
    if t_a == t_b:
        raise ProtocolError("the protocol cannot end a pair in a tie")
    return (t_a - t_b) / (t_a + t_b)


@dataclass(eq=False)
class SessionState:
    design: ExperimentDesign
    seed: int
    pending: list[Presentation]
    history: list[ChoiceRecord] = field(default_factory=list)
    phase: Phase = Phase.COMPARING
    started_at: float = 0.0
    ended_at: float | None = None
    questionnaire: QuestionnaireResponse | None = None
    streams: SessionStreams = None  # type: ignore[assignment]

    @property
    def pair_count(self) -> int:
        return len(self.design.pairs)

    def current_presentation(self) -> Presentation | None:
        return self.pending[0] if self.pending else None

    @property
    def next_sequence_index(self) -> int:
        return len(self.history)

    def snapshot(self) -> dict:
        """Canonical value of the full session state, for equality checks."""
        return {
            "design": design_to_dict(self.design),
            "seed": self.seed,
            "pending": [p.to_dict() for p in self.pending],
            "history": [c.to_dict() for c in self.history],
            "phase": self.phase.value,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "questionnaire": self.questionnaire.to_dict() if self.questionnaire else None,
            "rng": self.streams.state_snapshot(),
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, SessionState) and self.snapshot() == other.snapshot()


def build_schedule(design: ExperimentDesign, seed: int,
                   started_at: float | None = None) -> SessionState:
    """Create a fresh session: every pair scheduled twice, seed-shuffled.

    Draw order is fixed so replays are stable: one permutation from the
    order stream, then one side bit per presentation in schedule order.
    """
    streams = SessionStreams(seed)
    base = [(pair, r) for pair in design.pairs for r in (1, 2)]
    perm = streams.order.permutation(len(base))
    pending = []
    for idx in perm:
        pair, rnd = base[idx]
        left = pair[0] if streams.sides.integers(0, 2) == 0 else pair[1]
        pending.append(Presentation(pair=pair, left_id=left, round=rnd))
    return SessionState(
        design=design,
        seed=seed,
        pending=pending,
        started_at=time.time() if started_at is None else started_at,
        streams=streams,
    )


def record_choice(state: SessionState, presentation_id: str, chosen_id: str,
                  response_time: float, at: float | None = None) -> SessionState:
    """Apply one forced choice to the head of the pending schedule.

    A disagreement between rounds 1 and 2 of a pair schedules its round-3
    presentation: side drawn from the sides stream, slot drawn uniformly
    from the insertions stream over the remaining pending positions.
    """
    if state.phase is not Phase.COMPARING:
        raise SessionStateError(f"cannot record a choice in phase {state.phase.value}")
    head = state.current_presentation()
    if head is None or head.presentation_id != presentation_id:
        raise ProtocolError(
            f"presentation {presentation_id!r} is not the current head "
            f"({head.presentation_id if head else 'none'})"
        )
    if chosen_id not in head.pair:
        raise ProtocolError(f"chosen stimulus {chosen_id!r} is not in pair {head.pair}")
    if response_time < 0:
        raise ProtocolError("response_time must be >= 0")

    state.pending.pop(0)
    state.history.append(
        ChoiceRecord(
            presentation=head,
            sequence_index=len(state.history),
            chosen_id=chosen_id,
            response_time=float(response_time),
            at=time.time() if at is None else at,
        )
    )

    if head.round in (1, 2):
        # Rounds 1 and 2 are shuffled independently, so either may be
        # answered first; the tie-break triggers on the pair's second answer.
        answers = [
            r.chosen_id for r in state.history
            if r.presentation.pair == head.pair and r.presentation.round in (1, 2)
        ]
        if len(answers) == 2 and answers[0] != answers[1]:
            side = head.pair[0] if state.streams.sides.integers(0, 2) == 0 else head.pair[1]
            third = Presentation(pair=head.pair, left_id=side, round=3)
            slot = int(state.streams.insertions.integers(0, len(state.pending) + 1))
            state.pending.insert(slot, third)

    if not state.pending:
        state.phase = Phase.QUESTIONNAIRE
    return state


def submit_questionnaire(state: SessionState, response: QuestionnaireResponse,
                         at: float | None = None) -> SessionState:
    if state.phase is not Phase.QUESTIONNAIRE:
        raise SessionStateError(f"cannot submit questionnaire in phase {state.phase.value}")
    state.questionnaire = response
    state.phase = Phase.COMPLETE
    state.ended_at = time.time() if at is None else at
    return state


def session_outcomes(state: SessionState) -> list[PairOutcome]:
    """Per-pair preference counts, defined once comparing has finished."""
    if state.phase is Phase.COMPARING:
        raise SessionStateError("outcomes are defined only after the last comparison")
    counts: dict[tuple[str, str], list[int]] = {pair: [0, 0] for pair in state.design.pairs}
    for record in state.history:
        pair = record.presentation.pair
        counts[pair][0 if record.chosen_id == pair[0] else 1] += 1
    outcomes = []
    for pair in state.design.pairs:
        t_a, t_b = counts[pair]
        pair_outcome(t_a, t_b)  # validates the reachable (2,0)/(2,1) shapes
        outcomes.append(PairOutcome(pair=pair, t_a=t_a, t_b=t_b))
    return outcomes


def session_scores(state: SessionState) -> dict[str, float]:
    """Total preference score per stimulus: sum of signed ps over its pairs."""
    scores = {s.id: 0.0 for s in state.design.stimuli}
    for outcome in session_outcomes(state):
        ps = outcome.ps
        scores[outcome.pair[0]] += ps
        scores[outcome.pair[1]] -= ps
    return scores


def preference_extremes(state: SessionState) -> dict:
    """Most and least preferred stimulus by total score.

    Equal totals break toward the lower id for "most" and the higher id
    for "least"; the flags record that a tie-break happened.
    """
    scores = session_scores(state)
    best = max(scores.values())
    worst = min(scores.values())
    most_candidates = sorted(sid for sid, v in scores.items() if v == best)
    least_candidates = sorted(sid for sid, v in scores.items() if v == worst)
    return {
        "most_preferred": most_candidates[0],
        "least_preferred": least_candidates[-1],
        "tie_most": len(most_candidates) > 1,
        "tie_least": len(least_candidates) > 1,
    }


def session_duration(state: SessionState) -> float:
    if state.phase is not Phase.COMPLETE or state.ended_at is None:
        raise SessionStateError("duration is defined only for completed sessions")
    return state.ended_at - state.started_at


def repetition_count(state: SessionState) -> int:
    """Number of third presentations triggered so far (shown or pending)."""
    shown = sum(1 for r in state.history if r.presentation.round == 3)
    queued = sum(1 for p in state.pending if p.round == 3)
    return shown + queued
