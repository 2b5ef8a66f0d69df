"""Simulated participants for protocol validation and power analysis.

Choice models operate on a log2 quality scale, so adjacent steps of the
standard 1K/5K/10K/20K ladder are roughly one unit apart and the logistic
discriminability ``beta`` reads as "per doubling of triangle count".
All models decide the canonical pair member A with probability

    p(choose A) = sigmoid(beta_eff * (log2 q_A - log2 q_B))

which makes beta = 0 draw-for-draw identical to the pure guesser, and the
deterministic observer the beta -> infinity limit on tie-free designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .protocol.design import ExperimentDesign
from .protocol.events import SessionRecorder
from .protocol.rng import OBSERVER_CHOICES, OBSERVER_RESPONSES, substream
from .protocol.session import (
    QuestionnaireResponse,
    SessionState,
    repetition_count,
    session_outcomes,
    session_scores,
)
from .stats.preference import circular_triads, preference_matrix, tournament_from_matrix

DETERMINISTIC = "deterministic"
GUESSER = "guesser"
LOGISTIC = "logistic"
SHADING_MASKED = "shading_masked"

_KINDS = (DETERMINISTIC, GUESSER, LOGISTIC, SHADING_MASKED)


@dataclass
class ObserverModel:
    """Parametric forced-choice behavior.

    shading_factors scale beta per shading mode (default 1.0), encoding
    "shading masks detail" hypotheses; a mixed pair takes the geometric
    mean of its two factors, so all-ones reduces exactly to logistic.
    """

    kind: str = GUESSER
    beta: float = 0.0
    shading_factors: dict[str, float] = field(default_factory=dict)
    response_log_mean: float = 0.0  # lognormal parameters, seconds
    response_log_sigma: float = 0.35
    questionnaire: QuestionnaireResponse | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown observer kind {self.kind!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")

    def probability_choose_first(self, design: ExperimentDesign,
                                 pair: tuple[str, str]) -> float:
        a = design.stimulus(pair[0])
        b = design.stimulus(pair[1])
        delta = math.log2(a.quality) - math.log2(b.quality)
        if self.kind == DETERMINISTIC:
            # Ties break toward the canonical member; no randomness at all.
            return 1.0 if delta >= 0 else 0.0
        if self.kind == GUESSER:
            return 0.5
        beta = self.beta
        if self.kind == SHADING_MASKED:
            fa = self.shading_factors.get(a.shading.value, 1.0)
            fb = self.shading_factors.get(b.shading.value, 1.0)
            beta *= math.sqrt(fa * fb)
        x = beta * delta
        if x >= 0:
            return 1.0 / (1.0 + math.exp(-x))
        e = math.exp(x)
        return e / (1.0 + e)

    def default_questionnaire(self) -> QuestionnaireResponse:
        if self.questionnaire is not None:
            return self.questionnaire
        if self.kind == DETERMINISTIC:
            confidence = 1
        else:
            confidence = max(1, min(10, 1 + round(9 * math.exp(-self.beta))))
        return QuestionnaireResponse(
            realism_most_preferred=7,
            realism_least_preferred=3,
            confidence=confidence,
        )


def simulate_session(model: ObserverModel, design: ExperimentDesign, seed: int,
                     session_id: str = "sim",
                     recorder: SessionRecorder | None = None) -> SessionState:
    """Run one full session under the model; returns the completed state.

    Time is virtual: the session starts at t=0 and each choice advances
    the clock by its sampled response time, so identical (model, design,
    seed) triples produce byte-identical logs.
    """
    recorder = recorder or SessionRecorder(design, seed, session_id, started_at=0.0)
    choices = substream(seed, OBSERVER_CHOICES)
    responses = substream(seed, OBSERVER_RESPONSES)
    clock = recorder.state.started_at

    while recorder.state.pending:
        head = recorder.state.current_presentation()
        p_first = model.probability_choose_first(design, head.pair)
        if model.kind == DETERMINISTIC:
            chosen = head.pair[0] if p_first >= 0.5 else head.pair[1]
        else:
            chosen = head.pair[0] if choices.random() < p_first else head.pair[1]
        rt = float(responses.lognormal(model.response_log_mean, model.response_log_sigma))
        clock += rt
        recorder.record(head.presentation_id, chosen, rt, at=clock)

    recorder.submit_questionnaire(model.default_questionnaire(), at=clock)
    return recorder.state


def simulate_session_with_events(model: ObserverModel, design: ExperimentDesign,
                                 seed: int, session_id: str = "sim"
                                 ) -> tuple[SessionState, list[dict]]:
    recorder = SessionRecorder(design, seed, session_id, started_at=0.0)
    state = simulate_session(model, design, seed, session_id, recorder=recorder)
    return state, recorder.events


def _quality_rank(design: ExperimentDesign) -> dict[str, int]:
    levels = sorted({s.quality for s in design.stimuli})
    index = {q: i + 1 for i, q in enumerate(levels)}
    return {s.id: index[s.quality] for s in design.stimuli}


def _plain_pearson(x: list[float], y: list[float]) -> float:
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return 0.0  # no association measurable on a constant axis
    return sxy / math.sqrt(sxx * syy)


@dataclass
class PowerSweepRow:
    beta: float
    mean_r: float
    repetition_rate: float  # third presentations per pair
    mean_zeta: float
    replications: int


def power_sweep(design: ExperimentDesign, betas: list[float], replications: int,
                seed: int, shading_factors: dict[str, float] | None = None
                ) -> list[PowerSweepRow]:
    """Map discriminability to the protocol's observables.

    beta = 0 is the guesser, beta = math.inf the deterministic observer;
    anything else runs the logistic model (with shading factors when
    given).  Per-replication seeds derive from one root SeedSequence, so
    the sweep is reproducible and rows are independent.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    ranks = _quality_rank(design)
    root = np.random.SeedSequence(seed)
    rows = []
    for beta_index, beta in enumerate(betas):
        if beta == 0:
            model = ObserverModel(kind=GUESSER)
        elif math.isinf(beta):
            model = ObserverModel(kind=DETERMINISTIC)
        elif shading_factors:
            model = ObserverModel(kind=SHADING_MASKED, beta=beta,
                                  shading_factors=dict(shading_factors))
        else:
            model = ObserverModel(kind=LOGISTIC, beta=beta)
        child = np.random.Generator(np.random.PCG64(root.spawn(beta_index + 1)[beta_index]))
        seeds = child.integers(0, 2**63 - 1, size=replications)
        r_values = []
        rep_rates = []
        zetas = []
        for rep_seed in seeds:
            state = simulate_session(model, design, int(rep_seed))
            scores = session_scores(state)
            xs = [float(ranks[sid]) for sid in state.design.ids]
            ys = [scores[sid] for sid in state.design.ids]
            r_values.append(_plain_pearson(xs, ys))
            rep_rates.append(repetition_count(state) / len(design.pairs))
            matrix = preference_matrix(session_outcomes(state), design.ids)
            _, zeta = circular_triads(tournament_from_matrix(matrix))
            zetas.append(zeta)
        rows.append(
            PowerSweepRow(
                beta=beta,
                mean_r=sum(r_values) / replications,
                repetition_rate=sum(rep_rates) / replications,
                mean_zeta=sum(zetas) / replications,
                replications=replications,
            )
        )
    return rows
