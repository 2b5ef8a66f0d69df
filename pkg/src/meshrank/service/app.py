"""HTTP surface over the experiment store.

Endpoints (all JSON unless noted):

    POST /experiments                         register design + assets
    POST /experiments/{eid}/sessions          start a session
    GET  /sessions/{sid}/current              current presentation/questionnaire
    POST /sessions/{sid}/choices              submit a forced choice
    POST /sessions/{sid}/questionnaire        submit the post-session ratings
    GET  /experiments/{eid}/report            aggregate statistics
    GET  /assets/{eid}/{path}                 static mesh/texture files
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from ..errors import (
    AggregationError,
    DataError,
    DesignError,
    ProtocolError,
    SessionStateError,
)
from ..protocol.session import Phase, QuestionnaireResponse
from ..stats.report import aggregate_report
from .storage import (
    AssetResolutionError,
    ExperimentStore,
    StaleSubmissionError,
    UnknownIdError,
)


class CreateExperimentRequest(BaseModel):
    design: dict
    asset_dir: str


class StartSessionRequest(BaseModel):
    seed: int | None = None
    participant_label: str | None = None


class ChoiceRequest(BaseModel):
    presentation_id: str
    chosen_id: str
    response_time: float = Field(ge=0)


class QuestionnaireRequest(BaseModel):
    realism_most_preferred: int
    realism_least_preferred: int
    confidence: int


def create_app(store: ExperimentStore, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="meshrank", version="0.1.0")

    def _wrap(fn):
        try:
            return fn()
        except UnknownIdError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except AssetResolutionError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except (DesignError, DataError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except (ProtocolError, SessionStateError, StaleSubmissionError) as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except AggregationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/experiments")
    def create_experiment(request: CreateExperimentRequest):
        eid = _wrap(lambda: store.create_experiment(request.design, request.asset_dir))
        return {"experiment_id": eid}

    @app.post("/experiments/{experiment_id}/sessions")
    def start_session(experiment_id: str, request: StartSessionRequest):
        def run():
            handle = store.start_session(
                experiment_id, seed=request.seed,
                participant_label=request.participant_label,
            )
            payload = store.current_payload(handle)
            return {
                "session_id": handle.session_id,
                "experiment_id": experiment_id,
                "seed": handle.state.seed,
                "pair_count": len(handle.state.design.pairs),
                "current": payload,
            }

        return _wrap(run)

    @app.get("/sessions/{session_id}/current")
    def current(session_id: str):
        return _wrap(lambda: store.current_payload(store.get_session(session_id)))

    @app.post("/sessions/{session_id}/choices")
    def submit_choice(session_id: str, request: ChoiceRequest):
        return _wrap(
            lambda: store.submit_choice(
                session_id,
                request.presentation_id,
                request.chosen_id,
                request.response_time,
            )
        )

    @app.post("/sessions/{session_id}/questionnaire")
    def submit_questionnaire(session_id: str, request: QuestionnaireRequest):
        def run():
            response = QuestionnaireResponse(
                realism_most_preferred=request.realism_most_preferred,
                realism_least_preferred=request.realism_least_preferred,
                confidence=request.confidence,
            )
            return store.submit_questionnaire(session_id, response)

        return _wrap(run)

    @app.get("/experiments/{experiment_id}/report")
    def report(experiment_id: str,
               group_by: str | None = Query(default=None, pattern="^(shading|confidence)$")):
        def run():
            store.get_experiment(experiment_id)
            handles = store.sessions_of(experiment_id)
            complete = [h for h in handles if h.state.phase is Phase.COMPLETE]
            incomplete = [
                {"session_id": h.session_id, "phase": h.state.phase.value}
                for h in handles
                if h.state.phase is not Phase.COMPLETE
            ]
            if not complete:
                return JSONResponse(
                    {"complete_sessions": 0, "incomplete_sessions": incomplete,
                     "report": None}
                )
            result = aggregate_report(
                [h.state for h in complete],
                group_by=group_by,
                session_ids=[h.session_id for h in complete],
            )
            return {
                "complete_sessions": len(complete),
                "incomplete_sessions": incomplete,
                "report": result.to_dict(),
            }

        return _wrap(run)

    @app.get("/assets/{experiment_id}/{ref:path}")
    def asset(experiment_id: str, ref: str):
        return FileResponse(_wrap(lambda: store.resolve_asset(experiment_id, ref)))

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
