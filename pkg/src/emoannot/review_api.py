"""REST surface for the review service.

Endpoints (JSON bodies):

- ``GET  /queue/next?reviewer=ID`` - next sample for this reviewer
- ``GET  /samples/{id}``           - sample view
- ``POST /samples``                - enqueue a refined record
- ``POST /samples/{id}/votes``     - submit or replace a ballot
- ``GET  /samples/{id}/tally``     - current tally
- ``POST /export``                 - write accepted records to a file

Status codes: 404 unknown sample / empty queue, 422 score out of range or
missing refinement, 409 vote on an already-decided sample.
"""
from __future__ import annotations

from fastapi import FastAPI, Query
from fastapi.requests import Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    DecisionConflictError,
    MissingRefinementError,
    ScoreOutOfRangeError,
    UnknownSampleError,
)
from .review import ReviewService, make_ballot
from .store import AnnotationRecord


class VoteBody(BaseModel):
    reviewer_id: str
    criteria_scores: list[float]
    verdict: str


class ExportBody(BaseModel):
    path: str


def create_app(service: ReviewService) -> FastAPI:
    app = FastAPI(title="annotation review service")

    def _error_handler(status: int):
        def handler(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=status,
                                content={"detail": str(exc),
                                         "code": type(exc).__name__})
        return handler

    app.add_exception_handler(UnknownSampleError, _error_handler(404))
    app.add_exception_handler(ScoreOutOfRangeError, _error_handler(422))
    app.add_exception_handler(MissingRefinementError, _error_handler(422))
    app.add_exception_handler(DecisionConflictError, _error_handler(409))

    @app.get("/queue/next")
    def queue_next(reviewer: str = Query(...)):
        record = service.next_for_review(reviewer)
        if record is None:
            return JSONResponse(status_code=404,
                                content={"detail": "queue empty",
                                         "code": "QueueEmpty"})
        return service.view(record.sample_id)

    @app.get("/samples/{sample_id}")
    def get_sample(sample_id: str):
        return service.view(sample_id)

    @app.post("/samples")
    def enqueue(record: dict):
        parsed = AnnotationRecord.from_json_dict(record)
        position = service.enqueue(parsed)
        return {"sample_id": parsed.sample_id, "position": position}

    @app.post("/samples/{sample_id}/votes")
    def submit_vote(sample_id: str, body: VoteBody):
        ballot = make_ballot(sample_id, body.reviewer_id,
                             body.criteria_scores, body.verdict)
        tally = service.submit_vote(ballot)
        return tally.to_json_dict()

    @app.get("/samples/{sample_id}/tally")
    def get_tally(sample_id: str):
        return service.tally(sample_id).to_json_dict()

    @app.post("/export")
    def export(body: ExportBody):
        count = service.export_selected(body.path)
        return {"accepted": count, "path": body.path}

    return app
