"""HTTP API over one loaded trace.

Endpoints (all JSON, UTF-8):

* ``GET /api/trace/meta`` — ``{"step_count": int, "files": [str]}``
* ``GET /api/steps?from&to`` — a page of steps with code, reads, writes
* ``GET /api/var/{var_id}`` — one variable instance
* ``POST /api/slice`` ``{"step_id", "path", "estimator"?}`` — a slice
  result including its provenance trail
* ``POST /api/recover`` ``{"step_id", "path", "estimator"?}`` — the
  recovered object graph for the path's root

Errors use ``{"error": {"code": ..., "message": ...}}`` with 4xx/5xx
status codes.  The trace is immutable, so concurrent requests need no
locking; each slice query runs independently.
"""

from __future__ import annotations

from typing import Optional, Sequence

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (EstimatorError, PathSyntaxError, RecovsliceError,
                     UnresolvablePath)
from .slicer import recovery_request_for, slice_dependency
from .trace_model import Trace

__all__ = ["build_app", "ApiError"]


class ApiError(Exception):
    """An error response with a status code and a machine-readable code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class SliceBody(BaseModel):
    step_id: int
    path: str
    estimator: Optional[str] = None


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def build_app(trace: Trace, *, estimators: dict[str, object],
              default: str = "oracle",
              class_structures: Sequence[str] = ()) -> FastAPI:
    """Build the API app for one trace and a set of named estimators."""
    app = FastAPI(title="recovslice", docs_url=None, redoc_url=None)
    # The explorer page is served separately (often from a file or another
    # port), so the API must answer cross-origin browser requests.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    doc = trace.to_json_obj()
    steps = doc["steps"]
    variables = {v["var_id"]: v for v in doc["variables"]}
    structures = tuple(class_structures)

    def pick_estimator(name: Optional[str]):
        chosen = name or default
        try:
            return estimators[chosen]
        except KeyError:
            raise ApiError(
                400, "estimator_unavailable",
                f"estimator {chosen!r} is not available on this server; "
                f"have {sorted(estimators)}") from None

    @app.exception_handler(ApiError)
    async def handle_api_error(_req: Request, exc: ApiError) -> JSONResponse:
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_req: Request,
                                exc: RequestValidationError) -> JSONResponse:
        return _error_response(400, "validation", str(exc.errors()))

    @app.exception_handler(RecovsliceError)
    async def handle_engine_error(_req: Request,
                                  exc: RecovsliceError) -> JSONResponse:
        return _error_response(500, "engine_error", str(exc))

    @app.get("/api/trace/meta")
    def trace_meta() -> dict:
        return {"step_count": len(steps),
                "files": list(trace.instrumented_files)}

    @app.get("/api/steps")
    def step_page(from_: int = Query(1, alias="from", ge=1),
                  to: Optional[int] = Query(None, ge=1)) -> dict:
        last = to if to is not None else from_ + 99
        page = [s for s in steps if from_ <= s["step_id"] <= last]
        return {"from": from_, "to": last, "step_count": len(steps),
                "steps": page}

    @app.get("/api/var/{var_id}")
    def variable(var_id: str) -> dict:
        try:
            return variables[var_id]
        except KeyError:
            raise ApiError(404, "unknown_var",
                           f"no variable instance {var_id!r}") from None

    def _checked(body: SliceBody):
        if not trace.has_step(body.step_id):
            raise ApiError(400, "unknown_step",
                           f"no step {body.step_id}; the trace has "
                           f"{len(steps)} steps")
        return pick_estimator(body.estimator)

    @app.post("/api/slice")
    def slice_query(body: SliceBody) -> dict:
        estimator = _checked(body)
        try:
            result = slice_dependency(trace, body.step_id, body.path,
                                      estimator,
                                      class_structures=structures)
        except PathSyntaxError as exc:
            raise ApiError(400, "bad_path", str(exc)) from exc
        except UnresolvablePath as exc:
            raise ApiError(400, "unresolvable_path", str(exc)) from exc
        return result.to_json_obj()

    @app.post("/api/recover")
    def recover_query(body: SliceBody) -> dict:
        estimator = _checked(body)
        try:
            request = recovery_request_for(trace, body.step_id, body.path,
                                           class_structures=structures)
            graph = estimator.recover_object_graph(request)
        except PathSyntaxError as exc:
            raise ApiError(400, "bad_path", str(exc)) from exc
        except UnresolvablePath as exc:
            raise ApiError(400, "unresolvable_path", str(exc)) from exc
        except EstimatorError as exc:
            raise ApiError(502, "recovery_failed", str(exc)) from exc
        return graph.to_wire_obj()

    return app
