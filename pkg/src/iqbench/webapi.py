"""HTTP wire API over the session manager (schema session/1).

Paths: POST /sessions, POST /sessions/{id}/actions, GET /sessions/{id},
POST /sessions/{id}/finish.  Errors are structured {code, message} with
conventional status codes.  A browser-client directory can be mounted at
the root so the UI and the API share an origin.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .service import (ActionOutOfRange, InvalidConfig, SessionBusy, SessionError,
                      SessionFinished, SessionManager, SessionNotFound, UnknownWorldSpec)

_STATUS = {
    UnknownWorldSpec: 400,
    InvalidConfig: 400,
    ActionOutOfRange: 400,
    SessionNotFound: 404,
    SessionFinished: 409,
    SessionBusy: 409,
}


def create_app(manager: SessionManager,
               ui_dir: Optional[Union[str, Path]] = None) -> FastAPI:
    app = FastAPI(title="iqbench session service", version="1.0")

    @app.exception_handler(SessionError)
    async def session_error_handler(request: Request, exc: SessionError):
        return JSONResponse(status_code=_STATUS.get(type(exc), 500),
                            content={"code": exc.code, "message": str(exc)})

    @app.post("/sessions")
    async def create_session(request: Request):
        payload = await request.json()
        return manager.create_session(payload if isinstance(payload, dict) else {})

    @app.post("/sessions/{session_id}/actions")
    async def post_action(session_id: str, request: Request):
        payload = await request.json()
        action = payload.get("action") if isinstance(payload, dict) else None
        return manager.post_action(session_id, action)

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return manager.get_session(session_id)

    @app.post("/sessions/{session_id}/finish")
    async def finish_session(session_id: str):
        return manager.finish_session(session_id)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
