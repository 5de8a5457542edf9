"""FastAPI application wrapping the core pipelines.

Paths in requests refer to the host the service runs on; this is an
internal data-engineering tool meant for localhost or a trusted network.
Toolkit errors map to HTTP 400 with a machine-readable payload carrying
the CLI exit code.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipelines
from ..errors import ChunkforgeError
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    BuildRequest,
    BuildResponse,
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    PostprocessRequest,
    PostprocessResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="chunkforge", version=__version__)

    @app.exception_handler(ChunkforgeError)
    async def chunkforge_error(_request: Request, exc: ChunkforgeError):
        return JSONResponse(status_code=400, content={"error": exc.to_json()})

    @app.get("/healthz", response_model=HealthResponse)
    def healthz() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/build", response_model=BuildResponse)
    def build(request: BuildRequest) -> BuildResponse:
        summary = pipelines.build_dataset(**request.model_dump())
        return BuildResponse(**summary)

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(request: AnalyzeRequest) -> AnalyzeResponse:
        summary = pipelines.analyze(**request.model_dump())
        return AnalyzeResponse(**summary)

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(request: EvaluateRequest) -> EvaluateResponse:
        summary = pipelines.evaluate_files(**request.model_dump())
        return EvaluateResponse(**summary)

    @app.post("/postprocess", response_model=PostprocessResponse)
    def postprocess(request: PostprocessRequest) -> PostprocessResponse:
        summary = pipelines.postprocess_file(**request.model_dump())
        return PostprocessResponse(**summary)

    return app


app = create_app()
