"""HTTP JSON API for the annotation service, plus static hosting of the UI."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .annotation import AnnotationError, AnnotationService, ClusterNotFound


class AnnotationRequest(BaseModel):
    decision: str
    label: str | None = None
    note: str = ""
    version: int | None = None


class ClassifyRequest(BaseModel):
    text: str


def create_app(run_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    service = AnnotationService(run_dir)
    app = FastAPI(title="relation cluster review", version="0.1.0")
    app.state.service = service

    @app.middleware("http")
    async def stamp_run_id(request, call_next):
        # every response names the run it answers for, including raw
        # artifact bodies that cannot carry it inline
        response = await call_next(request)
        response.headers["X-Run-Id"] = service.run_id
        return response

    @app.get("/clusters")
    def list_clusters(
        status: str | None = Query(default=None),
        sort: str = Query(default="cluster_id"),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=20, ge=1, le=200),
    ):
        try:
            return service.list_clusters(status=status, sort=sort, page=page, page_size=page_size)
        except AnnotationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/clusters/{cluster_id}")
    def get_cluster(cluster_id: int):
        try:
            view = service.get_cluster(cluster_id)
        except ClusterNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"run_id": service.run_id, "cluster": view}

    @app.post("/clusters/{cluster_id}/annotation")
    def annotate(cluster_id: int, body: AnnotationRequest):
        try:
            annotation = service.annotate(
                cluster_id,
                decision=body.decision,
                label=body.label,
                note=body.note,
                expected_version=body.version,
            )
        except ClusterNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except AnnotationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "run_id": service.run_id,
            "annotation": {
                "cluster_id": annotation.cluster_id,
                "status": annotation.status,
                "final_label": annotation.final_label,
                "version": annotation.version,
                "conflict": annotation.conflict,
            },
        }

    @app.post("/classify")
    def classify(body: ClassifyRequest):
        try:
            return service.classify(body.text)
        except AnnotationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/graph")
    def graph(format: str = Query(default="json")):
        if format == "json":
            return PlainTextResponse(service.graph_json, media_type="application/json")
        if format == "dot":
            return PlainTextResponse(service.graph_dot, media_type="text/vnd.graphviz")
        raise HTTPException(status_code=400, detail=f"unknown format {format!r}")

    @app.get("/run/report")
    def report():
        return {"run_id": service.run_id, "report": service.report}

    @app.get("/aliases")
    def aliases():
        return {"run_id": service.run_id, "aliases": service.alias_table}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def index():
            return RedirectResponse(url="/ui/")

    return app
