"""HTTP annotation and shadow-preview service backing the browser client.

Sessions live in memory, one per image; mutations are serialized with a
per-image lock. Committing persists the annotation JSON under
`annotations/` next to the manifest (last writer wins, logged).
"""

from __future__ import annotations

import logging
import threading
from dataclasses import replace as dc_replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .config import Config
from .errors import (
    BelowMinimumError,
    BindError,
    OutOfBoundsError,
    SessionClosedError,
    SetFullError,
    ShadowToolError,
)
from .geometry import (
    AnnotationRecord,
    AnnotationSession,
    Point2,
    record_from_json,
    record_to_json,
    session_add_point,
    session_commit,
    session_undo,
)
from .imgio import encode_rgb_png, load_rgb
from .manifest import Manifest
from .pipeline import run_shadow_pipeline
from .triangle import LightEstimate

log = logging.getLogger(__name__)

# HTTP status per error class; anything else maps to 500.
_STATUS = {
    BelowMinimumError: 409,
    SessionClosedError: 409,
    SetFullError: 409,
    OutOfBoundsError: 422,
}


def _error_response(exc: ShadowToolError) -> JSONResponse:
    status = _STATUS.get(type(exc), 400)
    return JSONResponse(
        status_code=status,
        content={"code": type(exc).__name__, "message": str(exc)},
    )


class AnnotationStore:
    """Sessions and committed records for the images of one manifest."""

    def __init__(self, manifest: Manifest, cfg: Config):
        self.manifest = manifest
        self.cfg = cfg
        self.sessions: dict = {}
        self.records: dict = {}
        self._locks: dict = {}
        self._global = threading.Lock()
        self.out_dir = manifest.root / "annotations"
        for image_id, path in manifest.annotations.items():
            self.records[image_id] = record_from_json(path.read_text(encoding="utf-8"))

    def lock_for(self, image_id: str) -> threading.Lock:
        with self._global:
            if image_id not in self._locks:
                self._locks[image_id] = threading.Lock()
            return self._locks[image_id]

    def image_dims(self, image_id: str):
        t = self.manifest.get(image_id)
        img = load_rgb(t.composite_path)
        return img.shape[1], img.shape[0]

    def session(self, image_id: str) -> AnnotationSession:
        self.manifest.get(image_id)  # existence check
        if image_id not in self.sessions:
            w, h = self.image_dims(image_id)
            self.sessions[image_id] = AnnotationSession(
                image_id=image_id,
                canvas_w=self.cfg.canvas_w,
                canvas_h=self.cfg.canvas_h,
                original_w=w,
                original_h=h,
                k_min=self.cfg.k_min,
            )
        return self.sessions[image_id]

    def persist(self, record: AnnotationRecord) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / f"{record.image_id}.json"
        if path.exists() or record.image_id in self.records:
            log.warning("overwriting annotation for %s (last writer wins)", record.image_id)
        path.write_text(record_to_json(record) + "\n", encoding="utf-8")
        self.records[record.image_id] = record
        return path


def session_view(session: AnnotationSession) -> dict:
    return {
        "image_id": session.image_id,
        "next_keypoint_name": session.next_name,
        "placed": [
            {"name": name, "x": p.x, "y": p.y} for name, p in session.placed()
        ],
        "committed": session.state == "committed",
    }


def create_app(manifest: Manifest, cfg: Optional[Config] = None) -> FastAPI:
    cfg = cfg or Config()
    store = AnnotationStore(manifest, cfg)
    app = FastAPI(title="shadowcast annotation service")
    app.state.store = store

    @app.exception_handler(ShadowToolError)
    async def _tool_error(_request: Request, exc: ShadowToolError):
        return _error_response(exc)

    @app.get("/api/images")
    def list_images():
        out = []
        for t in store.manifest.tuples:
            w, h = store.image_dims(t.tuple_id)
            out.append({
                "image_id": t.tuple_id,
                "width": w,
                "height": h,
                "annotated": t.tuple_id in store.records,
            })
        return out

    @app.get("/api/image/{image_id}")
    def get_image(image_id: str):
        t = store.manifest.get(image_id)
        return Response(content=t.composite_path.read_bytes(), media_type="image/png")

    @app.get("/api/session/{image_id}")
    def get_session(image_id: str):
        with store.lock_for(image_id):
            return session_view(store.session(image_id))

    @app.post("/api/session/{image_id}/point")
    def post_point(image_id: str, body: dict):
        if "x" not in body or "y" not in body:
            return JSONResponse(
                status_code=422,
                content={"code": "BadRequest", "message": "body must carry x and y"},
            )
        with store.lock_for(image_id):
            session = store.session(image_id)
            session = session_add_point(session, Point2(float(body["x"]), float(body["y"])))
            store.sessions[image_id] = session
            return session_view(session)

    @app.post("/api/session/{image_id}/undo")
    def post_undo(image_id: str):
        with store.lock_for(image_id):
            session = store.session(image_id)
            session = session_undo(session)
            store.sessions[image_id] = session
            return session_view(session)

    @app.post("/api/session/{image_id}/commit")
    def post_commit(image_id: str, body: Optional[dict] = None):
        with store.lock_for(image_id):
            session = store.session(image_id)
            if body and body.get("pose") in ("front", "side"):
                session = dc_replace(session, pose=body["pose"])
            session, record = session_commit(session, width_ratio=store.cfg.width_ratio)
            store.sessions[image_id] = session
            path = store.persist(record)
            view = session_view(session)
            view["annotation_path"] = str(path)
            return view

    @app.get("/api/annotation/{image_id}")
    def get_annotation(image_id: str):
        store.manifest.get(image_id)
        record = store.records.get(image_id)
        if record is None:
            return JSONResponse(
                status_code=404,
                content={"code": "NotFound", "message": f"no annotation for {image_id!r}"},
            )
        return Response(content=record_to_json(record), media_type="application/json")

    @app.post("/api/preview/shadow")
    def preview_shadow(body: dict):
        image_id = body.get("image_id")
        if not image_id:
            return JSONResponse(
                status_code=422,
                content={"code": "BadRequest", "message": "body must carry image_id"},
            )
        t = store.manifest.get(image_id)
        record = store.records.get(image_id)
        if record is None:
            session = store.sessions.get(image_id)
            if session is not None and len(session.points) >= session.k_min:
                _, record = session_commit(session, width_ratio=store.cfg.width_ratio)
            else:
                return JSONResponse(
                    status_code=409,
                    content={
                        "code": "NoAnnotation",
                        "message": f"image {image_id!r} has no committed annotation",
                    },
                )
        cfg = store.cfg
        if "alpha" in body:
            cfg = dc_replace(cfg, alpha=float(body["alpha"]))
        if "sigma" in body:
            cfg = dc_replace(cfg, sigma=float(body["sigma"]))
        light = None
        if "theta" in body:
            azimuth = body.get("azimuth", [cfg.default_azimuth_x, cfg.default_azimuth_y])
            light = LightEstimate.from_theta(float(body["theta"]), azimuth)
        result = run_shadow_pipeline(t, record, cfg, light_override=light)
        return Response(content=encode_rgb_png(result.output), media_type="image/png")

    return app


def serve_annotation_api(manifest: Manifest, cfg: Config) -> None:
    """Run the service until interrupted."""
    import uvicorn

    host, port = cfg.bind_host_port()
    app = create_app(manifest, cfg)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except OSError as exc:
        raise BindError(f"cannot bind {cfg.bind}: {exc}") from exc
