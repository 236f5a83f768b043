"""HTTP service backing the browser annotation tool.

Serves frames and annotations for the videos of one dataset manifest.
All coordinates cross this API in native resolution; conversion to the
working resolution happens only inside the dataset loaders.  Writes to a
video's annotation CSV are serialized by a per-video lock and land via
an atomic file replacement, so concurrent readers never see a torn file.
"""

from __future__ import annotations

import os
import re
import tempfile
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from .data import (
    AnnotationRecord,
    FrameSpec,
    frame_path,
    load_annotations,
    load_manifest,
    save_annotations,
)
from .skeleton import DEFAULT_SKELETON, Skeleton

_FRAME_RE = re.compile(r"frame_(\d{6})\.png$")


class JointIn(BaseModel):
    name: str
    x: float | None = None
    y: float | None = None
    visible: bool = True


class AnnotationIn(BaseModel):
    joints: list[JointIn] = Field(min_length=1)


class _VideoState:
    def __init__(self, entry):
        self.entry = entry
        self.lock = threading.Lock()
        self.frame_indices = sorted(
            int(m.group(1))
            for m in (_FRAME_RE.search(p.name) for p in entry.frames_dir.glob("frame_*.png"))
            if m
        )


def create_app(
    manifest_path: Path | str,
    spec: FrameSpec | None = None,
    skeleton: Skeleton = DEFAULT_SKELETON,
    cadence: int = 5,
) -> FastAPI:
    """Build the annotation service for one dataset manifest.

    Only frame indices divisible by ``cadence`` are exposed for labeling;
    pass ``cadence=1`` to expose every stored frame.
    """
    spec = spec or FrameSpec()
    entries = load_manifest(manifest_path, check=False)
    videos: dict[str, _VideoState] = {e.video_id: _VideoState(e) for e in entries}
    app = FastAPI(title="limbpose annotation service")

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        details = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"errors": details})

    def _video(video_id: str) -> _VideoState:
        state = videos.get(video_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id!r}")
        return state

    def _labelable(state: _VideoState) -> list[int]:
        return [i for i in state.frame_indices if i % cadence == 0]

    @app.get("/videos")
    def list_videos():
        return {
            "cadence": cadence,
            "videos": [
                {
                    "id": vid,
                    "frame_count": len(state.frame_indices),
                    "frame_indices": _labelable(state),
                }
                for vid, state in sorted(videos.items())
            ],
        }

    @app.get("/skeleton")
    def get_skeleton():
        return skeleton.describe()

    @app.get("/videos/{video_id}/frames/{frame_index}")
    def get_frame(video_id: str, frame_index: int):
        state = _video(video_id)
        path = frame_path(state.entry.frames_dir, frame_index)
        if frame_index < 0 or not path.is_file():
            raise HTTPException(
                status_code=404,
                detail=f"frame {frame_index} of video {video_id!r} does not exist",
            )
        return FileResponse(path, media_type="image/png")

    def _load_records(state: _VideoState) -> list[AnnotationRecord]:
        if not state.entry.annotations_csv.is_file():
            return []
        return load_annotations(state.entry.annotations_csv, spec, skeleton)

    def _record_json(rec: AnnotationRecord) -> dict:
        joints = []
        for jid, name in enumerate(skeleton.joints):
            if rec.visible[jid]:
                x, y = spec.to_native(rec.xy[jid, 0], rec.xy[jid, 1])
                joints.append({"name": name, "x": x, "y": y, "visible": True})
            else:
                joints.append({"name": name, "x": None, "y": None, "visible": False})
        return {"frame_index": rec.frame_index, "joints": joints}

    @app.get("/videos/{video_id}/annotations")
    def get_annotations(video_id: str):
        state = _video(video_id)
        with state.lock:
            records = _load_records(state)
        return {
            "video_id": video_id,
            "frames": {str(rec.frame_index): _record_json(rec) for rec in records},
        }

    @app.put("/videos/{video_id}/annotations/{frame_index}")
    def put_annotation(video_id: str, frame_index: int, body: AnnotationIn):
        state = _video(video_id)
        if frame_index not in state.frame_indices:
            raise HTTPException(
                status_code=404,
                detail=f"frame {frame_index} of video {video_id!r} does not exist",
            )
        errors = []
        seen: set[str] = set()
        for i, joint in enumerate(body.joints):
            loc = f"joints.{i}"
            if joint.name not in skeleton.joints:
                errors.append({"field": f"{loc}.name", "message": f"unknown joint {joint.name!r}"})
                continue
            if joint.name in seen:
                errors.append({"field": f"{loc}.name", "message": f"duplicate joint {joint.name!r}"})
            seen.add(joint.name)
            if joint.visible:
                if joint.x is None or joint.y is None:
                    errors.append(
                        {"field": loc, "message": "visible joints need both x and y"}
                    )
                elif not (
                    0 <= joint.x < spec.native_width and 0 <= joint.y < spec.native_height
                ):
                    errors.append(
                        {
                            "field": loc,
                            "message": (
                                f"({joint.x}, {joint.y}) outside native bounds "
                                f"{spec.native_width}x{spec.native_height}"
                            ),
                        }
                    )
        if errors:
            raise HTTPException(status_code=400, detail=errors)

        rec = AnnotationRecord.empty(video_id, frame_index, skeleton)
        for joint in body.joints:
            jid = skeleton.joint_index(joint.name)
            if joint.visible:
                rec.xy[jid] = spec.to_working(joint.x, joint.y)
                rec.visible[jid] = True
        with state.lock:
            records = [
                r for r in _load_records(state) if r.frame_index != frame_index
            ]
            records.append(rec)
            _atomic_save(records, state.entry.annotations_csv, spec, skeleton)
        return {"status": "saved", "frame_index": frame_index, "video_id": video_id}

    return app


def _atomic_save(records, csv_path: Path, spec: FrameSpec, skeleton: Skeleton) -> None:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        prefix=csv_path.stem + ".", suffix=".tmp", dir=csv_path.parent
    )
    os.close(fd)
    try:
        save_annotations(records, tmp_name, spec, skeleton)
        os.replace(tmp_name, csv_path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def serve(
    manifest_path: Path | str,
    host: str = "127.0.0.1",
    port: int = 8008,
    spec: FrameSpec | None = None,
    cadence: int = 5,
) -> None:
    """Run the annotation service until interrupted."""
    import uvicorn

    app = create_app(manifest_path, spec=spec, cadence=cadence)
    uvicorn.run(app, host=host, port=port, log_level="info")
