"""HTTP estimation service.

Serves loaded checkpoints behind a small JSON API; responses reuse the
library prediction path exactly, so served numbers equal direct
``predict()`` output.  Loaded models are immutable, making concurrent
requests safe.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from wahls.core import HlsConfig, NetworkArchitecture, parse_sample, validate_sample
from wahls.errors import TooDeep
from wahls.featurize import bops
from wahls.surrogates import checkpoint_hash, load_checkpoint_file
from wahls.surrogates.train import TrainedModel

log = logging.getLogger(__name__)

API_PREFIX = "/api/v1"


@dataclass(frozen=True)
class LoadedCheckpoint:
    checkpoint_id: str
    model: TrainedModel
    sha256: str

    def descriptor(self) -> dict:
        return {
            "id": self.checkpoint_id,
            "kind": self.model.kind,
            "checkpoint_hash": self.sha256,
            "feature_layout_version": self.model.feature_layout_version,
        }


class CheckpointRegistry:
    """Read-only catalog of loaded checkpoints, keyed by file stem."""

    def __init__(self):
        self._entries: dict[str, LoadedCheckpoint] = {}

    def add_file(self, path: Union[str, Path]) -> LoadedCheckpoint:
        path = Path(path)
        data = path.read_bytes()
        entry = LoadedCheckpoint(
            checkpoint_id=path.stem,
            model=load_checkpoint_file(path),
            sha256=checkpoint_hash(data),
        )
        self._entries[entry.checkpoint_id] = entry
        log.info("loaded checkpoint %s (%s)", entry.checkpoint_id, entry.model.kind)
        return entry

    def add_dir(self, directory: Union[str, Path]) -> int:
        count = 0
        for path in sorted(Path(directory).glob("*.ckpt")):
            self.add_file(path)
            count += 1
        return count

    def ids(self) -> list[str]:
        return sorted(self._entries)

    def get(self, checkpoint_id: str) -> Optional[LoadedCheckpoint]:
        return self._entries.get(checkpoint_id)

    def select(self, checkpoint_id: Optional[str], kind: Optional[str]) -> Optional[LoadedCheckpoint]:
        if checkpoint_id is not None:
            return self.get(checkpoint_id)
        candidates = [self._entries[i] for i in self.ids()]
        if kind is not None:
            candidates = [c for c in candidates if c.model.kind == kind]
        return candidates[0] if candidates else None

    def __len__(self) -> int:
        return len(self._entries)


class _RequestError(Exception):
    def __init__(self, status: int, message: str, detail=None):
        self.status = status
        self.message = message
        self.detail = detail
        super().__init__(message)


def _parse_estimate_request(body: dict) -> tuple[NetworkArchitecture, HlsConfig, Optional[str], Optional[str]]:
    """Validate one estimate request against the neutral record schema."""
    if not isinstance(body, dict):
        raise _RequestError(400, "request body must be a JSON object")
    for field in ("architecture", "hls_config"):
        if field not in body:
            raise _RequestError(400, f"missing field: {field}")
    # reuse the dataset-record parser by wrapping the request as a record
    record = {
        "meta_data": {"id": "request", "model_name": "request", "artifact_tarball_name": ""},
        "model_config": body["architecture"],
        "hls_config": body["hls_config"],
        "resource_report": {"bram": 0, "dsp": 0, "ff": 0, "lut": 0},
        "hls_resource_report": {"bram": 0, "dsp": 0, "ff": 0, "lut": 0},
        "latency_report": {"cycles": 0, "ii": 0},
        "target_part": body.get("hls_config", {}).get("target_part", ""),
        "vivado_version": body.get("hls_config", {}).get("vivado_version", ""),
        "hls4ml_version": body.get("hls_config", {}).get("hls4ml_version", ""),
    }
    try:
        sample = parse_sample(record)
    except Exception as exc:
        raise _RequestError(400, f"schema violation: {exc}") from exc
    violations = validate_sample(sample)
    if violations:
        raise _RequestError(
            400,
            "architecture/config validation failed",
            detail=[{"code": v.code, "message": v.message} for v in violations],
        )
    return (
        sample.architecture,
        sample.hls_config,
        body.get("checkpoint"),
        body.get("model_kind"),
    )


def _estimate(registry: CheckpointRegistry, body: dict) -> dict:
    architecture, config, checkpoint_id, kind = _parse_estimate_request(body)
    if kind is not None and kind not in ("mlp", "gnn", "transformer"):
        raise _RequestError(400, f"unknown model_kind {kind!r}")
    entry = registry.select(checkpoint_id, kind)
    if entry is None:
        raise _RequestError(404, f"no checkpoint matching id={checkpoint_id!r} kind={kind!r}")
    start = time.perf_counter()
    try:
        prediction = entry.model.predict(architecture, config)
    except TooDeep as exc:
        raise _RequestError(422, str(exc)) from exc
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return {
        "predictions": {
            "bram": prediction.bram,
            "dsp": prediction.dsp,
            "ff": prediction.ff,
            "lut": prediction.lut,
            "cycles": prediction.cycles,
            "ii": prediction.ii,
        },
        "bops": bops(architecture, config),
        "model": entry.descriptor(),
        "inference_ms": elapsed_ms,
    }


def create_app(registry: CheckpointRegistry, ui_dir: Optional[Union[str, Path]] = None) -> FastAPI:
    app = FastAPI(title="wahls estimation service")

    @app.get(f"{API_PREFIX}/health")
    def health() -> dict:
        return {"status": "ok", "models": len(registry)}

    @app.get(f"{API_PREFIX}/models")
    def models() -> list:
        return [registry.get(i).descriptor() for i in registry.ids()]

    @app.post(f"{API_PREFIX}/estimate")
    async def estimate(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "request body is not valid JSON"}, status_code=400)
        try:
            return JSONResponse(_estimate(registry, body))
        except _RequestError as exc:
            return JSONResponse({"error": exc.message, "detail": exc.detail}, status_code=exc.status)

    @app.post(f"{API_PREFIX}/compare")
    async def compare(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "request body is not valid JSON"}, status_code=400)
        requests = body.get("requests") if isinstance(body, dict) else None
        if not isinstance(requests, list):
            return JSONResponse({"error": "body must contain a 'requests' list"}, status_code=400)
        results = []
        for entry_body in requests:
            try:
                results.append({"ok": True, **_estimate(registry, entry_body)})
            except _RequestError as exc:
                results.append(
                    {"ok": False, "status": exc.status, "error": exc.message, "detail": exc.detail}
                )
        return JSONResponse({"results": results})

    ui_dir = ui_dir or os.environ.get("WAHLS_UI_DIR")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
