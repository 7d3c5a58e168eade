"""HTTP API consumed by the web UI.

One profile is loaded at a time; suggestions accumulate in an in-memory,
content-addressed store, so re-requesting the same optimization is
idempotent. Everything else is stateless: a restart loses only the loaded
profile and the suggestion store.

The optimize endpoint streams server-sent events regardless of which
upstream protocol the model speaks; errors mid-stream arrive in-band as a
terminal ``error`` frame. Validation requests serialize through one lock
because overlapping benchmarks would corrupt each other's timings.
"""

from __future__ import annotations

import json
import queue
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .bench import bench_pair
from .config import Config
from .errors import GatewayError, MissingSource, PerfAdvisorError
from .gateway import chat_stream, health_check
from .hotspots import HotspotRegion, detect_hotspots, expand_region
from .profile import ProfileDocument, serialize_profile, source_digest
from .prompts import load_templates, build_prompt, template_for_reason
from .suggest import Suggestion, build_suggestion, file_source_provider, suggestion_to_json

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>perfadvisor</title></head>
<body>
<h1>perfadvisor service</h1>
<p>No web UI assets configured. Point <code>ui_assets_dir</code> (or
<code>--ui-assets</code>) at a built frontend, or use the JSON API:
<code>/api/profile</code>, <code>/api/hotspots</code>, <code>/api/source</code>,
<code>/api/optimize</code>, <code>/api/validate</code>, <code>/api/models</code>.</p>
</body></html>
"""


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _sse(payload: dict) -> str:
    return f"data: {json.dumps(payload, ensure_ascii=False)}\n\n"


def region_to_json(r: HotspotRegion) -> dict:
    return {
        "path": r.path,
        "start_line": r.start_line,
        "end_line": r.end_line,
        "reason": r.reason,
        "score": r.score,
        "context_start": r.context_start,
        "context_end": r.context_end,
    }


class ServiceState:
    """Mutable service-side state: profile, suggestion store, bench lock."""

    def __init__(self, config: Config, profile_doc: Optional[ProfileDocument] = None):
        self.config = config
        self.profile: Optional[ProfileDocument] = profile_doc
        self.sources = file_source_provider(config.source_root)
        self.templates = load_templates(config.templates_dir)
        self.suggestions: dict[str, Suggestion] = {}
        self.validate_lock = threading.Lock()
        self.store_lock = threading.Lock()

    def hotspots(self) -> list[HotspotRegion]:
        assert self.profile is not None
        regions = detect_hotspots(self.profile, self.config.thresholds)
        return [
            expand_region(r, self.profile.files[r.path], self.config.thresholds)
            for r in regions
        ]

    def resolve_endpoint(self, name: str):
        if name in self.config.endpoints:
            return self.config.endpoints[name]
        for ep in self.config.endpoints.values():
            if ep.model == name:
                return ep
        return None

    def checked_source(self, path: str) -> tuple[Optional[str], Optional[str]]:
        """Return (text, error_code); digest-checks against the profile."""
        assert self.profile is not None
        fp = self.profile.files.get(path)
        if fp is None:
            return None, "unknown-path"
        try:
            data = self.sources(path)
        except OSError:
            return None, "unreadable"
        if fp.source_digest and source_digest(data) != fp.source_digest:
            return None, "source-mismatch"
        return data.decode("utf-8", errors="replace"), None


def create_app(config: Config, profile_doc: Optional[ProfileDocument] = None) -> FastAPI:
    state = ServiceState(config, profile_doc)
    app = FastAPI(title="perfadvisor", version=__version__)
    app.state.advisor = state

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz() -> str:
        return "ok"

    @app.get("/api/profile")
    def get_profile():
        if state.profile is None:
            return _error(404, "no-profile", "no profile loaded; start with --profile")
        return json.loads(serialize_profile(state.profile))

    @app.get("/api/hotspots")
    def get_hotspots():
        if state.profile is None:
            return _error(404, "no-profile", "no profile loaded")
        return {"hotspots": [region_to_json(r) for r in state.hotspots()]}

    @app.get("/api/source")
    def get_source(path: str):
        if state.profile is None:
            return _error(404, "no-profile", "no profile loaded")
        text, err = state.checked_source(path)
        if err == "unknown-path":
            return _error(404, err, f"{path!r} is not in the loaded profile")
        if err == "unreadable":
            return _error(404, err, f"cannot read {path!r} under {config.source_root!r}")
        if err == "source-mismatch":
            return _error(409, err, f"{path!r} changed since it was profiled")
        fp = state.profile.files[path]
        return {"path": path, "digest": fp.source_digest, "text": text}

    @app.get("/api/models")
    def get_models():
        out = []
        for name, ep in config.endpoints.items():
            status = health_check(ep)
            out.append(
                {
                    "name": name,
                    "model": ep.model,
                    "protocol": ep.protocol,
                    "reachable": status.reachable,
                    "model_present": status.model_present,
                }
            )
        return {"endpoints": out}

    @app.post("/api/optimize")
    async def optimize(request: Request):
        body = await request.json()
        if state.profile is None:
            return _error(404, "no-profile", "no profile loaded")
        for key in ("path", "start_line", "end_line", "model"):
            if key not in body:
                return _error(400, "bad-request", f"missing field {key!r}")
        ep = state.resolve_endpoint(body["model"])
        if ep is None:
            return _error(404, "unknown-model", f"no endpoint serves {body['model']!r}")
        path = body["path"]
        fp = state.profile.files.get(path)
        if fp is None:
            return _error(404, "unknown-path", f"{path!r} is not in the loaded profile")
        text, err = state.checked_source(path)
        if err is not None:
            return _error(409, err, f"source for {path!r} unavailable or stale")

        # Reuse the detected region when the request matches one, so the
        # reason/score are real; otherwise treat the range as an ad-hoc
        # CPU region.
        region = next(
            (
                r
                for r in state.hotspots()
                if r.path == path
                and r.start_line == body["start_line"]
                and r.end_line == body["end_line"]
            ),
            None,
        )
        if region is None:
            try:
                region = expand_region(
                    HotspotRegion(
                        path=path,
                        start_line=int(body["start_line"]),
                        end_line=int(body["end_line"]),
                        reason="cpu",
                        score=1.0,
                        context_start=int(body["start_line"]),
                        context_end=int(body["end_line"]),
                    ),
                    fp,
                    config.thresholds,
                )
            except ValueError as exc:
                return _error(400, "bad-region", str(exc))

        source_lines = text.splitlines()
        try:
            prompt = build_prompt(
                region,
                source_lines,
                fp.lines,
                template=template_for_reason(region.reason),
                registry=state.templates,
            )
        except (MissingSource, PerfAdvisorError) as exc:
            return _error(400, "bad-region", str(exc))
        original_text = "\n".join(
            source_lines[region.context_start - 1 : region.context_end]
        )

        frames: queue.Queue = queue.Queue()

        def worker():
            try:
                outcome = chat_stream(ep, prompt, on_chunk=lambda c: frames.put(("chunk", c)))
                suggestion = build_suggestion(region, ep.model, outcome.full_text, original_text)
                with state.store_lock:
                    state.suggestions[suggestion.dedupe_key] = suggestion
                frames.put(("done", suggestion))
            except GatewayError as exc:
                frames.put(("error", exc))

        threading.Thread(target=worker, daemon=True).start()

        def stream():
            while True:
                kind, value = frames.get()
                if kind == "chunk":
                    yield _sse({"type": "chunk", "text": value})
                elif kind == "done":
                    yield _sse({"type": "done", "suggestion": suggestion_to_json(value)})
                    return
                else:
                    yield _sse(
                        {
                            "type": "error",
                            "code": type(value).__name__,
                            "message": str(value),
                        }
                    )
                    return

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/api/validate")
    async def validate(request: Request):
        body = await request.json()
        suggestion_id = body.get("suggestion_id")
        candidate_index = int(body.get("candidate_index", 0))
        with state.store_lock:
            suggestion = state.suggestions.get(suggestion_id)
        if suggestion is None:
            return _error(404, "unknown-suggestion", f"no suggestion {suggestion_id!r}")
        if not (0 <= candidate_index < len(suggestion.candidates)):
            return _error(404, "unknown-candidate", f"no candidate {candidate_index}")
        cand = suggestion.candidates[candidate_index]
        with state.validate_lock:  # benchmarks must never overlap
            result = bench_pair(cand.original_text, cand.replacement_text, config.run_spec)
        return result.to_json()

    assets = config.ui_assets_dir
    if assets and Path(assets).is_dir():
        app.mount("/", StaticFiles(directory=assets, html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return _PLACEHOLDER_PAGE

    return app
