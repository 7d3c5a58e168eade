"""Deterministic stand-in for a live model server.

Replays scripted transcripts over the same wire formats the gateway
speaks (Ollama NDJSON chat frames and OpenAI-style SSE), so the whole
pipeline can run in CI without model weights. Scripts can also misbehave
on purpose: stall mid-stream, emit a malformed frame, or drop the
connection, which is how the gateway's failure paths are exercised.

Run standalone for manual poking:

    python -m perfadvisor.stubserver --port 11434
"""

from __future__ import annotations

import json
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional


@dataclass
class StubScript:
    """One scripted model response."""

    chunks: list[str]
    chunk_delay_s: float = 0.0
    # Send this many chunks, then go silent without a completion frame.
    stall_after: Optional[int] = None
    stall_s: float = 30.0
    # Replace the frame at this chunk index with bytes that are not JSON.
    malformed_at: Optional[int] = None
    # Close the connection after this many chunks, no completion frame.
    drop_after: Optional[int] = None

    def full_text(self) -> str:
        n = len(self.chunks)
        for cut in (self.stall_after, self.malformed_at, self.drop_after):
            if cut is not None:
                n = min(n, cut)
        return "".join(self.chunks[:n])


@dataclass
class _ModelState:
    queue: deque = field(default_factory=deque)
    last: Optional[StubScript] = None

    def next_script(self) -> StubScript:
        if self.queue:
            self.last = self.queue.popleft()
        assert self.last is not None
        return self.last


class StubModelServer:
    """Threaded HTTP server replaying :class:`StubScript` transcripts.

    ``models`` maps a model name to one script (replayed for every call)
    or a list of scripts (consumed in order; the final one repeats).
    Every received chat body is appended to ``requests`` for assertions.
    """

    def __init__(
        self,
        models: dict,
        advertised: Optional[list[str]] = None,
        port: int = 0,
        catalog_override: Optional[dict] = None,
    ):
        # catalog_override replaces the /api/tags and /v1/models bodies
        # verbatim; used to exercise protocol-error handling.
        self.catalog_override = catalog_override
        self._states: dict[str, _ModelState] = {}
        for name, script in models.items():
            state = _ModelState()
            if isinstance(script, StubScript):
                state.last = script
            else:
                state.queue.extend(script)
            self._states[name] = state
        self.advertised = list(advertised) if advertised is not None else list(models)
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        self._server = ThreadingHTTPServer(("127.0.0.1", port), self._make_handler())
        self._server.daemon_threads = True
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.02), daemon=True
        )

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubModelServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "StubModelServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _record(self, body: dict) -> None:
        with self._lock:
            self.requests.append(body)

    def _script_for(self, model: str) -> Optional[StubScript]:
        state = self._states.get(model)
        if state is None:
            return None
        with self._lock:
            return state.next_script()

    def _make_handler(self):
        stub = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):  # keep test output clean
                pass

            def _json(self, status: int, payload: dict) -> None:
                body = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def _read_body(self) -> dict:
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length) if length else b"{}"
                try:
                    return json.loads(raw)
                except json.JSONDecodeError:
                    return {}

            def do_GET(self):
                if stub.catalog_override is not None and self.path in ("/api/tags", "/v1/models"):
                    self._json(200, stub.catalog_override)
                elif self.path == "/api/tags":
                    self._json(
                        200,
                        {"models": [{"name": n, "model": n} for n in stub.advertised]},
                    )
                elif self.path == "/v1/models":
                    self._json(
                        200,
                        {"object": "list", "data": [{"id": n, "object": "model"} for n in stub.advertised]},
                    )
                else:
                    self._json(404, {"error": "not found"})

            def do_POST(self):
                body = self._read_body()
                stub._record(body)
                if self.path == "/api/chat":
                    self._stream(body, openai=False)
                elif self.path == "/v1/chat/completions":
                    self._stream(body, openai=True)
                else:
                    self._json(404, {"error": "not found"})

            def _stream(self, body: dict, openai: bool) -> None:
                model = body.get("model", "")
                script = stub._script_for(model)
                if script is None:
                    self._json(404, {"error": f"model {model!r} not found"})
                    return
                # Streamed bodies are EOF-delimited; the connection must
                # close when the script ends (deliberately or not).
                self.close_connection = True
                self.send_response(200)
                self.send_header(
                    "Content-Type",
                    "text/event-stream" if openai else "application/x-ndjson",
                )
                self.end_headers()
                try:
                    self._play(script, model, openai)
                except (BrokenPipeError, ConnectionResetError):
                    pass  # client gave up first (timeout tests)

            def _play(self, script: StubScript, model: str, openai: bool) -> None:
                for i, chunk in enumerate(script.chunks):
                    if script.stall_after is not None and i >= script.stall_after:
                        time.sleep(script.stall_s)
                        return
                    if script.drop_after is not None and i >= script.drop_after:
                        return
                    if script.malformed_at is not None and i == script.malformed_at:
                        self.wfile.write(b"%% this is not a frame %%\n")
                        self.wfile.flush()
                        continue
                    self.wfile.write(self._frame(chunk, model, openai))
                    self.wfile.flush()
                    if script.chunk_delay_s:
                        time.sleep(script.chunk_delay_s)
                if script.stall_after is not None and script.stall_after >= len(script.chunks):
                    time.sleep(script.stall_s)
                    return
                if script.drop_after is not None and script.drop_after >= len(script.chunks):
                    return
                self.wfile.write(self._final(model, openai))
                self.wfile.flush()

            def _frame(self, chunk: str, model: str, openai: bool) -> bytes:
                if openai:
                    frame = {
                        "id": "stub",
                        "object": "chat.completion.chunk",
                        "model": model,
                        "choices": [{"index": 0, "delta": {"content": chunk}}],
                    }
                    return f"data: {json.dumps(frame)}\n\n".encode("utf-8")
                frame = {
                    "model": model,
                    "message": {"role": "assistant", "content": chunk},
                    "done": False,
                }
                return (json.dumps(frame) + "\n").encode("utf-8")

            def _final(self, model: str, openai: bool) -> bytes:
                if openai:
                    return b"data: [DONE]\n\n"
                frame = {
                    "model": model,
                    "message": {"role": "assistant", "content": ""},
                    "done": True,
                    "done_reason": "stop",
                }
                return (json.dumps(frame) + "\n").encode("utf-8")

        return Handler


def main(argv: Optional[list[str]] = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="Run a scripted stub model server.")
    parser.add_argument("--port", type=int, default=11434)
    parser.add_argument(
        "--model", action="append", default=None,
        help="model name to advertise (repeatable); default: llama3.2, deepseek-r1",
    )
    args = parser.parse_args(argv)
    names = args.model or ["llama3.2", "deepseek-r1"]
    canned = StubScript(
        chunks=[
            "The loop rebuilds the list on every pass; hoist it.\n",
            "```python\n",
            "result = [x * x for x in values]\n",
            "print(sum(result))\n",
            "```\n",
        ]
    )
    server = StubModelServer({n: canned for n in names}, port=args.port)
    print(f"stub model server on {server.base_url} (models: {', '.join(names)})")
    try:
        server._server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
