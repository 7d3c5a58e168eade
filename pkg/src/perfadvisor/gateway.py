"""Client for locally served chat models (Ollama and OpenAI-style endpoints).

Two wire protocols hide behind one interface:

* ``ollama-chat``: POST ``{base_url}/api/chat`` with ``"stream": true``;
  the reply is newline-delimited JSON frames, each carrying a
  ``message.content`` fragment, terminated by a frame with ``done: true``.
  Model discovery is GET ``{base_url}/api/tags``.
* ``openai-chat``: POST ``{base_url}/v1/chat/completions`` with
  server-sent-event framing and the ``[DONE]`` sentinel; discovery is
  GET ``{base_url}/v1/models``.

Streaming is the primary mode: local models are slow enough that callers
want fragments as they arrive. Connection failures are retried with a
fixed 500 ms x attempt-number backoff; once a stream has started, errors
are never retried, so fragments are delivered exactly once.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

import httpx

from .errors import ChatTimeout, EndpointUnavailable, ModelNotFound, ProtocolError
from .prompts import PromptSpec

logger = logging.getLogger(__name__)

PROTOCOL_OLLAMA = "ollama-chat"
PROTOCOL_OPENAI = "openai-chat"

BACKOFF_BASE_S = 0.5

# Concurrent chat_stream calls are bounded process-wide; local servers
# degrade badly when oversubscribed.
_parallel = threading.BoundedSemaphore(2)


def set_parallelism(limit: int) -> None:
    """Replace the process-wide concurrent-chat bound (default 2)."""
    global _parallel
    if limit < 1:
        raise ValueError("parallelism limit must be >= 1")
    _parallel = threading.BoundedSemaphore(limit)


@dataclass(frozen=True)
class ModelEndpoint:
    """One reachable model behind one serving protocol."""

    base_url: str
    model: str
    protocol: str = PROTOCOL_OLLAMA
    connect_timeout_s: float = 5.0
    response_timeout_s: float = 300.0
    max_retries: int = 2
    bearer_token: Optional[str] = None

    def __post_init__(self):
        if not self.model:
            raise ValueError("model must be nonempty")
        if self.protocol not in (PROTOCOL_OLLAMA, PROTOCOL_OPENAI):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.connect_timeout_s <= 0 or self.response_timeout_s <= 0:
            raise ValueError("timeouts must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def _headers(self) -> dict:
        if self.bearer_token:
            return {"Authorization": f"Bearer {self.bearer_token}"}
        return {}


@dataclass(frozen=True)
class ChatOutcome:
    """Result of one completed streaming chat."""

    full_text: str
    chunk_count: int
    latency_s: float
    finished: bool


@dataclass(frozen=True)
class HealthStatus:
    reachable: bool
    model_present: bool
    round_trip_ms: float


def _chat_request(ep: ModelEndpoint, prompt: PromptSpec) -> tuple[str, dict]:
    messages = []
    if prompt.system_text:
        messages.append({"role": "system", "content": prompt.system_text})
    messages.append({"role": "user", "content": prompt.user_text})
    if ep.protocol == PROTOCOL_OLLAMA:
        options: dict = {
            "temperature": prompt.params.temperature,
            "num_predict": prompt.params.max_tokens,
        }
        if prompt.params.seed is not None:
            options["seed"] = prompt.params.seed
        return f"{ep.base_url}/api/chat", {
            "model": ep.model,
            "messages": messages,
            "stream": True,
            "options": options,
        }
    body: dict = {
        "model": ep.model,
        "messages": messages,
        "stream": True,
        "temperature": prompt.params.temperature,
        "max_tokens": prompt.params.max_tokens,
    }
    if prompt.params.seed is not None:
        body["seed"] = prompt.params.seed
    return f"{ep.base_url}/v1/chat/completions", body


def _ollama_fragment(line: str) -> tuple[Optional[str], bool]:
    """Decode one NDJSON frame into (fragment, done)."""
    try:
        frame = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError("malformed stream frame", payload=line) from exc
    if not isinstance(frame, dict):
        raise ProtocolError("frame is not an object", payload=line)
    if "error" in frame:
        raise ProtocolError("server error frame", payload=str(frame["error"]))
    message = frame.get("message") or {}
    fragment = message.get("content") if isinstance(message, dict) else None
    return fragment, bool(frame.get("done"))


def _openai_fragment(line: str) -> tuple[Optional[str], bool]:
    """Decode one SSE data line into (fragment, done)."""
    if not line.startswith("data:"):
        # Comment/heartbeat lines are permitted by SSE; ignore them.
        return None, False
    payload = line[len("data:"):].strip()
    if payload == "[DONE]":
        return None, True
    try:
        frame = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise ProtocolError("malformed stream frame", payload=line) from exc
    try:
        delta = frame["choices"][0].get("delta", {})
    except (KeyError, IndexError, TypeError, AttributeError) as exc:
        raise ProtocolError("frame missing choices[0]", payload=line) from exc
    return delta.get("content"), False


def chat_stream(
    ep: ModelEndpoint,
    prompt: PromptSpec,
    on_chunk: Optional[Callable[[str], None]] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> ChatOutcome:
    """Stream one chat completion, invoking ``on_chunk`` per text fragment.

    Returns only when the server signals completion; every other outcome
    raises (``EndpointUnavailable`` after exhausted retries,
    ``ChatTimeout`` with the partial text once ``response_timeout_s`` is
    exceeded, ``ProtocolError`` for malformed frames, ``ModelNotFound``
    when the server rejects the model name).
    """
    start = time.monotonic()
    attempts = ep.max_retries + 1
    last_exc: Optional[Exception] = None
    for attempt in range(1, attempts + 1):
        try:
            with _parallel:
                return _chat_once(ep, prompt, on_chunk, start)
        except httpx.ConnectError as exc:
            last_exc = exc
            logger.debug("connect to %s failed (attempt %d/%d)", ep.base_url, attempt, attempts)
            if attempt < attempts:
                sleep(BACKOFF_BASE_S * attempt)
        except httpx.ConnectTimeout as exc:
            last_exc = exc
            if attempt < attempts:
                sleep(BACKOFF_BASE_S * attempt)
    raise EndpointUnavailable(
        f"{ep.base_url} unreachable after {attempts} attempts: {last_exc}"
    )


def _chat_once(
    ep: ModelEndpoint,
    prompt: PromptSpec,
    on_chunk: Optional[Callable[[str], None]],
    start: float,
) -> ChatOutcome:
    url, body = _chat_request(ep, prompt)
    decode = _ollama_fragment if ep.protocol == PROTOCOL_OLLAMA else _openai_fragment
    deadline = start + ep.response_timeout_s
    parts: list[str] = []
    chunk_count = 0
    timeout = httpx.Timeout(
        connect=ep.connect_timeout_s,
        read=ep.response_timeout_s,
        write=ep.connect_timeout_s,
        pool=ep.connect_timeout_s,
    )
    try:
        with httpx.Client(timeout=timeout, headers=ep._headers()) as client:
            with client.stream("POST", url, json=body) as resp:
                if resp.status_code == 404:
                    resp.read()
                    raise ModelNotFound(f"{ep.model!r} not found at {ep.base_url}")
                if resp.status_code != 200:
                    resp.read()
                    raise ProtocolError(
                        f"unexpected status {resp.status_code}", payload=resp.text[:200]
                    )
                finished = False
                for line in resp.iter_lines():
                    if time.monotonic() > deadline:
                        raise ChatTimeout(
                            f"no completion within {ep.response_timeout_s}s",
                            partial_text="".join(parts),
                            chunk_count=chunk_count,
                        )
                    if not line.strip():
                        continue
                    fragment, done = decode(line)
                    if fragment:
                        parts.append(fragment)
                        chunk_count += 1
                        if on_chunk is not None:
                            on_chunk(fragment)
                    if done:
                        finished = True
                        break
                if not finished:
                    raise ProtocolError("stream ended without a completion frame")
    except (httpx.ReadTimeout, httpx.WriteTimeout) as exc:
        raise ChatTimeout(
            f"no data within {ep.response_timeout_s}s",
            partial_text="".join(parts),
            chunk_count=chunk_count,
        ) from exc
    except httpx.RemoteProtocolError as exc:
        raise ProtocolError(f"connection broke mid-stream: {exc}") from exc
    return ChatOutcome(
        full_text="".join(parts),
        chunk_count=chunk_count,
        latency_s=time.monotonic() - start,
        finished=True,
    )


def list_models(ep: ModelEndpoint, sleep: Callable[[float], None] = time.sleep) -> list[str]:
    """Names the server advertises, in server order."""
    if ep.protocol == PROTOCOL_OLLAMA:
        url, key, name_field = f"{ep.base_url}/api/tags", "models", "name"
    else:
        url, key, name_field = f"{ep.base_url}/v1/models", "data", "id"
    attempts = ep.max_retries + 1
    last_exc: Optional[Exception] = None
    for attempt in range(1, attempts + 1):
        try:
            with httpx.Client(
                timeout=httpx.Timeout(ep.connect_timeout_s), headers=ep._headers()
            ) as client:
                resp = client.get(url)
            if resp.status_code != 200:
                raise ProtocolError(f"unexpected status {resp.status_code}", payload=resp.text[:200])
            try:
                entries = resp.json()[key]
                names = [entry[name_field] for entry in entries]
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise ProtocolError("unexpected catalog shape", payload=resp.text[:200]) from exc
            if not all(isinstance(n, str) for n in names):
                raise ProtocolError("catalog names are not strings", payload=resp.text[:200])
            return names
        except (httpx.ConnectError, httpx.ConnectTimeout, httpx.ReadTimeout) as exc:
            last_exc = exc
            if attempt < attempts:
                sleep(BACKOFF_BASE_S * attempt)
    raise EndpointUnavailable(f"{ep.base_url} unreachable after {attempts} attempts: {last_exc}")


def health_check(ep: ModelEndpoint) -> HealthStatus:
    """Probe the endpoint; folds every failure into the result, never raises."""
    start = time.monotonic()
    try:
        names = list_models(ep, sleep=lambda _s: None)
    except EndpointUnavailable:
        return HealthStatus(reachable=False, model_present=False, round_trip_ms=0.0)
    except ProtocolError:
        return HealthStatus(
            reachable=True, model_present=False,
            round_trip_ms=(time.monotonic() - start) * 1000.0,
        )
    return HealthStatus(
        reachable=True,
        model_present=ep.model in names,
        round_trip_ms=(time.monotonic() - start) * 1000.0,
    )
