import socket

import pytest

from perfadvisor.errors import (
    ChatTimeout,
    EndpointUnavailable,
    ModelNotFound,
    ProtocolError,
)
from perfadvisor.gateway import (
    ModelEndpoint,
    chat_stream,
    health_check,
    list_models,
    set_parallelism,
)
from perfadvisor.prompts import PromptParams, PromptSpec
from perfadvisor.stubserver import StubModelServer, StubScript

from conftest import endpoint_for

PROMPT = PromptSpec(system_text="sys", user_text="optimize this please")


def closed_port() -> int:
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


class TestChatStream:
    def test_two_chunk_stream(self, stub_server):
        _server, ep = stub_server
        seen = []
        outcome = chat_stream(ep, PROMPT, on_chunk=seen.append)
        assert outcome.full_text == "Hello"
        assert outcome.chunk_count == 2
        assert outcome.finished is True
        assert seen == ["Hel", "lo"]
        assert outcome.latency_s > 0

    def test_request_body_carries_prompt_and_params(self, stub_server):
        server, ep = stub_server
        chat_stream(ep, PROMPT)
        body = server.requests[-1]
        assert body["model"] == "llama3.2"
        assert body["stream"] is True
        assert body["messages"][0] == {"role": "system", "content": "sys"}
        assert body["messages"][1]["content"] == "optimize this please"
        assert body["options"]["temperature"] == 0.2
        assert body["options"]["num_predict"] == 2048
        assert body["options"]["seed"] == 0

    def test_seed_omitted_when_none(self, stub_server):
        server, ep = stub_server
        prompt = PromptSpec("s", "u", PromptParams(seed=None))
        chat_stream(ep, prompt)
        assert "seed" not in server.requests[-1]["options"]

    def test_unreachable_after_retries(self):
        ep = ModelEndpoint(
            base_url=f"http://127.0.0.1:{closed_port()}",
            model="llama3.2",
            max_retries=2,
            connect_timeout_s=1.0,
        )
        sleeps = []
        with pytest.raises(EndpointUnavailable) as exc:
            chat_stream(ep, PROMPT, sleep=sleeps.append)
        assert "3 attempts" in str(exc.value)
        assert sleeps == [0.5, 1.0]  # fixed 500 ms x attempt number

    def test_no_retry_when_max_retries_zero(self):
        ep = ModelEndpoint(
            base_url=f"http://127.0.0.1:{closed_port()}",
            model="m",
            max_retries=0,
            connect_timeout_s=1.0,
        )
        sleeps = []
        with pytest.raises(EndpointUnavailable):
            chat_stream(ep, PROMPT, sleep=sleeps.append)
        assert sleeps == []

    def test_stall_times_out_with_partial_text(self):
        script = StubScript(chunks=["par", "tial", "never"], stall_after=2, stall_s=15.0)
        with StubModelServer({"m": script}) as server:
            ep = endpoint_for(server, "m", response_timeout_s=0.6)
            with pytest.raises(ChatTimeout) as exc:
                chat_stream(ep, PROMPT)
        assert exc.value.partial_text == "partial"
        assert exc.value.chunk_count == 2

    def test_malformed_frame_is_protocol_error(self):
        script = StubScript(chunks=["ok", "bad"], malformed_at=1)
        with StubModelServer({"m": script}) as server:
            ep = endpoint_for(server, "m")
            with pytest.raises(ProtocolError) as exc:
                chat_stream(ep, PROMPT)
        assert "not a frame" in exc.value.payload

    def test_model_not_found(self, stub_server):
        server, _ep = stub_server
        ep = endpoint_for(server, "missing-model")
        with pytest.raises(ModelNotFound):
            chat_stream(ep, PROMPT)

    def test_dropped_stream_is_protocol_error(self):
        script = StubScript(chunks=["a", "b"], drop_after=2)
        with StubModelServer({"m": script}) as server:
            ep = endpoint_for(server, "m")
            with pytest.raises(ProtocolError):
                chat_stream(ep, PROMPT)

    def test_openai_protocol(self):
        script = StubScript(chunks=["Hel", "lo", "!"])
        with StubModelServer({"gpt-ish": script}) as server:
            ep = endpoint_for(server, "gpt-ish", protocol="openai-chat")
            seen = []
            outcome = chat_stream(ep, PROMPT, on_chunk=seen.append)
            body = server.requests[-1]
        assert outcome.full_text == "Hello!"
        assert outcome.chunk_count == 3
        assert seen == ["Hel", "lo", "!"]
        assert body["max_tokens"] == 2048
        assert body["seed"] == 0

    def test_unicode_chunks(self):
        script = StubScript(chunks=["privet ", "мир ", "✓"])
        with StubModelServer({"m": script}) as server:
            outcome = chat_stream(endpoint_for(server, "m"), PROMPT)
        assert outcome.full_text == "privet мир ✓"

    def test_sequential_scripts_consumed_in_order(self):
        scripts = [StubScript(chunks=["first"]), StubScript(chunks=["second"])]
        with StubModelServer({"m": scripts}) as server:
            ep = endpoint_for(server, "m")
            assert chat_stream(ep, PROMPT).full_text == "first"
            assert chat_stream(ep, PROMPT).full_text == "second"
            assert chat_stream(ep, PROMPT).full_text == "second"  # last repeats


class TestListModels:
    def test_names_in_order(self):
        with StubModelServer({}, advertised=["llama3.2", "deepseek-r1"]) as server:
            ep = endpoint_for(server, "llama3.2")
            assert list_models(ep) == ["llama3.2", "deepseek-r1"]

    def test_empty_catalog(self):
        with StubModelServer({}, advertised=[]) as server:
            assert list_models(endpoint_for(server, "m")) == []

    def test_wrong_shape_is_protocol_error(self):
        with StubModelServer({}, catalog_override={"nope": 1}) as server:
            with pytest.raises(ProtocolError):
                list_models(endpoint_for(server, "m"))

    def test_openai_catalog(self):
        with StubModelServer({}, advertised=["a", "b"]) as server:
            ep = endpoint_for(server, "a", protocol="openai-chat")
            assert list_models(ep) == ["a", "b"]

    def test_unreachable(self):
        ep = ModelEndpoint(
            base_url=f"http://127.0.0.1:{closed_port()}", model="m", connect_timeout_s=0.5
        )
        with pytest.raises(EndpointUnavailable):
            list_models(ep, sleep=lambda _: None)


class TestHealthCheck:
    def test_live_with_model(self, stub_server):
        _server, ep = stub_server
        status = health_check(ep)
        assert status.reachable is True
        assert status.model_present is True
        assert status.round_trip_ms > 0

    def test_dead_port(self):
        ep = ModelEndpoint(
            base_url=f"http://127.0.0.1:{closed_port()}",
            model="m",
            connect_timeout_s=0.5,
            max_retries=0,
        )
        status = health_check(ep)
        assert status == type(status)(reachable=False, model_present=False, round_trip_ms=0.0)

    def test_live_without_model(self, stub_server):
        server, _ep = stub_server
        status = health_check(endpoint_for(server, "absent"))
        assert status.reachable is True
        assert status.model_present is False
        assert status.round_trip_ms > 0


class TestEndpointValidation:
    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            ModelEndpoint(base_url="http://x", model="")
        with pytest.raises(ValueError):
            ModelEndpoint(base_url="http://x", model="m", protocol="grpc")
        with pytest.raises(ValueError):
            ModelEndpoint(base_url="http://x", model="m", connect_timeout_s=0)

    def test_parallelism_guard(self):
        with pytest.raises(ValueError):
            set_parallelism(0)
        set_parallelism(2)
