import json
import sys

import pytest
from fastapi.testclient import TestClient

from perfadvisor.bench import RunSpec
from perfadvisor.config import Config
from perfadvisor.profile import (
    FileProfile,
    LineMetrics,
    ProfileDocument,
    source_digest,
)
from perfadvisor.service import create_app
from perfadvisor.stubserver import StubModelServer, StubScript

from conftest import endpoint_for

SOURCE = """\
total = 0
for i in range(100000):
    total += i * i
print(total)
"""

CANNED = "total = sum(i * i for i in range(100000))\nprint(total)\n"


def make_profile(path: str) -> ProfileDocument:
    return ProfileDocument(
        program="python3 demo.py",
        elapsed_s=3.0,
        max_footprint_mb=20.0,
        files={
            path: FileProfile(
                path=path,
                source_digest=source_digest(SOURCE.encode()),
                line_count=4,
                lines=(LineMetrics(line_no=3, cpu_python_pct=30.0),),
            )
        },
        producer="testgen",
    )


@pytest.fixture
def app_client(tmp_path):
    (tmp_path / "demo.py").write_text(SOURCE, encoding="utf-8")
    script = StubScript(chunks=["try the builtin\n", f"```python\n{CANNED}```\n"])
    with StubModelServer({"llama3.2": script}) as server:
        config = Config(
            endpoints={"stub": endpoint_for(server, "llama3.2")},
            run_spec=RunSpec(
                interpreter_cmd=(sys.executable,), repetitions=3, workdir=str(tmp_path)
            ),
            source_root=str(tmp_path),
        )
        app = create_app(config, profile_doc=make_profile("demo.py"))
        with TestClient(app) as client:
            yield client


def sse_frames(resp) -> list:
    frames = []
    for line in resp.iter_lines():
        if line.startswith("data: "):
            frames.append(json.loads(line[len("data: "):]))
    return frames


class TestBasics:
    def test_healthz(self, app_client):
        resp = app_client.get("/healthz")
        assert resp.status_code == 200
        assert resp.text == "ok"

    def test_profile_document(self, app_client):
        data = app_client.get("/api/profile").json()
        assert data["format_version"] == 1
        assert "demo.py" in data["files"]

    def test_no_profile_404(self, tmp_path):
        app = create_app(Config(source_root=str(tmp_path)))
        client = TestClient(app)
        resp = client.get("/api/profile")
        assert resp.status_code == 404
        assert resp.json()["code"] == "no-profile"

    def test_hotspots(self, app_client):
        data = app_client.get("/api/hotspots").json()
        assert len(data["hotspots"]) == 1
        region = data["hotspots"][0]
        assert region["start_line"] == 3
        assert region["reason"] == "cpu"
        assert region["context_start"] == 1
        assert region["context_end"] == 4

    def test_source_with_digest(self, app_client):
        data = app_client.get("/api/source", params={"path": "demo.py"}).json()
        assert data["text"] == SOURCE
        assert data["digest"] == source_digest(SOURCE.encode())

    def test_source_unknown_path(self, app_client):
        resp = app_client.get("/api/source", params={"path": "other.py"})
        assert resp.status_code == 404
        assert resp.json()["code"] == "unknown-path"

    def test_source_mismatch(self, tmp_path):
        (tmp_path / "demo.py").write_text(SOURCE + "# edited\n", encoding="utf-8")
        app = create_app(
            Config(source_root=str(tmp_path)), profile_doc=make_profile("demo.py")
        )
        client = TestClient(app)
        resp = client.get("/api/source", params={"path": "demo.py"})
        assert resp.status_code == 409
        assert resp.json()["code"] == "source-mismatch"

    def test_models_health(self, app_client):
        data = app_client.get("/api/models").json()
        (ep,) = data["endpoints"]
        assert ep["name"] == "stub"
        assert ep["model"] == "llama3.2"
        assert ep["reachable"] is True
        assert ep["model_present"] is True

    def test_placeholder_index(self, app_client):
        resp = app_client.get("/")
        assert resp.status_code == 200
        assert "perfadvisor" in resp.text

    def test_static_assets_served(self, tmp_path):
        assets = tmp_path / "dist"
        assets.mkdir()
        (assets / "index.html").write_text("<html><body>UI</body></html>")
        app = create_app(Config(source_root=str(tmp_path), ui_assets_dir=str(assets)))
        client = TestClient(app)
        assert "UI" in client.get("/").text


class TestOptimizeAndValidate:
    def optimize(self, client, body=None):
        payload = {"path": "demo.py", "start_line": 3, "end_line": 3, "model": "llama3.2"}
        payload.update(body or {})
        with client.stream("POST", "/api/optimize", json=payload) as resp:
            assert resp.status_code == 200
            return sse_frames(resp)

    def test_stream_then_final_suggestion(self, app_client):
        frames = self.optimize(app_client)
        chunks = [f["text"] for f in frames if f["type"] == "chunk"]
        assert chunks == ["try the builtin\n", f"```python\n{CANNED}```\n"]
        final = frames[-1]
        assert final["type"] == "done"
        suggestion = final["suggestion"]
        assert suggestion["model"] == "llama3.2"
        assert suggestion["candidates"][0]["replacement_text"] == CANNED
        # final text equals fragment concatenation
        assert suggestion["raw_text"] == "".join(chunks)

    def test_unknown_model_404(self, app_client):
        resp = app_client.post(
            "/api/optimize",
            json={"path": "demo.py", "start_line": 3, "end_line": 3, "model": "nope"},
        )
        assert resp.status_code == 404
        assert resp.json()["code"] == "unknown-model"

    def test_missing_field_400(self, app_client):
        resp = app_client.post("/api/optimize", json={"path": "demo.py"})
        assert resp.status_code == 400

    def test_error_frame_in_band(self, tmp_path):
        import socket

        s = socket.socket()
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
        s.close()
        (tmp_path / "demo.py").write_text(SOURCE, encoding="utf-8")
        from perfadvisor.gateway import ModelEndpoint

        config = Config(
            endpoints={
                "dead": ModelEndpoint(
                    base_url=f"http://127.0.0.1:{port}",
                    model="dead",
                    connect_timeout_s=0.5,
                    max_retries=0,
                )
            },
            source_root=str(tmp_path),
        )
        app = create_app(config, profile_doc=make_profile("demo.py"))
        client = TestClient(app)
        with client.stream(
            "POST",
            "/api/optimize",
            json={"path": "demo.py", "start_line": 3, "end_line": 3, "model": "dead"},
        ) as resp:
            frames = sse_frames(resp)
        assert frames[-1]["type"] == "error"
        assert "EndpointUnavailable" in frames[-1]["code"]

    def test_validate_round_trip(self, app_client):
        frames = self.optimize(app_client)
        suggestion_id = frames[-1]["suggestion"]["id"]
        resp = app_client.post(
            "/api/validate", json={"suggestion_id": suggestion_id, "candidate_index": 0}
        )
        assert resp.status_code == 200
        result = resp.json()
        assert result["correct"] is True
        assert result["speedup"] is not None and result["speedup"] > 0

    def test_validate_unknown_id_404(self, app_client):
        resp = app_client.post(
            "/api/validate", json={"suggestion_id": "nope", "candidate_index": 0}
        )
        assert resp.status_code == 404

    def test_validate_bad_candidate_index(self, app_client):
        frames = self.optimize(app_client)
        suggestion_id = frames[-1]["suggestion"]["id"]
        resp = app_client.post(
            "/api/validate", json={"suggestion_id": suggestion_id, "candidate_index": 9}
        )
        assert resp.status_code == 404

    def test_idempotent_suggestion_id(self, app_client):
        first = self.optimize(app_client)[-1]["suggestion"]["id"]
        second = self.optimize(app_client)[-1]["suggestion"]["id"]
        assert first == second
