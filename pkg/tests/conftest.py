import sys

import pytest

from perfadvisor.bench import RunSpec
from perfadvisor.gateway import ModelEndpoint
from perfadvisor.profile import FileProfile, FunctionSpan, LineMetrics, ProfileDocument
from perfadvisor.stubserver import StubModelServer, StubScript


@pytest.fixture
def run_spec(tmp_path):
    """Fast RunSpec pinned to this interpreter (python3 may be a different env)."""
    return RunSpec(
        interpreter_cmd=(sys.executable,),
        timeout_s=20.0,
        repetitions=3,
        workdir=str(tmp_path),
    )


def make_doc(files=None, elapsed_s=10.0, **kwargs) -> ProfileDocument:
    return ProfileDocument(
        program="python3 app.py",
        elapsed_s=elapsed_s,
        max_footprint_mb=kwargs.pop("max_footprint_mb", 256.0),
        files=files or {},
        producer="testgen",
        **kwargs,
    )


def make_file(path="src/app.py", line_count=50, lines=(), functions=()) -> FileProfile:
    return FileProfile(
        path=path,
        source_digest="",
        line_count=line_count,
        lines=tuple(lines),
        functions=tuple(functions),
    )


def cpu_line(line_no: int, pct: float, **kwargs) -> LineMetrics:
    return LineMetrics(line_no=line_no, cpu_python_pct=pct, **kwargs)


def endpoint_for(server: StubModelServer, model: str, **kwargs) -> ModelEndpoint:
    kwargs.setdefault("connect_timeout_s", 5.0)
    kwargs.setdefault("response_timeout_s", 10.0)
    return ModelEndpoint(base_url=server.base_url, model=model, **kwargs)


@pytest.fixture
def stub_server():
    """A stub server with one canned two-chunk response; yields (server, endpoint)."""
    script = StubScript(chunks=["Hel", "lo"])
    with StubModelServer({"llama3.2": script}) as server:
        yield server, endpoint_for(server, "llama3.2")


__all__ = [
    "make_doc",
    "make_file",
    "cpu_line",
    "endpoint_for",
    "FunctionSpan",
    "StubModelServer",
    "StubScript",
]
