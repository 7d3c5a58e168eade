"""Walkthrough: the full suggest pipeline against the bundled stub server.

The stub replays a scripted "model" over the real Ollama wire protocol,
so this demonstrates exactly what happens with a live endpoint — prompt
rendering, streaming, reasoning-trace stripping, code extraction, and
patch generation — without any model weights.

Swap the stub endpoint for `ModelEndpoint("http://127.0.0.1:11434",
"deepseek-r1")` to run against a local Ollama install.
"""

import tempfile
from pathlib import Path

from perfadvisor import (
    FileProfile,
    LineMetrics,
    ModelEndpoint,
    ProfileDocument,
    suggest,
)
from perfadvisor.profile import source_digest
from perfadvisor.stubserver import StubModelServer, StubScript
from perfadvisor.suggest import file_source_provider

SOURCE = """\
values = list(range(50000))
total = 0
for v in values:
    total += v * v
print(total)
"""

# What our "model" will answer, chunk by chunk, including a reasoning
# trace that the engine strips before extraction.
SCRIPT = StubScript(
    chunks=[
        "<think>the loop is quadratic work for the interpreter</think>",
        "Hoist the work into a builtin:\n",
        "```python\nvalues = list(range(50000))\n",
        "total = sum(v * v for v in values)\nprint(total)\n```",
    ]
)

workdir = Path(tempfile.mkdtemp(prefix="perfadvisor-demo-"))
src_path = workdir / "hot.py"
src_path.write_text(SOURCE, encoding="utf-8")

doc = ProfileDocument(
    program="python3 hot.py",
    elapsed_s=6.0,
    files={
        str(src_path): FileProfile(
            path=str(src_path),
            source_digest=source_digest(SOURCE.encode()),
            line_count=5,
            lines=(LineMetrics(line_no=4, cpu_python_pct=71.0),),
        )
    },
    producer="demo",
)

with StubModelServer({"demo-model": SCRIPT}) as server:
    endpoint = ModelEndpoint(base_url=server.base_url, model="demo-model")
    batch = suggest(doc, file_source_provider(workdir), [endpoint])

for s in batch:
    print(f"region {s.region.path}:{s.region.start_line}-{s.region.end_line}"
          f" ({s.region.reason}, score {s.region.score:.1f}) via {s.model}")
    print(f"rationale: {s.rationale}")
    print("--- candidate diff ---")
    print(s.candidates[0].unified_diff)
