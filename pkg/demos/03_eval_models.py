"""Walkthrough: rank two (stubbed) models on a tiny corpus.

Model "steady" answers every snippet correctly; model "flaky" gets half
wrong. The report ranks by correctness rate, then median speedup, then
brevity. For a real comparison, point the endpoints at a local Ollama
install and use the 15-entry corpus shipped in the package
(`perfadvisor.evaluate.builtin_corpus_dir()`).
"""

import sys

from perfadvisor import CorpusEntry, ModelEndpoint, RunSpec, render_report, run_eval
from perfadvisor.stubserver import StubModelServer, StubScript

ENTRIES = [
    CorpusEntry(id="squares", source="print(sum(i * i for i in range(2000)))\n",
                category="general"),
    CorpusEntry(id="mod-max", source="print(max(i * 13 % 37 for i in range(500)))\n",
                category="general"),
]
RIGHT = {"squares": "2664667000", "mod-max": "36"}


def answer(value: str) -> StubScript:
    return StubScript(chunks=[f"Simplify:\n```python\nprint({value})\n```"])


scripts = {
    "steady": [answer(RIGHT["squares"]), answer(RIGHT["mod-max"])],
    "flaky": [answer("0"), answer(RIGHT["mod-max"])],
}

spec = RunSpec(interpreter_cmd=(sys.executable,), repetitions=3)
with StubModelServer(scripts) as server:
    endpoints = [
        ModelEndpoint(base_url=server.base_url, model="steady"),
        ModelEndpoint(base_url=server.base_url, model="flaky"),
    ]
    report = run_eval(ENTRIES, endpoints, spec)

print(render_report(report, "table-text"))
print(render_report(report, "markdown"))
