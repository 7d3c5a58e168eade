import json

import pytest

from perfadvisor.errors import UnknownFormat
from perfadvisor.evaluate import (
    CorpusEntry,
    EvalRecord,
    EvalReport,
    builtin_corpus_dir,
    compute_aggregates,
    load_corpus,
    model_order,
    references_accel,
    render_report,
    run_eval,
    validate_corpus,
)
from perfadvisor.stubserver import StubModelServer, StubScript

from conftest import endpoint_for


def fenced(code: str) -> str:
    return f"optimized:\n```python\n{code}\n```"


ENTRIES = [
    CorpusEntry(id="e1-sum", source="print(sum(range(100)))\n", category="general"),
    CorpusEntry(
        id="e2-concat",
        source="s = ''\nfor i in range(50):\n    s += str(i % 3)\nprint(s.count('1'))\n",
        category="general",
    ),
    CorpusEntry(id="e3-max", source="print(max(i * 7 % 11 for i in range(40)))\n", category="general"),
]

# What each entry actually prints.
EXPECTED = {"e1-sum": "4950", "e2-concat": "17", "e3-max": "10"}


def stub_pair():
    """Model A always right, model B wrong on every second entry."""
    a_scripts = [StubScript(chunks=[fenced(f"print({EXPECTED[e.id]!r})".replace("'", ""))]) for e in ENTRIES]
    b_scripts = []
    for i, e in enumerate(ENTRIES):
        value = EXPECTED[e.id] if i % 2 == 1 else "-1"
        b_scripts.append(StubScript(chunks=[fenced(f"print({value})")]))
    return StubModelServer({"model-a": a_scripts, "model-b": b_scripts})


class TestRunEval:
    def test_record_conservation(self, run_spec):
        with stub_pair() as server:
            eps = [endpoint_for(server, "model-a"), endpoint_for(server, "model-b")]
            report = run_eval(ENTRIES, eps, run_spec)
        assert len(report.records) == len(ENTRIES) * 2
        assert not any(r.skipped for r in report.records)

    def test_ranking_property(self, run_spec):
        with stub_pair() as server:
            eps = [endpoint_for(server, "model-a"), endpoint_for(server, "model-b")]
            report = run_eval(ENTRIES, eps, run_spec)
        agg = report.aggregates
        assert agg["model-a"].correct_rate == 1.0
        assert agg["model-b"].correct_rate == pytest.approx(1 / 3)
        ranked = model_order(agg)
        assert ranked[0].model == "model-a"
        text = render_report(report)
        assert text.index("model-a") < text.index("model-b")

    def test_unmet_requires_marks_skipped(self, run_spec):
        entries = ENTRIES[:1] + [
            CorpusEntry(
                id="gpu-only",
                source="print(1)\n",
                category="general",
                requires=("not_a_real_module_xyz",),
            )
        ]
        with stub_pair() as server:
            eps = [endpoint_for(server, "model-a")]
            report = run_eval(entries, eps, run_spec)
        assert len(report.records) == 2
        skipped = [r for r in report.records if r.skipped]
        assert [r.entry_id for r in skipped] == ["gpu-only"]
        # excluded from aggregates
        assert report.aggregates["model-a"].considered == 1

    def test_chat_failure_recorded_not_raised(self, run_spec):
        import socket

        s = socket.socket()
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
        s.close()
        from perfadvisor.gateway import ModelEndpoint

        ep = ModelEndpoint(
            base_url=f"http://127.0.0.1:{port}", model="dead",
            connect_timeout_s=0.5, max_retries=0,
        )
        report = run_eval(ENTRIES[:1], [ep], run_spec)
        (record,) = report.records
        assert record.extracted is False
        assert record.correct is False
        assert "chat failed" in record.note

    def test_fenceless_response_recorded(self, run_spec):
        with StubModelServer({"chatty": StubScript(chunks=["no code here"])}) as server:
            report = run_eval(ENTRIES[:1], [endpoint_for(server, "chatty")], run_spec)
        (record,) = report.records
        assert record.extracted is False
        assert record.note == "no fenced code block"

    def test_accel_and_brevity_metrics(self, run_spec):
        code = "import numpy as np\nprint(int(np.sum(np.arange(100))))"
        with StubModelServer({"vec": StubScript(chunks=[fenced(code)])}) as server:
            report = run_eval(ENTRIES[:1], [endpoint_for(server, "vec")], run_spec)
        (record,) = report.records
        assert record.uses_accel is True
        assert record.brevity_chars == len(code) + 1  # trailing newline inside fence


class TestAggregates:
    def records(self):
        return [
            EvalRecord("e1", "m", extracted=True, syntax_ok=True, correct=True, speedup=2.0, brevity_chars=10),
            EvalRecord("e2", "m", extracted=True, syntax_ok=True, correct=True, speedup=4.0, brevity_chars=30),
            EvalRecord("e3", "m", extracted=True, syntax_ok=False, correct=False, brevity_chars=20),
            EvalRecord("e4", "m", skipped=True),
        ]

    def test_compute(self):
        agg = compute_aggregates(self.records())["m"]
        assert agg.considered == 3
        assert agg.correct_rate == pytest.approx(2 / 3)
        assert agg.median_speedup == 3.0
        assert agg.mean_brevity == 20.0

    def test_recomputable(self, run_spec):
        with stub_pair() as server:
            eps = [endpoint_for(server, "model-a"), endpoint_for(server, "model-b")]
            report = run_eval(ENTRIES, eps, run_spec)
        assert compute_aggregates(report.records) == report.aggregates

    def test_speedup_present_iff_correct(self):
        for r in self.records():
            assert (r.speedup is not None) == r.correct or r.speedup is None


class TestRender:
    def test_empty_report_header_only(self):
        text = render_report(EvalReport())
        lines = text.strip().splitlines()
        assert len(lines) == 1
        assert "model" in lines[0]

    def test_unknown_format(self):
        with pytest.raises(UnknownFormat):
            render_report(EvalReport(), "csv")

    def test_json_round_trips_aggregates(self):
        records = [
            EvalRecord("e1", "m", extracted=True, syntax_ok=True, correct=True,
                       speedup=2.0, brevity_chars=10),
        ]
        report = EvalReport(records=records, aggregates=compute_aggregates(records))
        parsed = json.loads(render_report(report, "json"))
        assert parsed["models"][0]["correct_rate"] == 1.0
        assert parsed["models"][0]["median_speedup"] == 2.0
        assert parsed["records"][0]["entry_id"] == "e1"

    def test_markdown_shape(self):
        records = [EvalRecord("e1", "m", extracted=True, correct=True, speedup=1.5, brevity_chars=5)]
        report = EvalReport(records=records, aggregates=compute_aggregates(records))
        text = render_report(report, "markdown")
        assert text.startswith("| model |")
        assert "| m |" in text

    def test_tiebreak_by_name(self):
        records = [
            EvalRecord("e", "zeta", extracted=True, correct=True, speedup=2.0, brevity_chars=5),
            EvalRecord("e", "alpha", extracted=True, correct=True, speedup=2.0, brevity_chars=5),
        ]
        ranked = model_order(compute_aggregates(records))
        assert [a.model for a in ranked] == ["alpha", "zeta"]

    def test_determinism(self):
        records = [EvalRecord("e1", "m", extracted=True, correct=True, speedup=1.5, brevity_chars=5)]
        report = EvalReport(records=records, aggregates=compute_aggregates(records))
        assert render_report(report, "json") == render_report(report, "json")


class TestCorpus:
    def test_load_corpus_layout(self, tmp_path):
        d = tmp_path / "entry-one"
        d.mkdir()
        (d / "snippet.py").write_text("print(1)\n")
        (d / "meta").write_text("id: entry-one\ncategory: general\nrequires: numpy, scipy\n")
        (tmp_path / "not-an-entry").mkdir()
        entries = load_corpus(tmp_path)
        assert len(entries) == 1
        assert entries[0].id == "entry-one"
        assert entries[0].requires == ("numpy", "scipy")

    def test_duplicate_ids_rejected(self, tmp_path):
        for name in ("a", "b"):
            d = tmp_path / name
            d.mkdir()
            (d / "snippet.py").write_text("print(1)\n")
            (d / "meta").write_text("id: same\n")
        from perfadvisor.errors import MalformedInput

        with pytest.raises(MalformedInput):
            load_corpus(tmp_path)

    def test_builtin_corpus_valid(self, run_spec):
        entries = load_corpus(builtin_corpus_dir())
        assert len(entries) == 15
        categories = {e.category for e in entries}
        assert {"dictionary-lookup", "matmul", "general"} <= categories
        assert len({e.id for e in entries}) == 15

    def test_validate_corpus_flags_broken(self, run_spec):
        entries = [
            CorpusEntry(id="ok", source="print(1)\n"),
            CorpusEntry(id="broken", source="raise ValueError('x')\n"),
        ]
        assert validate_corpus(entries, run_spec) == ["broken"]


def test_references_accel():
    assert references_accel("import numpy as np")
    assert references_accel("from cupy import array")
    assert not references_accel("numpyish = 1")
    assert references_accel("zarr.load()", keywords=("zarr",))
