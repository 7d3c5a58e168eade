"""Model-comparison harness over a snippet corpus.

Every (corpus entry, endpoint) pair becomes exactly one record: the
snippet is presented to the model as a whole-file CPU hotspot, the reply
is extracted, and the primary candidate is benchmarked against the
original. Models are scored on four declared dimensions: correctness
rate, median speedup over correct candidates, mean candidate length
(verbosity), and how often the candidate reaches for an acceleration
library. The composite ranking is exactly the documented sort key and
nothing more.

Entries whose soft dependencies are missing on the host are marked
skipped and excluded from aggregates, as are candidates that need
libraries the host lacks (a CPU-only CI box must not penalize a model
for suggesting GPU code).
"""

from __future__ import annotations

import json
import re
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import gateway
from .bench import RunSpec, bench_pair, module_available, run_snippet
from .errors import BenchError, GatewayError, MalformedInput, UnknownFormat
from .gateway import ModelEndpoint
from .hotspots import HotspotRegion
from .prompts import build_prompt
from .suggest import extract_candidates

DEFAULT_ACCEL_KEYWORDS = ("numpy", "cupy", "numba", "torch", "jax", "tensorflow")

REPORT_FORMATS = ("table-text", "markdown", "json")


@dataclass(frozen=True)
class CorpusEntry:
    """A self-contained deterministic snippet used for model comparison."""

    id: str
    source: str
    category: str = ""
    requires: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalRecord:
    """Outcome of one (entry, model) pairing."""

    entry_id: str
    model: str
    extracted: bool = False
    syntax_ok: bool = False
    correct: bool = False
    speedup: Optional[float] = None
    brevity_chars: int = 0
    uses_accel: bool = False
    skipped: bool = False
    note: str = ""

    def to_json(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "model": self.model,
            "extracted": self.extracted,
            "syntax_ok": self.syntax_ok,
            "correct": self.correct,
            "speedup": self.speedup,
            "brevity_chars": self.brevity_chars,
            "uses_accel": self.uses_accel,
            "skipped": self.skipped,
            "note": self.note,
        }


@dataclass(frozen=True)
class ModelAggregate:
    """Per-model summary; recomputable from the records at any time.

    ``correct_rate`` and ``accel_rate`` are fractions of the model's
    non-skipped records; ``median_speedup`` is over correct records only
    (None if the model got nothing right); ``mean_brevity`` averages the
    primary-candidate length over records where extraction succeeded.
    """

    model: str
    considered: int
    correct_rate: float
    median_speedup: Optional[float]
    mean_brevity: Optional[float]
    accel_rate: float

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "considered": self.considered,
            "correct_rate": self.correct_rate,
            "median_speedup": self.median_speedup,
            "mean_brevity": self.mean_brevity,
            "accel_rate": self.accel_rate,
        }


@dataclass
class EvalReport:
    records: list[EvalRecord] = field(default_factory=list)
    aggregates: dict[str, ModelAggregate] = field(default_factory=dict)


def compute_aggregates(records: Sequence[EvalRecord]) -> dict[str, ModelAggregate]:
    """Pure recomputation of per-model aggregates from raw records."""
    by_model: dict[str, list[EvalRecord]] = {}
    for r in records:
        by_model.setdefault(r.model, []).append(r)
    out: dict[str, ModelAggregate] = {}
    for model, recs in by_model.items():
        considered = [r for r in recs if not r.skipped]
        correct = [r for r in considered if r.correct]
        extracted = [r for r in considered if r.extracted]
        speedups = [r.speedup for r in correct if r.speedup is not None]
        out[model] = ModelAggregate(
            model=model,
            considered=len(considered),
            correct_rate=len(correct) / len(considered) if considered else 0.0,
            median_speedup=statistics.median(speedups) if speedups else None,
            mean_brevity=(
                sum(r.brevity_chars for r in extracted) / len(extracted) if extracted else None
            ),
            accel_rate=(
                sum(1 for r in considered if r.uses_accel) / len(considered)
                if considered
                else 0.0
            ),
        )
    return out


def references_accel(code: str, keywords: Sequence[str] = DEFAULT_ACCEL_KEYWORDS) -> bool:
    return any(re.search(rf"\b{re.escape(kw)}\b", code) for kw in keywords)


def _whole_file_region(entry: CorpusEntry) -> HotspotRegion:
    line_count = max(1, len(entry.source.splitlines()))
    return HotspotRegion(
        path=f"{entry.id}.py",
        start_line=1,
        end_line=line_count,
        reason="cpu",
        score=1.0,
        context_start=1,
        context_end=line_count,
    )


def evaluate_one(
    entry: CorpusEntry,
    ep: ModelEndpoint,
    spec: RunSpec,
    accel_keywords: Sequence[str] = DEFAULT_ACCEL_KEYWORDS,
) -> EvalRecord:
    """Chat, extract, and bench a single (entry, endpoint) pairing."""
    region = _whole_file_region(entry)
    prompt = build_prompt(region, entry.source.splitlines(), ())
    try:
        outcome = gateway.chat_stream(ep, prompt)
    except GatewayError as exc:
        return EvalRecord(entry_id=entry.id, model=ep.model, note=f"chat failed: {exc}")

    _rationale, candidates = extract_candidates(outcome.full_text)
    if not candidates:
        return EvalRecord(
            entry_id=entry.id, model=ep.model, extracted=False, note="no fenced code block"
        )
    primary = candidates[0]
    result = bench_pair(entry.source, primary, spec)
    if result.skipped:
        return EvalRecord(
            entry_id=entry.id,
            model=ep.model,
            extracted=True,
            syntax_ok=result.syntax_ok,
            brevity_chars=len(primary),
            uses_accel=references_accel(primary, accel_keywords),
            skipped=True,
            note=result.failure["message"] if result.failure else "skipped",
        )
    return EvalRecord(
        entry_id=entry.id,
        model=ep.model,
        extracted=True,
        syntax_ok=result.syntax_ok,
        correct=result.correct,
        speedup=result.speedup if result.correct else None,
        brevity_chars=len(primary),
        uses_accel=references_accel(primary, accel_keywords),
        note=result.failure["message"] if result.failure else "",
    )


def run_eval(
    corpus: Sequence[CorpusEntry],
    eps: Sequence[ModelEndpoint],
    spec: Optional[RunSpec] = None,
    accel_keywords: Sequence[str] = DEFAULT_ACCEL_KEYWORDS,
) -> EvalReport:
    """Sweep the corpus across every endpoint; failures never abort the sweep.

    Entries with unmet ``requires`` yield records marked skipped without
    consulting any model. Benchmarking runs strictly sequentially.
    """
    spec = spec or RunSpec()
    records: list[EvalRecord] = []
    for entry in corpus:
        unmet = [m for m in entry.requires if not module_available(m, spec)]
        for ep in eps:
            if unmet:
                records.append(
                    EvalRecord(
                        entry_id=entry.id,
                        model=ep.model,
                        skipped=True,
                        note=f"entry requires {', '.join(unmet)}",
                    )
                )
            else:
                records.append(evaluate_one(entry, ep, spec, accel_keywords))
    return EvalReport(records=records, aggregates=compute_aggregates(records))


def model_order(aggregates: dict[str, ModelAggregate]) -> list[ModelAggregate]:
    """Documented ranking: correct_rate desc, median_speedup desc, brevity asc, name."""
    return sorted(
        aggregates.values(),
        key=lambda a: (
            -a.correct_rate,
            -(a.median_speedup if a.median_speedup is not None else float("-inf")),
            a.mean_brevity if a.mean_brevity is not None else float("inf"),
            a.model,
        ),
    )


def render_report(report: EvalReport, fmt: str = "table-text") -> str:
    """Deterministic text rendering of a report in the requested format."""
    if fmt not in REPORT_FORMATS:
        raise UnknownFormat(f"unknown format {fmt!r} (one of {', '.join(REPORT_FORMATS)})")
    ordered = model_order(report.aggregates)
    if fmt == "json":
        return json.dumps(
            {
                "models": [a.to_json() for a in ordered],
                "records": [r.to_json() for r in report.records],
            },
            indent=2,
        ) + "\n"

    headers = ("model", "considered", "correct_rate", "median_speedup", "mean_brevity", "accel_rate")
    rows = [
        (
            a.model,
            str(a.considered),
            f"{a.correct_rate:.2f}",
            f"{a.median_speedup:.2f}x" if a.median_speedup is not None else "-",
            f"{a.mean_brevity:.0f}" if a.mean_brevity is not None else "-",
            f"{a.accel_rate:.2f}",
        )
        for a in ordered
    ]
    if fmt == "markdown":
        lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines += ["  ".join(row[i].ljust(widths[i]) for i in range(len(headers))) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Corpus on disk: one directory per entry with `snippet.py` and `meta`
# ---------------------------------------------------------------------------

def _parse_meta(text: str, where: str) -> dict:
    meta: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise MalformedInput(f"{where}: meta line without ':': {line!r}")
        key, _, value = line.partition(":")
        meta[key.strip()] = value.strip()
    return meta


def load_corpus(corpus_dir: str | Path) -> list[CorpusEntry]:
    """Read corpus entries, sorted by id. See PROFILE_FORMAT.md for the layout."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise MalformedInput(f"corpus directory {corpus_dir} does not exist")
    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    for entry_dir in sorted(p for p in corpus_dir.iterdir() if p.is_dir()):
        snippet = entry_dir / "snippet.py"
        meta_path = entry_dir / "meta"
        if not snippet.is_file() or not meta_path.is_file():
            continue
        meta = _parse_meta(meta_path.read_text(encoding="utf-8"), str(meta_path))
        entry_id = meta.get("id", entry_dir.name)
        if entry_id in seen:
            raise MalformedInput(f"duplicate corpus id {entry_id!r}")
        seen.add(entry_id)
        requires = tuple(
            p.strip() for p in re.split(r"[,\s]+", meta.get("requires", "")) if p.strip()
        )
        entries.append(
            CorpusEntry(
                id=entry_id,
                source=snippet.read_text(encoding="utf-8"),
                category=meta.get("category", ""),
                requires=requires,
            )
        )
    entries.sort(key=lambda e: e.id)
    return entries


def validate_corpus(corpus: Sequence[CorpusEntry], spec: Optional[RunSpec] = None) -> list[str]:
    """Run every entry once; return ids that failed (unmet requires skip)."""
    spec = spec or RunSpec()
    bad: list[str] = []
    for entry in corpus:
        if any(not module_available(m, spec) for m in entry.requires):
            continue
        try:
            run_snippet(entry.source, spec)
        except BenchError:
            bad.append(entry.id)
    return bad


def builtin_corpus_dir() -> Path:
    """Location of the corpus shipped inside the package."""
    return Path(__file__).parent / "corpus"
