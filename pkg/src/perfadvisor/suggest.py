"""Turn hotspots into model suggestions with applicable candidate patches.

Pipeline per (region, endpoint): render a prompt, stream the chat, strip
reasoning traces, extract fenced code blocks, and diff each block against
the region's current source. One model failing never suppresses the rest
of the batch; failures are collected next to the successes.

Patches are emitted, never applied to user files.
"""

from __future__ import annotations

import difflib
import hashlib
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Sequence

from . import gateway
from .errors import GatewayError, PerfAdvisorError, SourceMismatch
from .gateway import ModelEndpoint
from .hotspots import HotspotRegion, Thresholds, detect_hotspots, expand_region
from .profile import ProfileDocument, source_digest
from .prompts import PromptSpec, build_prompt, template_for_reason

logger = logging.getLogger(__name__)

_THINK_RE = re.compile(r"<think>.*?</think>", re.DOTALL)


def strip_reasoning(text: str) -> str:
    """Drop ``<think>...</think>`` deliberation emitted by reasoning models.

    An unclosed ``<think>`` (stream cut off mid-thought) drops the tail:
    deliberation must never be mistaken for rationale or code.
    """
    text = _THINK_RE.sub("", text)
    cut = text.find("<think>")
    if cut != -1:
        text = text[:cut]
    return text


def extract_candidates(raw_text: str) -> tuple[str, list[str]]:
    """Split model output into prose rationale and fenced code candidates.

    Reasoning traces are stripped first. Fenced blocks (``` with an
    optional language tag) become candidates in order of appearance;
    everything outside the fences is rationale. A fence left unclosed by
    a truncated stream still yields its partial block as a candidate.
    """
    text = strip_reasoning(raw_text)
    rationale_parts: list[str] = []
    candidates: list[str] = []
    block: Optional[list[str]] = None
    for line in text.splitlines(keepends=True):
        if block is None:
            if line.lstrip().startswith("```"):
                block = []
            else:
                rationale_parts.append(line)
        else:
            if line.lstrip().startswith("```"):
                candidates.append("".join(block))
                block = None
            else:
                block.append(line)
    if block:
        candidates.append("".join(block))
    return "".join(rationale_parts).strip(), candidates


# ---------------------------------------------------------------------------
# Unified diffs
# ---------------------------------------------------------------------------

_NO_NEWLINE = "\\ No newline at end of file"
_HUNK_RE = re.compile(r"@@ -(\d+)(?:,(\d+))? \+\d+(?:,\d+)? @@")


def unified_diff_text(a: str, b: str, fromfile: str = "original", tofile: str = "candidate") -> str:
    """Standard unified diff (3 context lines) between two texts.

    Lines without a trailing newline get the GNU-style
    ``\\ No newline at end of file`` marker so the diff stays losslessly
    applicable.
    """
    out: list[str] = []
    for line in difflib.unified_diff(
        a.splitlines(keepends=True), b.splitlines(keepends=True),
        fromfile=fromfile, tofile=tofile, n=3,
    ):
        if line.endswith("\n"):
            out.append(line)
        else:
            out.append(line + "\n")
            out.append(_NO_NEWLINE + "\n")
    return "".join(out)


def apply_patch(diff: str, original: str) -> str:
    """Apply a diff produced by :func:`unified_diff_text` to ``original``.

    Context lines are verified; a mismatch raises ``ValueError`` rather
    than producing a silently wrong result.
    """
    if not diff:
        return original
    src = original.splitlines(keepends=True)

    # Diff lines are delimited strictly by "\n"; the content of a line may
    # contain other Unicode line boundaries, so splitlines() is off-limits
    # here. The no-newline marker folds into the preceding content line.
    raw_lines = diff.split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    ops: list[tuple[str, str]] = []  # (tag, content) with tag in {@, ' ', '-', '+'}
    in_hunks = False
    for line in raw_lines:
        if not in_hunks and line.startswith(("--- ", "+++ ")):
            continue
        if line.startswith(_NO_NEWLINE[0]):  # "\"
            if not ops:
                raise ValueError("no-newline marker with no preceding line")
            tag, content = ops[-1]
            if not content.endswith("\n"):
                raise ValueError("dangling no-newline marker")
            ops[-1] = (tag, content[:-1])
            continue
        if line.startswith("@@"):
            in_hunks = True
            ops.append(("@", line))
        elif line[:1] in (" ", "-", "+"):
            ops.append((line[0], line[1:] + "\n"))
        elif line == "":
            # A diff line that was just "\n": an empty context line.
            ops.append((" ", "\n"))
        else:
            raise ValueError(f"unparseable diff line: {line!r}")

    out: list[str] = []
    idx = 0  # 0-based cursor into src
    for tag, content in ops:
        if tag == "@":
            m = _HUNK_RE.match(content)
            if not m:
                raise ValueError(f"bad hunk header: {content!r}")
            a_start = int(m.group(1))
            a_count = int(m.group(2)) if m.group(2) is not None else 1
            hunk_at = a_start - 1 if a_count > 0 else a_start
            if hunk_at < idx:
                raise ValueError("hunks out of order")
            out.extend(src[idx:hunk_at])
            idx = hunk_at
        elif tag == " ":
            if idx >= len(src) or src[idx] != content:
                got = src[idx] if idx < len(src) else "<eof>"
                raise ValueError(f"context mismatch at source line {idx + 1}: {got!r} != {content!r}")
            out.append(src[idx])
            idx += 1
        elif tag == "-":
            if idx >= len(src) or src[idx] != content:
                got = src[idx] if idx < len(src) else "<eof>"
                raise ValueError(f"removal mismatch at source line {idx + 1}: {got!r} != {content!r}")
            idx += 1
        else:  # "+"
            out.append(content)
    out.extend(src[idx:])
    return "".join(out)


@dataclass(frozen=True)
class CandidatePatch:
    """An extracted rewrite plus the diff that produces it."""

    original_text: str
    replacement_text: str
    unified_diff: str


def make_patch(original: str, candidate: str) -> CandidatePatch:
    """Diff ``candidate`` against ``original``; the diff round-trips exactly."""
    return CandidatePatch(
        original_text=original,
        replacement_text=candidate,
        unified_diff=unified_diff_text(original, candidate),
    )


# ---------------------------------------------------------------------------
# Suggestions
# ---------------------------------------------------------------------------

def normalize_code(text: str) -> str:
    """Cosmetic normalization for dedupe: trailing whitespace and blank runs."""
    lines = [ln.rstrip() for ln in text.splitlines()]
    folded: list[str] = []
    for ln in lines:
        if ln == "" and folded and folded[-1] == "":
            continue
        folded.append(ln)
    while folded and folded[0] == "":
        folded.pop(0)
    while folded and folded[-1] == "":
        folded.pop()
    return "\n".join(folded)


def compute_dedupe_key(region: HotspotRegion, candidates: Sequence[str]) -> str:
    """Hash of the region identity plus every candidate, normalized.

    Scoped to the region so identical code suggested for two different
    regions never collapses into one suggestion.
    """
    h = hashlib.sha256()
    h.update(f"{region.path}:{region.start_line}-{region.end_line}\n".encode("utf-8"))
    for cand in candidates:
        h.update(normalize_code(cand).encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


@dataclass(frozen=True)
class Suggestion:
    """One model's answer for one region, with extractable candidates."""

    region: HotspotRegion
    model: str
    raw_text: str
    rationale: str
    candidates: tuple[CandidatePatch, ...]
    dedupe_key: str

    @property
    def primary(self) -> Optional[CandidatePatch]:
        return self.candidates[0] if self.candidates else None


@dataclass(frozen=True)
class SuggestionFailure:
    """Why one (region, model) pair produced nothing."""

    path: str
    start_line: int
    model: str
    stage: str
    message: str


@dataclass
class SuggestBatch:
    """Deduped suggestions plus per-item failures; iterates suggestions."""

    suggestions: list[Suggestion] = field(default_factory=list)
    failures: list[SuggestionFailure] = field(default_factory=list)

    def __iter__(self) -> Iterator[Suggestion]:
        return iter(self.suggestions)

    def __len__(self) -> int:
        return len(self.suggestions)


def file_source_provider(root: str | Path) -> Callable[[str], bytes]:
    """Resolve profiled paths against ``root`` (absolute paths win)."""
    root = Path(root)

    def read(path: str) -> bytes:
        p = Path(path)
        if not p.is_absolute():
            p = root / p
        return p.read_bytes()

    return read


def build_suggestion(
    region: HotspotRegion,
    model: str,
    raw_text: str,
    original_text: str,
) -> Suggestion:
    """Extraction + patching for one raw model answer (pure, no I/O)."""
    rationale, blocks = extract_candidates(raw_text)
    patches = tuple(make_patch(original_text, block) for block in blocks)
    return Suggestion(
        region=region,
        model=model,
        raw_text=raw_text,
        rationale=rationale,
        candidates=patches,
        dedupe_key=compute_dedupe_key(region, blocks),
    )


def suggest(
    doc: ProfileDocument,
    sources: Callable[[str], bytes],
    eps: Sequence[ModelEndpoint],
    t: Optional[Thresholds] = None,
    templates: Optional[dict] = None,
    parallelism: int = 2,
) -> SuggestBatch:
    """Run the full hotspot -> prompt -> chat -> extract -> patch pipeline.

    ``sources`` maps a profiled path to its current bytes. A file whose
    digest no longer matches the profile raises :class:`SourceMismatch`
    (the profile is stale); every other failure is recorded per
    (region, model) without aborting the batch. Suggestions sharing a
    dedupe key collapse, first (by region score, then model name) wins.
    """
    t = t or Thresholds()
    regions = detect_hotspots(doc, t)
    batch = SuggestBatch()
    if not regions or not eps:
        return batch

    work: list[tuple[HotspotRegion, str, PromptSpec, ModelEndpoint]] = []
    for region in regions:
        fp = doc.files[region.path]
        try:
            data = sources(region.path)
        except OSError as exc:
            raise SourceMismatch(f"cannot read {region.path!r}: {exc}") from exc
        if fp.source_digest and source_digest(data) != fp.source_digest:
            raise SourceMismatch(
                f"{region.path!r} changed since it was profiled; re-profile before suggesting"
            )
        expanded = expand_region(region, fp, t)
        source_lines = data.decode("utf-8").splitlines()
        prompt = build_prompt(
            expanded,
            source_lines,
            fp.lines,
            template=template_for_reason(expanded.reason),
            registry=templates,
        )
        original_text = "\n".join(
            source_lines[expanded.context_start - 1 : expanded.context_end]
        )
        for ep in eps:
            work.append((expanded, original_text, prompt, ep))

    def run_item(item) -> tuple:
        region, original_text, prompt, ep = item
        try:
            outcome = gateway.chat_stream(ep, prompt)
        except GatewayError as exc:
            return None, SuggestionFailure(
                path=region.path,
                start_line=region.start_line,
                model=ep.model,
                stage="chat",
                message=str(exc),
            )
        try:
            return build_suggestion(region, ep.model, outcome.full_text, original_text), None
        except PerfAdvisorError as exc:
            return None, SuggestionFailure(
                path=region.path,
                start_line=region.start_line,
                model=ep.model,
                stage="extract",
                message=str(exc),
            )

    if parallelism > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run_item, work))
    else:
        results = [run_item(item) for item in work]

    # Deterministic order regardless of completion order.
    paired = sorted(
        zip(work, results),
        key=lambda pair: (-pair[0][0].score, pair[0][0].path, pair[0][0].start_line, pair[0][3].model),
    )
    seen: set[str] = set()
    for (_region, _orig, _prompt, _ep), (suggestion, failure) in paired:
        if failure is not None:
            batch.failures.append(failure)
            continue
        if suggestion.dedupe_key in seen:
            continue
        seen.add(suggestion.dedupe_key)
        batch.suggestions.append(suggestion)
    return batch


# ---------------------------------------------------------------------------
# Serialization (schema documented in PROFILE_FORMAT.md)
# ---------------------------------------------------------------------------

def suggestion_to_json(s: Suggestion) -> dict:
    return {
        "id": s.dedupe_key,
        "region": {
            "path": s.region.path,
            "start_line": s.region.start_line,
            "end_line": s.region.end_line,
            "reason": s.region.reason,
            "score": s.region.score,
            "context_start": s.region.context_start,
            "context_end": s.region.context_end,
        },
        "model": s.model,
        "raw_text": s.raw_text,
        "rationale": s.rationale,
        "candidates": [
            {
                "original_text": c.original_text,
                "replacement_text": c.replacement_text,
                "unified_diff": c.unified_diff,
            }
            for c in s.candidates
        ],
    }


def suggestion_from_json(data: dict) -> Suggestion:
    r = data["region"]
    return Suggestion(
        region=HotspotRegion(
            path=r["path"],
            start_line=r["start_line"],
            end_line=r["end_line"],
            reason=r["reason"],
            score=r["score"],
            context_start=r["context_start"],
            context_end=r["context_end"],
        ),
        model=data["model"],
        raw_text=data["raw_text"],
        rationale=data["rationale"],
        candidates=tuple(
            CandidatePatch(
                original_text=c["original_text"],
                replacement_text=c["replacement_text"],
                unified_diff=c["unified_diff"],
            )
            for c in data["candidates"]
        ),
        dedupe_key=data["id"],
    )


def dump_suggestions(suggestions: Iterable[Suggestion]) -> str:
    doc = {
        "format_version": 1,
        "suggestions": [suggestion_to_json(s) for s in suggestions],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_suggestions(text: str) -> list[Suggestion]:
    return [suggestion_from_json(entry) for entry in json.loads(text)["suggestions"]]


def write_patch_files(suggestions: Iterable[Suggestion], out_dir: str | Path) -> list[Path]:
    """One ``.patch`` file per candidate; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for s in suggestions:
        stem = Path(s.region.path).name.replace(".", "_")
        for i, cand in enumerate(s.candidates):
            name = (
                f"{stem}_L{s.region.start_line}-{s.region.end_line}"
                f"_{_safe(s.model)}_{i}_{s.dedupe_key[:8]}.patch"
            )
            path = out_dir / name
            path.write_text(cand.unified_diff, encoding="utf-8")
            written.append(path)
    return written


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)
