"""Hotspot detection: score lines, merge them into regions, expand context.

A line is flagged when any metric dimension reaches its threshold; the
score is how many times over threshold the worst dimension is. Nearby
flagged lines in the same file merge into one region so the model sees a
coherent block instead of scattered single lines.

The default thresholds are this tool's policy, not something inherited
from any upstream profiler; they are fully configurable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .profile import FileProfile, LineMetrics, ProfileDocument

# Reasons, in tie-break priority order for score_line.
REASON_CPU = "cpu"
REASON_MEMORY = "memory"
REASON_COPY = "copy"
# Emitted only as a prompt hint (a busy CPU line with an idle GPU is an
# opportunity, not a bottleneck); never triggers a region by itself.
REASON_GPU_IDLE = "gpu-idle"


@dataclass(frozen=True)
class Thresholds:
    """Trigger levels; a line scores observed/threshold per dimension."""

    cpu_pct: float = 5.0
    mem_peak_mb: float = 100.0
    copy_mb_per_s: float = 100.0
    merge_gap_lines: int = 2
    context_pad_lines: int = 5

    def __post_init__(self):
        for name in ("cpu_pct", "mem_peak_mb", "copy_mb_per_s", "context_pad_lines"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.merge_gap_lines < 0:
            raise ValueError("merge_gap_lines must be >= 0")


@dataclass(frozen=True)
class HotspotRegion:
    """A contiguous flagged range plus the wider context sent to the model."""

    path: str
    start_line: int
    end_line: int
    reason: str
    score: float
    context_start: int
    context_end: int

    def __post_init__(self):
        if self.start_line > self.end_line:
            raise ValueError("start_line must be <= end_line")
        if self.context_start > self.start_line or self.context_end < self.end_line:
            raise ValueError("context must contain the flagged range")
        if self.score < 1.0:
            raise ValueError("regions below threshold are never emitted")


def score_line(m: LineMetrics, t: Thresholds) -> tuple[float, Optional[str]]:
    """Return ``(score, reason)`` for one line.

    Score is the maximum of observed/threshold across the CPU total,
    peak-memory, and copy-rate dimensions. The reason names the argmax
    dimension and is present only when the line is at or over threshold
    (score >= 1); ties resolve cpu > memory > copy.
    """
    ratios = (
        (m.cpu_total_pct / t.cpu_pct, REASON_CPU),
        (m.mem_peak_mb / t.mem_peak_mb, REASON_MEMORY),
        (m.copy_mb_per_s / t.copy_mb_per_s, REASON_COPY),
    )
    score = max(r for r, _ in ratios)
    if score < 1.0:
        return score, None
    reason = next(name for r, name in ratios if r == score)
    return score, reason


def detect_hotspots(doc: ProfileDocument, t: Thresholds) -> list[HotspotRegion]:
    """Flag every line scoring >= 1 and merge nearby flags into regions.

    Two flagged lines in the same file belong to the same region when at
    most ``merge_gap_lines`` unflagged lines separate them. A region
    carries the max member score and that member's reason. Output is
    sorted by descending score, then path, then start line; context is
    not yet expanded (see :func:`expand_region`).
    """
    regions: list[HotspotRegion] = []
    for path, fp in doc.files.items():
        flagged = []
        for m in fp.lines:
            score, reason = score_line(m, t)
            if reason is not None:
                flagged.append((m.line_no, score, reason))
        for cluster in _merge_flagged(flagged, t.merge_gap_lines):
            best = max(cluster, key=lambda f: f[1])
            regions.append(
                HotspotRegion(
                    path=path,
                    start_line=cluster[0][0],
                    end_line=cluster[-1][0],
                    reason=best[2],
                    score=best[1],
                    context_start=cluster[0][0],
                    context_end=cluster[-1][0],
                )
            )
    regions.sort(key=lambda r: (-r.score, r.path, r.start_line))
    return regions


def _merge_flagged(flagged: list, merge_gap_lines: int) -> list[list]:
    """Group (line_no, score, reason) triples, already line-ordered."""
    clusters: list[list] = []
    for item in flagged:
        if clusters and item[0] - clusters[-1][-1][0] - 1 <= merge_gap_lines:
            clusters[-1].append(item)
        else:
            clusters.append([item])
    return clusters


def expand_region(region: HotspotRegion, fp: FileProfile, t: Thresholds) -> HotspotRegion:
    """Widen the region's context to something self-contained.

    If one or more function spans enclose the flagged range, the smallest
    such span becomes the context; otherwise the range is padded by
    ``context_pad_lines`` and clamped to the file. Idempotent: the context
    is recomputed from the flagged range alone.
    """
    enclosing = [
        fn
        for fn in fp.functions
        if fn.start_line <= region.start_line and fn.end_line >= region.end_line
    ]
    if enclosing:
        fn = min(enclosing, key=lambda f: (f.end_line - f.start_line, f.start_line))
        start, end = fn.start_line, fn.end_line
    else:
        start = max(1, region.start_line - t.context_pad_lines)
        end = min(fp.line_count, region.end_line + t.context_pad_lines)
        end = max(end, region.end_line)  # files with line_count 0 stay sane
    return replace(region, context_start=start, context_end=end)
