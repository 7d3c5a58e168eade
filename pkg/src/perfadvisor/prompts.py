"""Render a hotspot region and its measurements into a model prompt.

Rendering is deterministic: the same region, source, and metrics always
produce byte-identical prompts. The region's source is embedded verbatim
in a fenced block, and every context line with nonzero cost gets one
annotation line, so the model sees real numbers and nothing invented.

The two shipped templates are original to this tool; user templates are
plain text files with ``{{source}}``, ``{{annotations}}`` and
``{{reason}}`` placeholders, loaded from a templates directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import MissingSource, UnknownTemplate
from .hotspots import REASON_GPU_IDLE, HotspotRegion
from .profile import LineMetrics

DEFAULT_SYSTEM_TEXT = (
    "You are a performance engineer optimizing code in an interpreted language. "
    "Study the profiled region and rewrite it to address the reported bottleneck. "
    "Permissible strategies include vectorization, native libraries (for example "
    "BLAS-backed array packages), eliminating redundant computation, and GPU "
    "acceleration when the workload justifies it. The rewrite must preserve "
    "observable behavior exactly. Answer with a short explanation and EXACTLY ONE "
    "fenced code block containing the full rewritten region."
)

_SPEED_TEMPLATE = """\
A line-level profiler flagged the region below as a {{reason}} hotspot.
Percentages are shares of the entire run's wall time.

Per-line measurements:
{{annotations}}

Region source:

```python
{{source}}
```

Rewrite the whole region so it runs faster with identical output.
"""

_MEMORY_TEMPLATE = """\
A line-level profiler flagged the region below as a {{reason}} hotspot:
its memory footprint or copy traffic dominates the run.

Per-line measurements:
{{annotations}}

Region source:

```python
{{source}}
```

Rewrite the whole region to allocate and copy less while producing
identical output.
"""

BUILTIN_TEMPLATES: dict[str, str] = {
    "optimize-speed": _SPEED_TEMPLATE,
    "optimize-memory": _MEMORY_TEMPLATE,
}

PLACEHOLDERS = ("{{source}}", "{{annotations}}", "{{reason}}")


@dataclass(frozen=True)
class PromptParams:
    """Sampling parameters attached to every request built from a prompt."""

    temperature: float = 0.2
    max_tokens: int = 2048
    # Fixed by default so reruns are as repeatable as the serving stack
    # allows; None disables sending a seed.
    seed: Optional[int] = 0


@dataclass(frozen=True)
class PromptSpec:
    """A fully rendered prompt: system preamble, user body, parameters."""

    system_text: str
    user_text: str
    params: PromptParams = field(default_factory=PromptParams)


def template_for_reason(reason: str) -> str:
    """Pick the built-in template matching a region's reason."""
    return "optimize-memory" if reason == "memory" else "optimize-speed"


def load_templates(templates_dir: str | Path | None) -> dict[str, str]:
    """Built-in templates plus ``*.txt`` overrides from a directory.

    A file named ``optimize-speed.txt`` replaces the built-in of the same
    id. Files missing the ``{{source}}`` placeholder are rejected: a
    prompt without the region's code cannot request a rewrite of it.
    """
    templates = dict(BUILTIN_TEMPLATES)
    if templates_dir is None:
        return templates
    for path in sorted(Path(templates_dir).glob("*.txt")):
        text = path.read_text(encoding="utf-8")
        if "{{source}}" not in text:
            raise ValueError(f"template {path} lacks the {{{{source}}}} placeholder")
        templates[path.stem] = text
    return templates


def _format_value(v: float) -> str:
    return f"{v:g}"


def annotation_line(m: LineMetrics) -> Optional[str]:
    """One measurement comment for a line, or None when all shown values are zero."""
    shown = (m.cpu_python_pct, m.cpu_native_pct, m.mem_peak_mb, m.copy_mb_per_s)
    if all(v == 0 for v in shown):
        return None
    return (
        f"# line {m.line_no}: cpu_py {_format_value(m.cpu_python_pct)}% | "
        f"cpu_nat {_format_value(m.cpu_native_pct)}% | "
        f"mem_peak {_format_value(m.mem_peak_mb)} MB | "
        f"copy {_format_value(m.copy_mb_per_s)} MB/s"
    )


def build_prompt(
    region: HotspotRegion,
    source_lines: Sequence[str],
    metrics: Iterable[LineMetrics],
    template: str = "optimize-speed",
    registry: Optional[Mapping[str, str]] = None,
    params: Optional[PromptParams] = None,
) -> PromptSpec:
    """Render ``region`` into a :class:`PromptSpec`.

    ``source_lines`` is the profiled file's content split into lines
    (index 0 is line 1) and must cover the region's context range.
    ``metrics`` supplies the per-line measurements to annotate with;
    entries outside the context range are ignored.
    """
    registry = BUILTIN_TEMPLATES if registry is None else registry
    if template not in registry:
        raise UnknownTemplate(
            f"unknown template {template!r} (registered: {', '.join(sorted(registry))})"
        )
    if region.context_end > len(source_lines):
        raise MissingSource(
            f"source has {len(source_lines)} lines, context needs "
            f"[{region.context_start}, {region.context_end}]"
        )

    slice_text = "\n".join(source_lines[region.context_start - 1 : region.context_end])

    by_line = {m.line_no: m for m in metrics}
    annotations = []
    gpu_busy_cpu = False
    for line_no in range(region.context_start, region.context_end + 1):
        m = by_line.get(line_no)
        if m is None:
            continue
        note = annotation_line(m)
        if note is not None:
            annotations.append(note)
        if m.cpu_total_pct > 0 and m.gpu_pct == 0:
            gpu_busy_cpu = True
    if region.reason == "cpu" and gpu_busy_cpu:
        # Hint only: gpu-idle never triggers a region by itself.
        annotations.append(f"# {REASON_GPU_IDLE}: GPU unused while these lines burn CPU")
    annotation_text = "\n".join(annotations)

    user_text = (
        registry[template]
        .replace("{{annotations}}", annotation_text)
        .replace("{{reason}}", region.reason)
        .replace("{{source}}", slice_text)
    )
    return PromptSpec(
        system_text=DEFAULT_SYSTEM_TEXT,
        user_text=user_text,
        params=params if params is not None else PromptParams(),
    )
