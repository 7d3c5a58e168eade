"""perfadvisor: profile-driven, locally served LLM code optimization.

Feed it a line-level CPU/GPU/memory profile, and it finds the regions
worth rewriting, asks models served on your own machine to rewrite them,
and benchmarks every candidate against the original before you trust it.
"""

from .bench import RunSpec, RunResult, ValidationResult, bench_pair, run_snippet
from .evaluate import (
    CorpusEntry,
    EvalRecord,
    EvalReport,
    load_corpus,
    render_report,
    run_eval,
)
from .gateway import (
    ChatOutcome,
    HealthStatus,
    ModelEndpoint,
    chat_stream,
    health_check,
    list_models,
)
from .hotspots import (
    HotspotRegion,
    Thresholds,
    detect_hotspots,
    expand_region,
    score_line,
)
from .profile import (
    FileProfile,
    FunctionSpan,
    LineMetrics,
    ProfileDocument,
    ingest_external,
    parse_profile,
    serialize_profile,
)
from .prompts import PromptParams, PromptSpec, build_prompt, load_templates
from .suggest import (
    CandidatePatch,
    Suggestion,
    apply_patch,
    extract_candidates,
    make_patch,
    suggest,
)

__version__ = "0.1.0"

__all__ = [
    "CandidatePatch",
    "ChatOutcome",
    "CorpusEntry",
    "EvalRecord",
    "EvalReport",
    "FileProfile",
    "FunctionSpan",
    "HealthStatus",
    "HotspotRegion",
    "LineMetrics",
    "ModelEndpoint",
    "ProfileDocument",
    "PromptParams",
    "PromptSpec",
    "RunResult",
    "RunSpec",
    "Suggestion",
    "Thresholds",
    "ValidationResult",
    "apply_patch",
    "bench_pair",
    "build_prompt",
    "chat_stream",
    "detect_hotspots",
    "expand_region",
    "extract_candidates",
    "health_check",
    "ingest_external",
    "list_models",
    "load_corpus",
    "load_templates",
    "make_patch",
    "parse_profile",
    "render_report",
    "run_eval",
    "run_snippet",
    "score_line",
    "serialize_profile",
    "suggest",
    "__version__",
]
