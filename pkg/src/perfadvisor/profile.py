"""Canonical line-level profile document model and its (de)serialization.

The canonical on-disk form is a single JSON document (see PROFILE_FORMAT.md)
with an explicit ``format_version`` so downstream readers can detect drift.
A document attributes shares of one program run to individual source lines:
CPU time split into interpreted / native / system components, average and
peak memory, copy volume (MB/s moved across representation boundaries), and
GPU utilization.

Documents are immutable after construction and safe to share across
threads. Unknown keys encountered while parsing are preserved verbatim in
``extra`` mappings so that serialize(parse(x)) does not lose information
emitted by newer producers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Optional

from .errors import InvariantViolation, MalformedInput, ProfileSyntaxError, UnknownDialect

FORMAT_VERSION = 1

# Per-line CPU percentages are rounded independently by producers, so sums
# may exceed 100 by a hair. Absolute slack applied to every sum check.
PCT_SUM_EPSILON = 0.01

_METRIC_FIELDS = (
    "cpu_python_pct",
    "cpu_native_pct",
    "cpu_system_pct",
    "mem_avg_mb",
    "mem_peak_mb",
    "copy_mb_per_s",
    "gpu_pct",
)

_PCT_FIELDS = ("cpu_python_pct", "cpu_native_pct", "cpu_system_pct", "gpu_pct")


@dataclass(frozen=True)
class LineMetrics:
    """Cost attributed to one source line, as shares of the whole run."""

    line_no: int
    cpu_python_pct: float = 0.0
    cpu_native_pct: float = 0.0
    cpu_system_pct: float = 0.0
    mem_avg_mb: float = 0.0
    mem_peak_mb: float = 0.0
    copy_mb_per_s: float = 0.0
    gpu_pct: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def cpu_total_pct(self) -> float:
        return self.cpu_python_pct + self.cpu_native_pct + self.cpu_system_pct


@dataclass(frozen=True)
class FunctionSpan:
    """A named function covering an inclusive 1-based line range."""

    name: str
    start_line: int
    end_line: int


@dataclass(frozen=True)
class FileProfile:
    """Per-file slice of a profile: ordered line metrics plus function map."""

    path: str
    source_digest: str = ""
    line_count: int = 0
    lines: tuple[LineMetrics, ...] = ()
    functions: tuple[FunctionSpan, ...] = ()
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ProfileDocument:
    """A complete line-level performance profile of one program run."""

    program: str
    elapsed_s: float
    max_footprint_mb: float = 0.0
    files: dict = field(default_factory=dict)
    producer: str = ""
    extra: dict = field(default_factory=dict)

    def iter_lines(self) -> Iterable[tuple[str, LineMetrics]]:
        """Yield ``(path, metrics)`` for every profiled line in path order."""
        for path in self.files:
            for m in self.files[path].lines:
                yield path, m


def source_digest(data: bytes) -> str:
    """Content hash used to tie a profile to the exact source it measured."""
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_document(doc: ProfileDocument) -> None:
    """Raise :class:`InvariantViolation` unless ``doc`` satisfies all invariants."""
    if not doc.elapsed_s > 0:
        raise InvariantViolation("elapsed_s > 0", detail=f"got {doc.elapsed_s}")
    if doc.max_footprint_mb < 0:
        raise InvariantViolation("max_footprint_mb >= 0", detail=f"got {doc.max_footprint_mb}")
    total_cpu = 0.0
    for path, fp in doc.files.items():
        if fp.path != path:
            raise InvariantViolation("file key equals file path", detail=f"{path!r} vs {fp.path!r}")
        if fp.line_count < 0:
            raise InvariantViolation("line_count >= 0", detail=f"{path}: {fp.line_count}")
        prev_no = 0
        for m in fp.lines:
            _validate_line(m, fp, path)
            if m.line_no <= prev_no:
                raise InvariantViolation(
                    "line_no strictly increasing", detail=path, line=m.line_no
                )
            prev_no = m.line_no
            total_cpu += m.cpu_total_pct
        for fn in fp.functions:
            if not (1 <= fn.start_line <= fn.end_line <= fp.line_count):
                raise InvariantViolation(
                    "function range within [1, line_count]",
                    detail=f"{path}:{fn.name} [{fn.start_line},{fn.end_line}]",
                )
    if total_cpu > 100.0 + PCT_SUM_EPSILON:
        raise InvariantViolation(
            "document CPU shares sum <= 100", detail=f"sum {total_cpu:.4f}"
        )


def _validate_line(m: LineMetrics, fp: FileProfile, path: str) -> None:
    if not (1 <= m.line_no <= fp.line_count):
        raise InvariantViolation(
            "line_no within [1, line_count]",
            detail=f"{path}: line_count {fp.line_count}",
            line=m.line_no,
        )
    for name in _PCT_FIELDS:
        v = getattr(m, name)
        if not (0.0 <= v <= 100.0):
            raise InvariantViolation(
                f"{name} in [0, 100]", detail=f"{path}: got {v}", line=m.line_no
            )
    for name in ("mem_avg_mb", "mem_peak_mb", "copy_mb_per_s"):
        v = getattr(m, name)
        if v < 0:
            raise InvariantViolation(
                f"{name} >= 0", detail=f"{path}: got {v}", line=m.line_no
            )
    if m.mem_peak_mb < m.mem_avg_mb:
        raise InvariantViolation(
            "mem_peak_mb >= mem_avg_mb",
            detail=f"{path}: peak {m.mem_peak_mb} < avg {m.mem_avg_mb}",
            line=m.line_no,
        )
    if m.cpu_total_pct > 100.0 + PCT_SUM_EPSILON:
        raise InvariantViolation(
            "line CPU shares sum <= 100",
            detail=f"{path}: sum {m.cpu_total_pct:.4f}",
            line=m.line_no,
        )


# ---------------------------------------------------------------------------
# Canonical format: parse
# ---------------------------------------------------------------------------

def _reject_duplicate_keys(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise ProfileSyntaxError(f"duplicate object key {key!r}")
        obj[key] = value
    return obj


def _expect(value: Any, types: tuple, where: str) -> Any:
    if isinstance(value, bool) or not isinstance(value, types):
        want = "/".join(t.__name__ for t in types)
        raise ProfileSyntaxError(f"expected {want}, got {type(value).__name__}", where)
    return value


def _number(value: Any, where: str) -> float:
    return float(_expect(value, (int, float), where))


def parse_profile(data: bytes | str) -> ProfileDocument:
    """Parse canonical profile bytes into a validated :class:`ProfileDocument`.

    Raises :class:`ProfileSyntaxError` for malformed input (with a position)
    and :class:`InvariantViolation` when the document is well-formed but
    breaks a documented invariant. Unknown keys are kept in ``extra``.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProfileSyntaxError(f"not UTF-8: {exc.reason}", f"byte {exc.start}") from exc
    else:
        text = data
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ProfileSyntaxError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc

    root = _expect(raw, (dict,), "$")
    version = root.get("format_version")
    if version != FORMAT_VERSION:
        raise ProfileSyntaxError(
            f"unsupported format_version {version!r} (expected {FORMAT_VERSION})",
            "format_version",
        )
    known = {"format_version", "program", "elapsed_s", "max_footprint_mb", "producer", "files"}
    program = _expect(root.get("program", ""), (str,), "program")
    elapsed_s = _number(root.get("elapsed_s", 0), "elapsed_s")
    footprint = _number(root.get("max_footprint_mb", 0), "max_footprint_mb")
    producer = _expect(root.get("producer", ""), (str,), "producer")
    files_raw = _expect(root.get("files", {}), (dict,), "files")

    files: dict[str, FileProfile] = {}
    for path, file_raw in files_raw.items():
        files[path] = _parse_file(path, _expect(file_raw, (dict,), f"files[{path!r}]"))

    doc = ProfileDocument(
        program=program,
        elapsed_s=elapsed_s,
        max_footprint_mb=footprint,
        files=files,
        producer=producer,
        extra={k: v for k, v in root.items() if k not in known},
    )
    validate_document(doc)
    return doc


def _parse_file(path: str, raw: dict) -> FileProfile:
    where = f"files[{path!r}]"
    known = {"source_digest", "line_count", "functions", "lines"}
    digest = _expect(raw.get("source_digest", ""), (str,), f"{where}.source_digest")
    line_count = _expect(raw.get("line_count", 0), (int,), f"{where}.line_count")
    functions = []
    for i, fn_raw in enumerate(_expect(raw.get("functions", []), (list,), f"{where}.functions")):
        fn = _expect(fn_raw, (dict,), f"{where}.functions[{i}]")
        functions.append(
            FunctionSpan(
                name=_expect(fn.get("name", ""), (str,), f"{where}.functions[{i}].name"),
                start_line=_expect(fn.get("start_line"), (int,), f"{where}.functions[{i}].start_line"),
                end_line=_expect(fn.get("end_line"), (int,), f"{where}.functions[{i}].end_line"),
            )
        )
    lines = []
    for i, line_raw in enumerate(_expect(raw.get("lines", []), (list,), f"{where}.lines")):
        entry = _expect(line_raw, (dict,), f"{where}.lines[{i}]")
        lwhere = f"{where}.lines[{i}]"
        if "line_no" not in entry:
            raise ProfileSyntaxError("missing line_no", lwhere)
        kwargs: dict[str, Any] = {
            "line_no": _expect(entry["line_no"], (int,), f"{lwhere}.line_no")
        }
        for name in _METRIC_FIELDS:
            if name in entry:
                kwargs[name] = _number(entry[name], f"{lwhere}.{name}")
        kwargs["extra"] = {
            k: v for k, v in entry.items() if k != "line_no" and k not in _METRIC_FIELDS
        }
        lines.append(LineMetrics(**kwargs))
    return FileProfile(
        path=path,
        source_digest=digest,
        line_count=line_count,
        lines=tuple(lines),
        functions=tuple(functions),
        extra={k: v for k, v in raw.items() if k not in known},
    )


# ---------------------------------------------------------------------------
# Canonical format: serialize
# ---------------------------------------------------------------------------

def serialize_profile(doc: ProfileDocument) -> bytes:
    """Serialize to canonical UTF-8 JSON bytes.

    Key order is fixed (known keys first, unknown keys sorted), so two
    serializations of the same document are byte-identical and
    ``parse_profile(serialize_profile(doc)) == doc``.
    """
    root: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "program": doc.program,
        "elapsed_s": doc.elapsed_s,
        "max_footprint_mb": doc.max_footprint_mb,
        "producer": doc.producer,
        "files": {path: _file_to_json(doc.files[path]) for path in doc.files},
    }
    for key in sorted(doc.extra):
        root[key] = doc.extra[key]
    return (json.dumps(root, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _file_to_json(fp: FileProfile) -> dict:
    out: dict[str, Any] = {
        "source_digest": fp.source_digest,
        "line_count": fp.line_count,
        "functions": [
            {"name": fn.name, "start_line": fn.start_line, "end_line": fn.end_line}
            for fn in fp.functions
        ],
        "lines": [_line_to_json(m) for m in fp.lines],
    }
    for key in sorted(fp.extra):
        out[key] = fp.extra[key]
    return out


def _line_to_json(m: LineMetrics) -> dict:
    out: dict[str, Any] = {"line_no": m.line_no}
    for name in _METRIC_FIELDS:
        out[name] = getattr(m, name)
    for key in sorted(m.extra):
        out[key] = m.extra[key]
    return out


# ---------------------------------------------------------------------------
# External dialect adapters
# ---------------------------------------------------------------------------

def ingest_external(data: bytes | str, dialect: str) -> ProfileDocument:
    """Convert an external profiler's output into a canonical document.

    The returned document always satisfies the type invariants: adapter
    output is normalized (values clamped/rescaled as documented on each
    adapter) or the adapter raises :class:`MalformedInput`. Metric fields
    the dialect does not carry default to 0 and are listed as absent in
    the ``producer`` string.
    """
    adapter = _ADAPTERS.get(dialect)
    if adapter is None:
        raise UnknownDialect(
            f"unknown dialect {dialect!r} (registered: {', '.join(sorted(_ADAPTERS))})"
        )
    doc = adapter(data)
    validate_document(doc)
    return doc


def _scalene_line_metrics(entry: Mapping, absent: set) -> Optional[LineMetrics]:
    """Map one scalene per-line record onto :class:`LineMetrics`.

    Field mapping (best effort; see PROFILE_FORMAT.md for provenance):

    ====================  ===================
    scalene JSON          canonical
    ====================  ===================
    lineno                line_no
    n_cpu_percent_python  cpu_python_pct
    n_cpu_percent_c       cpu_native_pct
    n_sys_percent         cpu_system_pct
    n_avg_mb              mem_avg_mb
    n_peak_mb             mem_peak_mb
    n_copy_mb_s           copy_mb_per_s
    n_gpu_percent         gpu_pct
    ====================  ===================
    """
    mapping = {
        "cpu_python_pct": "n_cpu_percent_python",
        "cpu_native_pct": "n_cpu_percent_c",
        "cpu_system_pct": "n_sys_percent",
        "mem_avg_mb": "n_avg_mb",
        "mem_peak_mb": "n_peak_mb",
        "copy_mb_per_s": "n_copy_mb_s",
        "gpu_pct": "n_gpu_percent",
    }
    lineno = entry.get("lineno")
    if not isinstance(lineno, int) or lineno < 1:
        return None
    values: dict[str, float] = {}
    for ours, theirs in mapping.items():
        raw = entry.get(theirs)
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            values[ours] = float(raw)
        else:
            values[ours] = 0.0
            absent.add(theirs)
    # Normalization: samplers occasionally emit tiny negatives or >100
    # rounding artifacts; clamp rather than reject.
    for name in _PCT_FIELDS:
        values[name] = min(max(values[name], 0.0), 100.0)
    for name in ("mem_avg_mb", "mem_peak_mb", "copy_mb_per_s"):
        values[name] = max(values[name], 0.0)
    if values["mem_peak_mb"] < values["mem_avg_mb"]:
        values["mem_peak_mb"] = values["mem_avg_mb"]
    cpu_sum = values["cpu_python_pct"] + values["cpu_native_pct"] + values["cpu_system_pct"]
    if cpu_sum > 100.0:
        scale = 100.0 / cpu_sum
        for name in ("cpu_python_pct", "cpu_native_pct", "cpu_system_pct"):
            values[name] *= scale
    return LineMetrics(line_no=lineno, **values)


def _ingest_scalene_json(data: bytes | str) -> ProfileDocument:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInput(f"scalene-json: not UTF-8: {exc.reason}") from exc
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"scalene-json: invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(raw, dict):
        raise MalformedInput("scalene-json: top level must be an object")
    elapsed = raw.get("elapsed_time_sec")
    if not isinstance(elapsed, (int, float)) or isinstance(elapsed, bool) or elapsed <= 0:
        raise MalformedInput("scalene-json: missing or non-positive elapsed_time_sec")
    files_raw = raw.get("files")
    if not isinstance(files_raw, dict):
        raise MalformedInput("scalene-json: missing files object")

    absent: set[str] = set()
    files: dict[str, FileProfile] = {}
    for path, file_raw in files_raw.items():
        if not isinstance(file_raw, dict):
            raise MalformedInput(f"scalene-json: files[{path!r}] must be an object")
        lines = []
        for entry in file_raw.get("lines", []) or []:
            if not isinstance(entry, Mapping):
                continue
            m = _scalene_line_metrics(entry, absent)
            if m is not None:
                lines.append(m)
        lines.sort(key=lambda m: m.line_no)
        # Scalene reports per-line records without a total file length;
        # the max line number seen is the best lower bound available.
        deduped: list[LineMetrics] = []
        for m in lines:
            if deduped and deduped[-1].line_no == m.line_no:
                continue
            deduped.append(m)
        line_count = deduped[-1].line_no if deduped else 0
        files[path] = FileProfile(
            path=path,
            source_digest="",
            line_count=line_count,
            lines=tuple(deduped),
        )
    absent.add("source_digest")

    # Whole-document CPU shares can exceed 100 when multiple threads ran;
    # rescale proportionally so canonical invariants hold.
    total = sum(m.cpu_total_pct for fp in files.values() for m in fp.lines)
    if total > 100.0:
        scale = 100.0 / total
        for path, fp in files.items():
            files[path] = FileProfile(
                path=fp.path,
                source_digest=fp.source_digest,
                line_count=fp.line_count,
                lines=tuple(
                    LineMetrics(
                        line_no=m.line_no,
                        cpu_python_pct=m.cpu_python_pct * scale,
                        cpu_native_pct=m.cpu_native_pct * scale,
                        cpu_system_pct=m.cpu_system_pct * scale,
                        mem_avg_mb=m.mem_avg_mb,
                        mem_peak_mb=m.mem_peak_mb,
                        copy_mb_per_s=m.copy_mb_per_s,
                        gpu_pct=m.gpu_pct,
                    )
                    for m in fp.lines
                ),
                functions=fp.functions,
            )

    marker = f"absent: {', '.join(sorted(absent))}" if absent else "complete"
    return ProfileDocument(
        program=str(raw.get("program", "")),
        elapsed_s=float(elapsed),
        max_footprint_mb=max(float(raw.get("max_footprint_mb", 0.0) or 0.0), 0.0),
        files=files,
        producer=f"scalene-json adapter ({marker})",
    )


_ADAPTERS: dict[str, Callable[[bytes | str], ProfileDocument]] = {
    "scalene-json": _ingest_scalene_json,
}


def registered_dialects() -> tuple[str, ...]:
    return tuple(sorted(_ADAPTERS))
