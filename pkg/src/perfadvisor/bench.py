"""Run original and candidate snippets under a sandboxed interpreter.

Correctness is normalized-stdout equality: the snippets this tool deals
with are deterministic print-result programs, so richer equivalence
checking is out of scope. Timing is median-of-N wall clock with the
original and candidate interleaved (O C O C ...) to diffuse thermal and
scheduler drift; benchmarks never overlap.

Each run gets a fresh temp directory and an environment scrubbed to the
allowlist below plus ``PATH``, so one snippet's files or variables can
never leak into a later run.

A snippet may declare soft dependencies in its leading comments::

    # requires: cupy, numpy

When the configured interpreter cannot import one of them, the pair is
reported as skipped instead of failed (GPU libraries are routinely
absent on CI hosts).
"""

from __future__ import annotations

import ast
import re
import statistics
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from shutil import rmtree
from typing import Optional, Sequence

from .errors import InterpreterMissing, NonzeroExit, SnippetTimeout

# Everything else in the parent environment is withheld from snippets.
ENV_ALLOWLIST = ("PATH", "HOME", "LANG", "LC_ALL", "TMPDIR", "PYTHONIOENCODING", "SYSTEMROOT")

_REQUIRES_RE = re.compile(r"^#\s*requires:\s*(.+)$")


@dataclass(frozen=True)
class RunSpec:
    """How to execute snippets: interpreter, budgets, repetitions."""

    interpreter_cmd: tuple[str, ...] = ("python3",)
    timeout_s: float = 30.0
    repetitions: int = 5
    max_output_bytes: int = 1 << 20
    workdir: Optional[str] = None  # base for per-run temp dirs; None = system default

    def __post_init__(self):
        if self.repetitions < 3:
            raise ValueError("repetitions must be >= 3 (median needs it)")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")
        if not self.interpreter_cmd:
            raise ValueError("interpreter_cmd must be nonempty")
        object.__setattr__(self, "interpreter_cmd", tuple(self.interpreter_cmd))


@dataclass(frozen=True)
class RunResult:
    stdout: str
    exit_code: int
    wall_s: float
    truncated: bool = False


@dataclass(frozen=True)
class ValidationResult:
    """Correctness plus timing comparison of one original/candidate pair."""

    syntax_ok: bool
    correct: bool
    t_original_s: Optional[float] = None
    t_candidate_s: Optional[float] = None
    spread_original: Optional[float] = None
    spread_candidate: Optional[float] = None
    speedup: Optional[float] = None
    failure: Optional[dict] = None  # {"stage": ..., "message": ...}
    skipped: bool = False

    def to_json(self) -> dict:
        return {
            "syntax_ok": self.syntax_ok,
            "correct": self.correct,
            "t_original_s": self.t_original_s,
            "t_candidate_s": self.t_candidate_s,
            "spread_original": self.spread_original,
            "spread_candidate": self.spread_candidate,
            "speedup": self.speedup,
            "failure": self.failure,
            "skipped": self.skipped,
        }


def _scrubbed_env() -> dict:
    import os

    return {k: os.environ[k] for k in ENV_ALLOWLIST if k in os.environ}


def run_snippet(code: str, spec: RunSpec) -> RunResult:
    """Execute ``code`` as ``main.py`` in a fresh scratch directory.

    Kills the process at ``timeout_s`` (raising :class:`SnippetTimeout`),
    truncates captured stdout at ``max_output_bytes``, and removes the
    scratch directory afterwards. Nonzero exits raise
    :class:`NonzeroExit` with both output streams attached.
    """
    workdir = Path(tempfile.mkdtemp(prefix="perfadvisor-run-", dir=spec.workdir))
    try:
        script = workdir / "main.py"
        script.write_text(code, encoding="utf-8")
        cmd = list(spec.interpreter_cmd) + ["main.py"]
        start = time.perf_counter()
        try:
            proc = subprocess.Popen(
                cmd,
                cwd=workdir,
                env=_scrubbed_env(),
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
            )
        except FileNotFoundError as exc:
            raise InterpreterMissing(f"cannot execute {spec.interpreter_cmd[0]!r}") from exc
        try:
            out, err = proc.communicate(timeout=spec.timeout_s)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            wall = time.perf_counter() - start
            raise SnippetTimeout(f"killed after {spec.timeout_s}s", wall_s=wall)
        wall = time.perf_counter() - start
        truncated = len(out) > spec.max_output_bytes
        stdout = out[: spec.max_output_bytes].decode("utf-8", errors="replace")
        if proc.returncode != 0:
            raise NonzeroExit(
                proc.returncode,
                stdout=stdout,
                stderr=err[: spec.max_output_bytes].decode("utf-8", errors="replace"),
            )
        return RunResult(stdout=stdout, exit_code=0, wall_s=wall, truncated=truncated)
    finally:
        rmtree(workdir, ignore_errors=True)


def normalize_output(s: str) -> str:
    """CRLF fold, per-line trailing-whitespace strip, trailing newlines dropped."""
    s = s.replace("\r\n", "\n").replace("\r", "\n")
    return "\n".join(line.rstrip() for line in s.split("\n")).rstrip("\n")


def required_modules(code: str) -> list[str]:
    """Module names from ``# requires:`` lines in the leading comment block."""
    found: list[str] = []
    for line in code.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            break
        m = _REQUIRES_RE.match(stripped)
        if m:
            found.extend(p.strip() for p in re.split(r"[,\s]+", m.group(1)) if p.strip())
    return found


_probe_cache: dict[tuple, bool] = {}


def module_available(module: str, spec: RunSpec) -> bool:
    """Probe the configured interpreter (not this process) for a module."""
    key = (spec.interpreter_cmd, module)
    if key not in _probe_cache:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", module):
            _probe_cache[key] = False
        else:
            try:
                proc = subprocess.run(
                    list(spec.interpreter_cmd) + ["-c", f"import {module}"],
                    env=_scrubbed_env(),
                    capture_output=True,
                    timeout=60,
                )
                _probe_cache[key] = proc.returncode == 0
            except (FileNotFoundError, subprocess.TimeoutExpired):
                _probe_cache[key] = False
    return _probe_cache[key]


def _failure(stage: str, message: str, *, syntax_ok: bool, skipped: bool = False) -> ValidationResult:
    return ValidationResult(
        syntax_ok=syntax_ok,
        correct=False,
        failure={"stage": stage, "message": message},
        skipped=skipped,
    )


def bench_pair(original: str, candidate: str, spec: Optional[RunSpec] = None) -> ValidationResult:
    """Full validation pipeline; failures are folded in, never raised.

    Stages, in order: candidate syntax check; soft-dependency probe
    (missing module => ``skipped``); one correctness run of each with
    normalized stdout compared; ``repetitions`` interleaved timed runs of
    each; medians, interquartile ranges, and speedup. An incorrect
    candidate stops before the timed runs: no correctness, no speedup.
    """
    if not original.strip() or not candidate.strip():
        raise ValueError("both snippets must be nonempty")
    spec = spec or RunSpec()

    try:
        ast.parse(candidate)
    except SyntaxError as exc:
        return _failure("syntax", f"candidate does not parse: {exc}", syntax_ok=False)

    for code, who in ((original, "original"), (candidate, "candidate")):
        for module in required_modules(code):
            if not module_available(module, spec):
                return _failure(
                    "skipped",
                    f"{who} requires {module!r}, not importable by "
                    f"{' '.join(spec.interpreter_cmd)}",
                    syntax_ok=True,
                    skipped=True,
                )

    outputs = {}
    for code, stage in ((original, "original-run"), (candidate, "candidate-run")):
        try:
            outputs[stage] = run_snippet(code, spec)
        except (InterpreterMissing, SnippetTimeout, NonzeroExit) as exc:
            detail = f"{exc}"
            if isinstance(exc, NonzeroExit) and exc.stderr:
                detail += f"\nstderr: {exc.stderr[-2000:]}"
            return _failure(stage, detail, syntax_ok=True)

    correct = normalize_output(outputs["original-run"].stdout) == normalize_output(
        outputs["candidate-run"].stdout
    )
    if not correct:
        return ValidationResult(syntax_ok=True, correct=False)

    times: dict[str, list[float]] = {"original": [], "candidate": []}
    for _ in range(spec.repetitions):
        for code, who in ((original, "original"), (candidate, "candidate")):
            try:
                times[who].append(run_snippet(code, spec).wall_s)
            except (InterpreterMissing, SnippetTimeout, NonzeroExit) as exc:
                return _failure(f"{who}-run", f"timed run failed: {exc}", syntax_ok=True)

    t_orig = statistics.median(times["original"])
    t_cand = statistics.median(times["candidate"])
    speedup = t_orig / t_cand if t_orig > 0 and t_cand > 0 else None
    return ValidationResult(
        syntax_ok=True,
        correct=True,
        t_original_s=t_orig,
        t_candidate_s=t_cand,
        spread_original=_iqr(times["original"]),
        spread_candidate=_iqr(times["candidate"]),
        speedup=speedup,
    )


def _iqr(samples: Sequence[float]) -> float:
    q1, _q2, q3 = statistics.quantiles(samples, n=4)
    return q3 - q1


def default_interpreter() -> tuple[str, ...]:
    """The interpreter running this process; handy for tests and the CLI."""
    return (sys.executable,)
