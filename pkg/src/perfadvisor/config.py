"""Configuration: INI-style file, ``PERFADVISOR_*`` env vars, CLI flags.

Precedence, lowest to highest: built-in defaults, config file, environment,
command-line flags. Environment overrides use
``PERFADVISOR_<SECTION>_<KEY>`` (for example
``PERFADVISOR_SERVICE_LISTEN_ADDR`` or ``PERFADVISOR_THRESHOLDS_CPU_PCT``);
endpoint definitions are file/flag-only. The full key reference lives in
the README.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bench import RunSpec
from .errors import PerfAdvisorError
from .evaluate import DEFAULT_ACCEL_KEYWORDS
from .gateway import PROTOCOL_OLLAMA, PROTOCOL_OPENAI, ModelEndpoint
from .hotspots import Thresholds

DEFAULT_LISTEN_ADDR = "127.0.0.1:8765"

_ENV_PREFIX = "PERFADVISOR_"


class ConfigError(PerfAdvisorError):
    """Bad or missing configuration; mapped to exit code 3 by the CLI."""


@dataclass
class Config:
    """Everything the CLI and service need, already validated."""

    endpoints: dict[str, ModelEndpoint] = field(default_factory=dict)
    thresholds: Thresholds = field(default_factory=Thresholds)
    run_spec: RunSpec = field(default_factory=RunSpec)
    templates_dir: Optional[str] = None
    ui_assets_dir: Optional[str] = None
    listen_addr: str = DEFAULT_LISTEN_ADDR
    source_root: str = "."
    accel_keywords: tuple[str, ...] = DEFAULT_ACCEL_KEYWORDS
    parallelism: int = 2

    def require_endpoints(self) -> None:
        if not self.endpoints:
            raise ConfigError(
                "no model endpoints configured; add an [endpoint.NAME] section "
                "or pass --endpoint model@base_url"
            )

    def pick_endpoints(self, names: Optional[list[str]]) -> dict[str, ModelEndpoint]:
        """Endpoints selected by name (config key or model name); all if None."""
        if not names:
            return dict(self.endpoints)
        picked: dict[str, ModelEndpoint] = {}
        for name in names:
            if name in self.endpoints:
                picked[name] = self.endpoints[name]
                continue
            matches = {k: ep for k, ep in self.endpoints.items() if ep.model == name}
            if not matches:
                raise ConfigError(f"no configured endpoint named {name!r}")
            picked.update(matches)
        return picked


def _get(parser: configparser.ConfigParser, env: dict, section: str, key: str) -> Optional[str]:
    env_key = f"{_ENV_PREFIX}{section.upper()}_{key.upper()}"
    if env_key in env:
        return env[env_key]
    if parser.has_option(section, key):
        return parser.get(section, key)
    return None


def _typed(value: str, kind, where: str):
    try:
        if kind is bool:
            return value.strip().lower() in ("1", "true", "yes", "on")
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {value!r}") from exc


def parse_endpoint_spec(spec: str) -> tuple[str, ModelEndpoint]:
    """Parse an ad-hoc ``model@base_url[#protocol]`` flag value."""
    if "@" not in spec:
        raise ConfigError(f"--endpoint wants model@base_url[#protocol], got {spec!r}")
    model, _, rest = spec.partition("@")
    base_url, _, protocol = rest.partition("#")
    protocol = protocol or PROTOCOL_OLLAMA
    if protocol not in (PROTOCOL_OLLAMA, PROTOCOL_OPENAI):
        raise ConfigError(f"unknown protocol {protocol!r}")
    if not model or not base_url:
        raise ConfigError(f"--endpoint wants model@base_url[#protocol], got {spec!r}")
    try:
        ep = ModelEndpoint(base_url=base_url.rstrip("/"), model=model, protocol=protocol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return model, ep


def load_config(path: Optional[str] = None, env: Optional[dict] = None) -> Config:
    """Read a config file (if any) and apply environment overrides."""
    env = dict(os.environ) if env is None else env
    parser = configparser.ConfigParser()
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"config file {path!r} does not exist")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path!r}: {exc}") from exc

    cfg = Config()

    def scalar(section: str, key: str, kind, current):
        raw = _get(parser, env, section, key)
        if raw is None:
            return current
        return _typed(raw, kind, f"[{section}] {key}")

    try:
        cfg.listen_addr = scalar("service", "listen_addr", str, cfg.listen_addr)
        cfg.templates_dir = scalar("service", "templates_dir", str, cfg.templates_dir) or None
        cfg.ui_assets_dir = scalar("service", "ui_assets_dir", str, cfg.ui_assets_dir) or None
        cfg.source_root = scalar("service", "source_root", str, cfg.source_root)
        cfg.parallelism = scalar("service", "parallelism", int, cfg.parallelism)

        cfg.thresholds = Thresholds(
            cpu_pct=scalar("thresholds", "cpu_pct", float, cfg.thresholds.cpu_pct),
            mem_peak_mb=scalar("thresholds", "mem_peak_mb", float, cfg.thresholds.mem_peak_mb),
            copy_mb_per_s=scalar(
                "thresholds", "copy_mb_per_s", float, cfg.thresholds.copy_mb_per_s
            ),
            merge_gap_lines=scalar(
                "thresholds", "merge_gap_lines", int, cfg.thresholds.merge_gap_lines
            ),
            context_pad_lines=scalar(
                "thresholds", "context_pad_lines", int, cfg.thresholds.context_pad_lines
            ),
        )

        interpreter = scalar("run", "interpreter", str, None)
        cfg.run_spec = RunSpec(
            interpreter_cmd=tuple(interpreter.split()) if interpreter else cfg.run_spec.interpreter_cmd,
            timeout_s=scalar("run", "timeout_s", float, cfg.run_spec.timeout_s),
            repetitions=scalar("run", "repetitions", int, cfg.run_spec.repetitions),
            max_output_bytes=scalar(
                "run", "max_output_bytes", int, cfg.run_spec.max_output_bytes
            ),
        )

        accel = scalar("eval", "accel_keywords", str, None)
        if accel is not None:
            cfg.accel_keywords = tuple(p.strip() for p in accel.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    for section in parser.sections():
        if not section.startswith("endpoint."):
            continue
        name = section[len("endpoint."):]
        if not name:
            raise ConfigError("endpoint section needs a name: [endpoint.NAME]")
        get = lambda key, default=None: parser.get(section, key, fallback=default)
        base_url = get("base_url")
        model = get("model")
        if not base_url or not model:
            raise ConfigError(f"[{section}] needs base_url and model")
        try:
            cfg.endpoints[name] = ModelEndpoint(
                base_url=base_url.rstrip("/"),
                model=model,
                protocol=get("protocol", PROTOCOL_OLLAMA),
                connect_timeout_s=_typed(get("connect_timeout_s", "5"), float, section),
                response_timeout_s=_typed(get("response_timeout_s", "300"), float, section),
                max_retries=_typed(get("max_retries", "2"), int, section),
                bearer_token=get("bearer_token") or None,
            )
        except ValueError as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc

    return cfg
