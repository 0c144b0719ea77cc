"""Run configuration: JSON file plus environment overrides.

The API key is never stored in a config file; it is read from the
environment variable named by ``api_key_env`` when the HTTP backend is
built. ``CLINPROJ_ENDPOINT`` and ``CLINPROJ_MODEL`` override the file
values.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .backend import (AuditLog, ChatBackend, HttpChatBackend,
                      MockChatBackend, RateLimiter)
from .exceptions import ConfigError
from .translate import TranslationClient

ENV_ENDPOINT = "CLINPROJ_ENDPOINT"
ENV_MODEL = "CLINPROJ_MODEL"


@dataclass
class AppConfig:
    endpoint_url: str | None = None
    model: str = "gpt-4"
    api_key_env: str = "CLINPROJ_API_KEY"
    source_language: str = "en"
    requests_per_minute: float | None = None
    max_attempts: int = 3
    backoff_base: float = 0.5
    backoff_cap: float = 8.0
    temperature_nbest: float = 0.7
    temperature_backtranslate: float = 0.0
    timeout: float = 120.0

    @classmethod
    def load(cls, path: str | Path | None) -> "AppConfig":
        values: dict = {}
        if path is not None:
            try:
                values = json.loads(Path(path).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot read config {path}: {e}") from e
            known = {f.name for f in fields(cls)}
            for key in values:
                if key not in known:
                    raise ConfigError(f"unknown config key {key!r}")
        cfg = cls(**values)
        cfg.endpoint_url = os.environ.get(ENV_ENDPOINT, cfg.endpoint_url)
        cfg.model = os.environ.get(ENV_MODEL, cfg.model)
        return cfg

    def config_hash(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def build_client(self, *, mock_fixture: str | Path | None = None,
                     audit_path: str | Path | None = None,
                     sleep=None) -> TranslationClient:
        backend: ChatBackend
        if mock_fixture is not None:
            backend = MockChatBackend.from_file(mock_fixture)
        else:
            if not self.endpoint_url:
                raise ConfigError(
                    "no endpoint configured; set endpoint_url in the config "
                    f"file, {ENV_ENDPOINT}, or use a mock fixture")
            backend = HttpChatBackend(self.endpoint_url,
                                      api_key=os.environ.get(self.api_key_env),
                                      timeout=self.timeout)
        kwargs = {}
        if sleep is not None:
            kwargs["sleep"] = sleep
        return TranslationClient(
            backend,
            model=self.model,
            source_language=self.source_language,
            audit_log=AuditLog(audit_path) if audit_path else None,
            rate_limiter=RateLimiter(self.requests_per_minute),
            max_attempts=self.max_attempts,
            backoff_base=self.backoff_base,
            backoff_cap=self.backoff_cap,
            temperature_nbest=self.temperature_nbest,
            temperature_backtranslate=self.temperature_backtranslate,
            **kwargs)
