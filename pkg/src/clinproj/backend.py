"""Chat-completion backends: HTTP wire protocol and deterministic mock.

One wire protocol serves translation, back-translation and (optionally)
embeddings. Request body: ``{"model", "messages", "n", "temperature"}``;
response: ``{"choices": [{"message": {"content": ...}}]}``. The mock
backend replays canned responses from a fixture file so the whole
pipeline runs offline and deterministically.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Protocol

import requests

from .exceptions import ConfigError, ProviderError, TransportError

_RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}


class ChatBackend(Protocol):
    def complete(self, request: dict) -> list[str]:
        """Return the choice contents for one chat-completion request."""
        ...


class HttpChatBackend:
    """Client for any chat-completion-compatible HTTP endpoint."""

    def __init__(self, endpoint_url: str, *, api_key: str | None = None,
                 timeout: float = 120.0, session: requests.Session | None = None):
        self.endpoint_url = endpoint_url
        self._timeout = timeout
        self._session = session or requests.Session()
        self._headers = {"Content-Type": "application/json"}
        if api_key:
            self._headers["Authorization"] = f"Bearer {api_key}"

    def complete(self, request: dict) -> list[str]:
        try:
            resp = self._session.post(self.endpoint_url, json=request,
                                      headers=self._headers,
                                      timeout=self._timeout)
        except requests.RequestException as e:
            raise TransportError(f"request failed: {e}") from e
        if resp.status_code in _RETRYABLE_STATUS:
            raise TransportError(f"HTTP {resp.status_code} from provider")
        if resp.status_code != 200:
            raise ProviderError(f"provider refused with HTTP {resp.status_code}",
                                payload=resp.text)
        try:
            body = resp.json()
            return [c["message"]["content"] for c in body["choices"]]
        except (ValueError, KeyError, TypeError) as e:
            raise ProviderError(f"malformed provider response: {e}",
                                payload=resp.text) from e


def _last_user_content(messages: list[dict]) -> str:
    for msg in reversed(messages):
        if msg.get("role") == "user":
            return msg.get("content", "")
    return ""


class MockChatBackend:
    """Deterministic backend replaying canned responses.

    The fixture maps request fingerprints (the last user message) to
    responses:

    - ``backtranslations``: exact-match dictionary, tried first;
    - ``rules``: ordered list, each with ``equals`` or ``contains``
      matching plus either ``choices`` (a canned n-best list) or
      ``"mode": "echo"``;
    - ``default``: ``"echo"`` to return the input text unchanged when
      nothing matches, otherwise unmatched requests are refused.
    """

    def __init__(self, rules: list[dict] | None = None,
                 backtranslations: dict[str, str] | None = None,
                 default: str | None = None):
        self.rules = rules or []
        self.backtranslations = backtranslations or {}
        self.default = default
        for i, rule in enumerate(self.rules):
            if "choices" not in rule and rule.get("mode") != "echo":
                raise ConfigError(f"mock rule {i}: needs 'choices' or mode 'echo'")
            if "equals" not in rule and "contains" not in rule and "mode" not in rule:
                raise ConfigError(f"mock rule {i}: needs 'equals' or 'contains'")

    @classmethod
    def from_file(cls, path: str | Path) -> "MockChatBackend":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read mock fixture {path}: {e}") from e
        return cls(rules=obj.get("rules"),
                   backtranslations=obj.get("backtranslations"),
                   default=obj.get("default"))

    def complete(self, request: dict) -> list[str]:
        content = _last_user_content(request.get("messages", []))
        n = int(request.get("n", 1))
        if content in self.backtranslations:
            return [self.backtranslations[content]]
        for rule in self.rules:
            if "equals" in rule and content != rule["equals"]:
                continue
            if "contains" in rule and rule["contains"] not in content:
                continue
            if rule.get("mode") == "echo":
                return [content] * n
            return list(rule["choices"])
        if self.default == "echo":
            return [content] * n
        raise ProviderError("no canned response matches the request",
                            payload={"last_user": content})


class RateLimiter:
    """Token bucket limiting requests per minute; thread-safe."""

    def __init__(self, requests_per_minute: float | None,
                 clock=time.monotonic, sleep=time.sleep):
        self._rpm = requests_per_minute
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        if requests_per_minute:
            self._capacity = max(1.0, requests_per_minute / 60.0)
            self._tokens = self._capacity
            self._last = clock()

    def acquire(self) -> None:
        if not self._rpm:
            return
        rate = self._rpm / 60.0
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self._capacity,
                                   self._tokens + (now - self._last) * rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / rate
            self._sleep(wait)


@dataclass
class AuditLog:
    """Append-only JSONL log of every backend call, for cost accounting
    and reproducibility. One line per event, with UTC timestamps."""

    path: Path

    def __post_init__(self):
        self.path = Path(self.path)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(
            {"ts": datetime.now(timezone.utc).isoformat(), **record},
            ensure_ascii=False, sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def entries(self) -> list[dict]:
        if not self.path.exists():
            return []
        return [json.loads(line) for line
                in self.path.read_text(encoding="utf-8").splitlines() if line]
