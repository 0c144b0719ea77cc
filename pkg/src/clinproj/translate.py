"""Few-shot prompt construction and the n-best translation client.

The projection prompt is one instruction message stating the
tag-preservation contract, the exemplar pairs as alternating
user/assistant turns, and the tagged input as the final user message.
The shipped instruction wording and exemplar set live in a versioned
prompt file (``data/exemplars/default.json``) and can be swapped per
target language.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .backend import AuditLog, ChatBackend, RateLimiter
from .exceptions import ConfigError, ProviderError, RejectedInput, TransportError
from .inline import parse_inline

logger = logging.getLogger(__name__)

LANGUAGE_NAMES = {
    "en": "English", "it": "Italian", "el": "Greek", "pl": "Polish",
    "sk": "Slovak", "sl": "Slovenian", "es": "Spanish", "fr": "French",
    "eu": "Basque", "de": "German",
}

BACKTRANSLATE_INSTRUCTION = (
    "Translate the following text into {language}. "
    "Reply with the translation only, without tags or comments.")


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)


@dataclass(frozen=True)
class PromptSpec:
    """Everything needed to build one projection prompt."""

    instruction: str
    exemplars: tuple[tuple[str, str], ...]
    input: str
    target_language: str


@dataclass(frozen=True)
class CandidateTranslation:
    """One n-best candidate, in provider order."""

    index: int
    tagged_text: str


@dataclass(frozen=True)
class ExemplarSet:
    """Versioned instruction plus tagged source/target exemplar pairs."""

    version: str
    instruction: str
    pairs: tuple[tuple[str, str], ...]

    @classmethod
    def from_file(cls, path: str | Path) -> "ExemplarSet":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read exemplar file {path}: {e}") from e
        pairs = []
        for i, raw in enumerate(obj.get("exemplars", [])):
            source, target = raw.get("source", ""), raw.get("target", "")
            src = parse_inline(source)
            tgt = parse_inline(target)
            if src.orphans or tgt.orphans:
                raise ConfigError(f"exemplar {i}: malformed tags")
            if set(src.spans) != set(tgt.spans):
                raise ConfigError(f"exemplar {i}: tag-ID sets differ between "
                                  f"source and target")
            pairs.append((source, target))
        if not pairs:
            raise ConfigError(f"exemplar file {path} has no exemplars")
        return cls(version=str(obj.get("version", "0")),
                   instruction=obj["instruction"], pairs=tuple(pairs))

    @classmethod
    def bundled_default(cls) -> "ExemplarSet":
        ref = resources.files("clinproj").joinpath("data/exemplars/default.json")
        with resources.as_file(ref) as path:
            return cls.from_file(path)


def build_prompt(spec: PromptSpec) -> list[dict]:
    """Build the ordered role-tagged message list for one projection.

    Deterministic: byte-identical messages for identical specs. The
    instruction's ``{target_language}`` placeholder is replaced with the
    language name; an instruction without the placeholder gets a target
    language line appended.
    """
    if not spec.exemplars:
        raise RejectedInput("at least one exemplar pair is required")
    parsed = parse_inline(spec.input)
    if parsed.orphans:
        raise RejectedInput(
            f"input contains orphaned tags: {', '.join(parsed.orphans)}")

    name = language_name(spec.target_language)
    if "{target_language}" in spec.instruction:
        instruction = spec.instruction.replace("{target_language}", name)
    else:
        instruction = spec.instruction + f"\nTarget language: {name}."

    messages = [{"role": "system", "content": instruction}]
    for source, target in spec.exemplars:
        messages.append({"role": "user", "content": source})
        messages.append({"role": "assistant", "content": target})
    messages.append({"role": "user", "content": spec.input})
    return messages


class TranslationClient:
    """Retry, rate-limit, audit and cache layer over a :class:`ChatBackend`.

    Safe for concurrent use: the cache and audit log are internally
    synchronized and the rate limiter serializes bursts.
    """

    def __init__(self, backend: ChatBackend, *, model: str = "mock",
                 source_language: str = "en",
                 audit_log: AuditLog | None = None,
                 rate_limiter: RateLimiter | None = None,
                 max_attempts: int = 3, backoff_base: float = 0.5,
                 backoff_cap: float = 8.0,
                 temperature_nbest: float = 0.7,
                 temperature_backtranslate: float = 0.0,
                 sleep=time.sleep):
        if max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        self.backend = backend
        self.model = model
        self.source_language = source_language
        self.audit_log = audit_log
        self.rate_limiter = rate_limiter or RateLimiter(None)
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self.temperature_nbest = temperature_nbest
        self.temperature_backtranslate = temperature_backtranslate
        self._sleep = sleep
        self._cache: dict[tuple[str, str], str] = {}
        self._cache_lock = threading.Lock()

    def _audit(self, record: dict) -> None:
        if self.audit_log is not None:
            self.audit_log.append(record)

    def _call(self, kind: str, request: dict) -> list[str]:
        last_error: TransportError | None = None
        for attempt in range(self.max_attempts):
            self.rate_limiter.acquire()
            try:
                texts = self.backend.complete(request)
            except TransportError as e:
                last_error = e
                self._audit({"kind": kind, "attempt": attempt,
                             "request": request, "error": str(e)})
                if attempt + 1 < self.max_attempts:
                    delay = min(self.backoff_cap,
                                self.backoff_base * (2 ** attempt))
                    self._sleep(delay)
                continue
            except ProviderError as e:
                self._audit({"kind": kind, "attempt": attempt,
                             "request": request, "error": str(e),
                             "payload": e.payload})
                raise
            self._audit({"kind": kind, "attempt": attempt,
                         "request": request, "response": texts})
            return texts
        raise TransportError(
            f"giving up after {self.max_attempts} attempts: {last_error}")

    def translate_nbest(self, messages: list[dict], n: int,
                        *, temperature: float | None = None
                        ) -> list[CandidateTranslation]:
        """Request an n-best list; returns min(n, returned) candidates in
        provider order."""
        if n < 1:
            raise RejectedInput("n must be >= 1")
        request = {
            "model": self.model,
            "messages": messages,
            "n": n,
            "temperature": self.temperature_nbest if temperature is None
                           else temperature,
        }
        texts = self._call("translate", request)
        if len(texts) < n:
            logger.warning("provider returned %d candidates, requested %d",
                           len(texts), n)
        return [CandidateTranslation(i, t) for i, t in enumerate(texts[:n])]

    def backtranslate(self, text: str, *, language: str | None = None) -> str:
        """Plain-text translation back into the source language, cached by
        (text, language) within this client's lifetime."""
        if not text.strip():
            raise RejectedInput("cannot back-translate empty text")
        language = language or self.source_language
        key = (text, language)
        with self._cache_lock:
            if key in self._cache:
                return self._cache[key]
        request = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": BACKTRANSLATE_INSTRUCTION.format(
                    language=language_name(language))},
                {"role": "user", "content": text},
            ],
            "n": 1,
            "temperature": self.temperature_backtranslate,
        }
        texts = self._call("backtranslate", request)
        if not texts:
            raise ProviderError("provider returned no choices", payload=texts)
        result = texts[0].strip()
        with self._cache_lock:
            self._cache[key] = result
        return result
