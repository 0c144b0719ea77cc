"""Corpus statistics, tag-QA report tables and similarity reporting.

Tables are emitted as aligned text and CSV. The QA table follows the
grouping CL / EV / RML / Oth. / TOT for both candidate mismatches and
missing tags; every TOT column equals the sum of its category columns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import sqrt
from pathlib import Path
from typing import TYPE_CHECKING, Protocol, Sequence

import requests

from . import corpusio
from .exceptions import TransportError
from .model import Category, RelationType
from .segmentation import tokenize

if TYPE_CHECKING:
    from .pipeline import ProjectionReport

logger = logging.getLogger(__name__)

_QA_GROUPS = ("CL", "EV", "RML", "Oth.", "TOT")
_GROUP_KEYS = {"CL": "CL", "EV": "EV", "RML": "RML", "Oth.": "Other", "TOT": "TOT"}


def _render_aligned(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(widths[i])
                               for i, c in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _render_csv(headers: list[str], rows: list[list[str]]) -> str:
    import csv
    import io
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


@dataclass
class LanguageStats:
    """Per-language corpus statistics row."""

    language: str
    documents: int = 0
    tokens: int = 0
    annotations: dict[str, int] = field(default_factory=dict)
    relations: dict[str, int] = field(default_factory=dict)


@dataclass
class CorpusStats:
    rows: list[LanguageStats] = field(default_factory=list)

    def _cells(self) -> tuple[list[str], list[list[str]]]:
        headers = (["language", "#docs", "#tokens"]
                   + [c.value for c in Category]
                   + [r.value for r in RelationType])
        rows = []
        for row in self.rows:
            rows.append([row.language, str(row.documents), str(row.tokens)]
                        + [str(row.annotations.get(c.value, 0)) for c in Category]
                        + [str(row.relations.get(r.value, 0)) for r in RelationType])
        return headers, rows

    def to_text(self) -> str:
        return _render_aligned(*self._cells())

    def to_csv(self) -> str:
        return _render_csv(*self._cells())

    def to_json_dict(self) -> dict:
        return {
            "languages": [
                {
                    "language": r.language,
                    "documents": r.documents,
                    "tokens": r.tokens,
                    "annotations": dict(sorted(r.annotations.items())),
                    "relations": dict(sorted(r.relations.items())),
                }
                for r in self.rows
            ]
        }


def corpus_stats(corpus_dir: str | Path) -> CorpusStats:
    """Count documents, tokens (via the rule tokenizer), annotations per
    category and relations per type, grouped by document language.

    Deterministic and permutation-invariant over file order.
    """
    by_language: dict[str, LanguageStats] = {}
    for _, doc in corpusio.read_corpus(corpus_dir):
        row = by_language.setdefault(doc.language, LanguageStats(doc.language))
        row.documents += 1
        row.tokens += len(tokenize(doc.text))
        for a in doc.annotations:
            row.annotations[a.category.value] = (
                row.annotations.get(a.category.value, 0) + 1)
        for r in doc.relations:
            row.relations[r.rel_type.value] = (
                row.relations.get(r.rel_type.value, 0) + 1)
    return CorpusStats(rows=[by_language[k] for k in sorted(by_language)])


def qa_stats(reports: Sequence["ProjectionReport"]) -> "QaStats":
    """Aggregate projection reports into the five-column mismatch/missing
    table grouped CL / EV / RML / Oth. / TOT."""
    rows = []
    for report in reports:
        mismatched = report.totals("mismatched")
        missing = report.totals("missing")
        for counts in (mismatched, missing):
            category_sum = sum(counts[g] for g in ("CL", "EV", "RML", "Other"))
            if counts["TOT"] != category_sum:
                raise ValueError(
                    f"TOT {counts['TOT']} != category sum {category_sum}")
        rows.append((report.target_language, mismatched, missing))
    return QaStats(rows=rows)


@dataclass
class QaStats:
    rows: list[tuple[str, dict[str, int], dict[str, int]]] = field(
        default_factory=list)

    def _cells(self) -> tuple[list[str], list[list[str]]]:
        headers = (["language"]
                   + [f"mismatched {g}" for g in _QA_GROUPS]
                   + [f"missing {g}" for g in _QA_GROUPS])
        rows = []
        for language, mismatched, missing in self.rows:
            rows.append([language]
                        + [str(mismatched[_GROUP_KEYS[g]]) for g in _QA_GROUPS]
                        + [str(missing[_GROUP_KEYS[g]]) for g in _QA_GROUPS])
        return headers, rows

    def to_text(self) -> str:
        return _render_aligned(*self._cells())

    def to_csv(self) -> str:
        return _render_csv(*self._cells())


def render_qa_table(reports: Sequence["ProjectionReport"]) -> str:
    return qa_stats(reports).to_text()


class EmbeddingBackend(Protocol):
    def embed(self, texts: list[str]) -> list[list[float]]:
        ...


class HttpEmbeddingBackend:
    """Client for the embedding wire protocol:
    POST ``{"texts": [...]}`` -> ``{"vectors": [[...]]}``."""

    def __init__(self, endpoint_url: str, *, timeout: float = 60.0,
                 session: requests.Session | None = None):
        self.endpoint_url = endpoint_url
        self._timeout = timeout
        self._session = session or requests.Session()

    def embed(self, texts: list[str]) -> list[list[float]]:
        try:
            resp = self._session.post(self.endpoint_url, json={"texts": texts},
                                      timeout=self._timeout)
            resp.raise_for_status()
            return resp.json()["vectors"]
        except (requests.RequestException, KeyError, ValueError) as e:
            raise TransportError(f"embedding endpoint failed: {e}") from e


class MockEmbeddingBackend:
    """Maps texts to fixed vectors; unknown texts raise."""

    def __init__(self, vectors: dict[str, list[float]]):
        self.vectors = vectors

    def embed(self, texts: list[str]) -> list[list[float]]:
        try:
            return [list(self.vectors[t]) for t in texts]
        except KeyError as e:
            raise TransportError(f"no mock vector for {e}") from e


def _cosine(a: list[float], b: list[float]) -> float:
    norm_a = sqrt(sum(x * x for x in a))
    norm_b = sqrt(sum(x * x for x in b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (norm_a * norm_b)


@dataclass
class SimilarityReport:
    """Mean cosine similarity between source texts and back-translations.

    Reporting only; never consumed by re-ranking. ``available`` is False
    when the embedding endpoint failed.
    """

    available: bool
    mean: float | None = None
    similarities: list[float] = field(default_factory=list)
    error: str | None = None


def similarity_report(pairs: Sequence[tuple[str, str]],
                      backend: EmbeddingBackend) -> SimilarityReport:
    if not pairs:
        return SimilarityReport(available=True, mean=None)
    texts = [t for pair in pairs for t in pair]
    try:
        vectors = backend.embed(texts)
    except TransportError as e:
        logger.warning("similarity report unavailable: %s", e)
        return SimilarityReport(available=False, error=str(e))
    sims = [_cosine(vectors[2 * i], vectors[2 * i + 1])
            for i in range(len(pairs))]
    return SimilarityReport(available=True, mean=sum(sims) / len(sims),
                            similarities=sims)
