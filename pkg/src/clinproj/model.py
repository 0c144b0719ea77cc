"""Data model for annotated clinical case documents.

A :class:`Document` holds the case text together with span-based
annotations and relations between them. Values are immutable after
construction; every edit produces a new value (use ``dataclasses.replace``).
Offsets are Unicode scalar values (Python string indices); code-unit
conversions happen at the XMI boundary only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class Category(str, Enum):
    """Closed set of span annotation categories."""

    CLINICAL_ENTITY = "CLINICAL_ENTITY"
    BODYPART = "BODYPART"
    RML = "RML"
    ACTOR = "ACTOR"
    EVENT = "EVENT"
    TIMEX3 = "TIMEX3"


class Status(str, Enum):
    """Projection status of an annotation.

    MISSING annotations exist only as metadata awaiting human placement:
    they carry no span and must reference the source annotation they were
    projected from.
    """

    OK = "OK"
    MISMATCH_CANDIDATE = "MISMATCH_CANDIDATE"
    MISSING = "MISSING"


class RelationType(str, Enum):
    """Closed set of relation types."""

    PERTAINS_TO = "PERTAINS_TO"
    TLINK = "TLINK"
    ALINK = "ALINK"


@dataclass(frozen=True, order=True)
class Span:
    """Half-open character range ``[begin, end)`` in scalar offsets."""

    begin: int
    end: int

    def __len__(self) -> int:
        return self.end - self.begin


_ID_RE = re.compile(r"^[A-Za-z0-9]+$")
_LANG_RE = re.compile(r"^[a-z]{2}$")


@dataclass(frozen=True)
class Annotation:
    """One identified span with category, opaque attributes and status.

    ``attributes`` is an ordered string map; insertion order is preserved
    into serialized output. Only ``discontinuous`` and the projection
    status carry semantics here; everything else is carried opaquely.
    """

    id: str
    category: Category
    span: Span | None
    attributes: dict[str, str] = field(default_factory=dict)
    status: Status = Status.OK
    source_id: str | None = None

    def surface(self, text: str) -> str:
        """Return the annotated substring of ``text``."""
        if self.span is None:
            raise ValueError(f"annotation {self.id} has no span")
        return text[self.span.begin:self.span.end]


@dataclass(frozen=True)
class Relation:
    """Directed relation between two annotations of the same document."""

    id: str
    rel_type: RelationType
    source: str
    target: str
    attributes: dict[str, str] = field(default_factory=dict)


def _annotation_sort_key(a: Annotation) -> tuple:
    if a.span is None:
        return (1, 0, 0, a.id)
    return (0, a.span.begin, a.span.end, a.id)


@dataclass(frozen=True)
class Document:
    """One clinical case: text, annotations, relations, optional tokens.

    Annotations and relations are normalized to a canonical order at
    construction (spanned annotations by ``(begin, end, id)``, then
    span-less MISSING rows by id; relations by id; tokens by offset), so
    equal content compares equal and serializers are deterministic.
    """

    doc_id: str
    language: str
    text: str
    annotations: tuple[Annotation, ...] = ()
    relations: tuple[Relation, ...] = ()
    tokens: tuple[Span, ...] | None = None

    def __post_init__(self):
        anns = tuple(sorted(self.annotations, key=_annotation_sort_key))
        rels = tuple(sorted(self.relations, key=lambda r: r.id))
        object.__setattr__(self, "annotations", anns)
        object.__setattr__(self, "relations", rels)
        if self.tokens is not None:
            toks = tuple(sorted(self.tokens, key=lambda s: (s.begin, s.end)))
            object.__setattr__(self, "tokens", toks)

    def annotation_map(self) -> dict[str, Annotation]:
        return {a.id: a for a in self.annotations}


@dataclass(frozen=True)
class Violation:
    """One validity-rule violation, naming the offending entity and rule."""

    entity_id: str
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"{self.entity_id}: {self.rule}: {self.detail}"


def validate_document(doc: Document) -> list[Violation]:
    """Check every model invariant; return [] iff the document is valid.

    Validation never raises: each problem is reported as a
    :class:`Violation` naming the offending annotation/relation id.
    """
    out: list[Violation] = []
    n = len(doc.text)

    if not _LANG_RE.match(doc.language):
        out.append(Violation(doc.doc_id, "document.language",
                             f"not an ISO 639-1 code: {doc.language!r}"))

    seen: set[str] = set()
    for a in doc.annotations:
        if not _ID_RE.match(a.id):
            out.append(Violation(a.id, "annotation.id-format",
                                 "id must be non-empty letters+digits"))
        if a.id in seen:
            out.append(Violation(a.id, "annotation.id-unique",
                                 "duplicate annotation id"))
        seen.add(a.id)
        if a.status is Status.MISSING:
            if a.span is not None:
                out.append(Violation(a.id, "annotation.missing-span",
                                     "MISSING annotation must not carry a span"))
            if not a.source_id:
                out.append(Violation(a.id, "annotation.missing-source",
                                     "MISSING annotation requires source_id"))
        else:
            if a.span is None:
                out.append(Violation(a.id, "annotation.span-required",
                                     f"status {a.status.value} requires a span"))
        if a.span is not None:
            if a.span.begin >= a.span.end:
                out.append(Violation(a.id, "span.order",
                                     f"begin<end violated: ({a.span.begin}, {a.span.end})"))
            elif a.span.begin < 0 or a.span.end > n:
                out.append(Violation(a.id, "span.bounds",
                                     f"({a.span.begin}, {a.span.end}) outside text of length {n}"))

    by_id = {a.id: a for a in doc.annotations}
    rel_seen: set[str] = set()
    for r in doc.relations:
        if r.id in rel_seen:
            out.append(Violation(r.id, "relation.id-unique", "duplicate relation id"))
        rel_seen.add(r.id)
        for end_name, ref in (("source", r.source), ("target", r.target)):
            if ref not in by_id:
                out.append(Violation(r.id, "relation.endpoint",
                                     f"{end_name} references unknown annotation {ref!r}"))
        if r.rel_type is RelationType.PERTAINS_TO:
            src = by_id.get(r.source)
            tgt = by_id.get(r.target)
            if src is not None and src.category is not Category.RML:
                out.append(Violation(r.id, "relation.pertains-to-source",
                                     f"source must be RML, got {src.category.value}"))
            if tgt is not None and tgt.category is not Category.EVENT:
                out.append(Violation(r.id, "relation.pertains-to-target",
                                     f"target must be EVENT, got {tgt.category.value}"))

    if doc.tokens is not None:
        prev_end = 0
        for t in doc.tokens:
            if t.begin >= t.end or t.begin < 0 or t.end > n:
                out.append(Violation(doc.doc_id, "tokens.bounds",
                                     f"token ({t.begin}, {t.end}) invalid for text of length {n}"))
            elif t.begin < prev_end:
                out.append(Violation(doc.doc_id, "tokens.overlap",
                                     f"token ({t.begin}, {t.end}) overlaps previous token"))
            prev_end = max(prev_end, t.end)

    return out
