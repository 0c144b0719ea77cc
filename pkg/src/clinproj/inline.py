"""Inline tagged-text codec.

Standoff annotations are rendered as ``<ID>``/``</ID>`` tag pairs embedded
in the text so a chat model can translate text and tags together. Tags are
matched by unique ID, never by nesting depth, so crossing (overlapping,
non-nested) spans are representable:

    text "ab cd ef" with A1=(0,5), B1=(3,8)  ->  "<A1>ab <B1>cd</A1> ef</B1>"

``parse_inline`` is total: model output is never trusted, malformed tags
degrade into ``orphans`` instead of errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .exceptions import RejectedInput
from .model import Document, Span, Status, validate_document

TAG_RE = re.compile(r"<(/?)([A-Za-z0-9]+)>")


@dataclass(frozen=True)
class InlineDoc:
    """Plain text interleaved with uniquely-ID'd opening/closing tags."""

    tagged_text: str


@dataclass(frozen=True)
class ParsedInline:
    """Result of scanning tagged text.

    ``spans`` holds one valid span per well-paired tag ID, measured over
    ``plain_text`` (all tags stripped). IDs whose tags were absent,
    repeated, inverted, or empty end up in ``orphans``.
    """

    plain_text: str
    spans: dict[str, Span] = field(default_factory=dict)
    orphans: tuple[str, ...] = ()


def strip_tags(tagged: str) -> str:
    """Remove every well-formed tag token, keeping all other text."""
    return TAG_RE.sub("", tagged)


def to_inline(doc: Document) -> InlineDoc:
    """Render a fully-OK document as inline tagged text.

    Tag order at equal offsets is fully specified so output is
    deterministic: closing tags precede opening tags; among closing tags
    the one whose opener appeared later closes first; among opening tags
    longer spans open first; remaining ties break by ascending ID.

    Raises :class:`RejectedInput` if the document is invalid, contains a
    non-OK annotation, or its text already contains tag-shaped substrings
    (the format has no escaping).
    """
    violations = validate_document(doc)
    if violations:
        raise RejectedInput(f"invalid document {doc.doc_id}: {violations[0]}")
    for a in doc.annotations:
        if a.status is not Status.OK:
            raise RejectedInput(
                f"annotation {a.id} has status {a.status.value}; only OK "
                f"annotations can be rendered inline")
    collision = TAG_RE.search(doc.text)
    if collision:
        raise RejectedInput(
            f"document {doc.doc_id} text contains a tag-shaped substring "
            f"{collision.group(0)!r} at offset {collision.start()}")

    # Opening order: position, then longer spans first, then id.
    open_order = sorted(doc.annotations,
                        key=lambda a: (a.span.begin, -a.span.end, a.id))
    open_rank = {a.id: i for i, a in enumerate(open_order)}

    # Events: (position, close-before-open, subkey). Closers at one
    # position sort by descending opener rank (last opened closes first).
    events = []
    for a in doc.annotations:
        events.append((a.span.begin, 1, open_rank[a.id], f"<{a.id}>"))
        events.append((a.span.end, 0, -open_rank[a.id], f"</{a.id}>"))
    events.sort(key=lambda e: e[:3])

    parts = []
    cursor = 0
    for pos, _, _, tag in events:
        parts.append(doc.text[cursor:pos])
        parts.append(tag)
        cursor = pos
    parts.append(doc.text[cursor:])
    return InlineDoc("".join(parts))


def parse_inline(tagged: str) -> ParsedInline:
    """Scan tagged text into plain text, spans, and orphans.

    Total function: any ``<...>`` sequence matching the tag grammar is
    treated as a tag and stripped; everything else stays literal text. An
    ID maps to a span only when it has exactly one opening and one closing
    tag, in that order, enclosing at least one character. Any other
    configuration makes the ID an orphan.
    """
    parts = []
    plain_len = 0
    # id -> list of (sequence index, is_close, plain position)
    occurrences: dict[str, list[tuple[int, bool, int]]] = {}
    cursor = 0
    seq = 0
    for m in TAG_RE.finditer(tagged):
        chunk = tagged[cursor:m.start()]
        parts.append(chunk)
        plain_len += len(chunk)
        occurrences.setdefault(m.group(2), []).append(
            (seq, m.group(1) == "/", plain_len))
        seq += 1
        cursor = m.end()
    parts.append(tagged[cursor:])
    plain_text = "".join(parts)

    spans: dict[str, Span] = {}
    orphans: list[str] = []
    for tag_id, occ in occurrences.items():
        opens = [(s, p) for s, is_close, p in occ if not is_close]
        closes = [(s, p) for s, is_close, p in occ if is_close]
        if (len(opens) == 1 and len(closes) == 1
                and opens[0][0] < closes[0][0]
                and opens[0][1] < closes[0][1]):
            spans[tag_id] = Span(opens[0][1], closes[0][1])
        else:
            orphans.append(tag_id)
    return ParsedInline(plain_text, spans, tuple(orphans))
