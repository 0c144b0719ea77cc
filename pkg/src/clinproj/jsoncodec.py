"""Canonical JSON codec (lossless interchange format).

Top-level keys: ``doc_id``, ``language``, ``text``, ``annotations[]``,
``relations[]`` and, when the document carries tokens, ``tokens[]`` (pairs
``[begin, end]`` in scalar offsets). Annotation keys: ``id``, ``category``,
``begin``, ``end`` (null for MISSING rows), ``attributes{}``, ``status``,
``source_id``. Output is deterministic: UTF-8, two-space indent, ``\\n``
line ends, structural keys emitted in sorted order; only ``attributes``
objects keep their own insertion order.
"""

from __future__ import annotations

import json

from .exceptions import CodecError, RejectedInput
from .model import (Annotation, Category, Document, Relation, RelationType,
                    Span, Status, validate_document)

_TOP_KEYS = {"annotations", "doc_id", "language", "relations", "text", "tokens"}
_ANN_KEYS = {"attributes", "begin", "category", "end", "id", "source_id", "status"}
_REL_KEYS = {"attributes", "id", "rel_type", "source", "target"}


def serialize_json(doc: Document) -> bytes:
    violations = validate_document(doc)
    if violations:
        raise RejectedInput(f"invalid document {doc.doc_id}: {violations[0]}")
    obj: dict = {
        "annotations": [
            {
                "attributes": dict(a.attributes),
                "begin": a.span.begin if a.span else None,
                "category": a.category.value,
                "end": a.span.end if a.span else None,
                "id": a.id,
                "source_id": a.source_id,
                "status": a.status.value,
            }
            for a in doc.annotations
        ],
        "doc_id": doc.doc_id,
        "language": doc.language,
        "relations": [
            {
                "attributes": dict(r.attributes),
                "id": r.id,
                "rel_type": r.rel_type.value,
                "source": r.source,
                "target": r.target,
            }
            for r in doc.relations
        ],
        "text": doc.text,
    }
    if doc.tokens is not None:
        obj["tokens"] = [[t.begin, t.end] for t in doc.tokens]
    # Structural keys are already in sorted order by construction;
    # sort_keys would also reorder attribute maps, which must keep
    # their insertion order.
    return (json.dumps(obj, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise CodecError(f"{path}: {message}", path=path)


def _string(obj: dict, key: str, path: str, *, optional: bool = False) -> str | None:
    value = obj.get(key)
    if value is None and optional:
        return None
    _expect(isinstance(value, str), f"{path}.{key}",
            "expected a string" if key in obj else "missing required key")
    return value


def parse_json(data: bytes) -> Document:
    """Parse canonical JSON into a validated :class:`Document`.

    Schema violations raise :class:`CodecError` naming the JSON path of
    the offending value (e.g. ``$.annotations[2].begin``).
    """
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CodecError(f"malformed JSON: {e}", path="$") from e
    _expect(isinstance(obj, dict), "$", "expected a JSON object")
    for key in obj:
        _expect(key in _TOP_KEYS, f"$.{key}", "unknown top-level key")

    doc_id = _string(obj, "doc_id", "$")
    language = _string(obj, "language", "$")
    text = _string(obj, "text", "$")

    raw_anns = obj.get("annotations")
    _expect(isinstance(raw_anns, list), "$.annotations", "expected an array")
    annotations = []
    for i, raw in enumerate(raw_anns):
        path = f"$.annotations[{i}]"
        _expect(isinstance(raw, dict), path, "expected an object")
        for key in raw:
            _expect(key in _ANN_KEYS, f"{path}.{key}", "unknown key")
        ann_id = _string(raw, "id", path)
        cat_name = _string(raw, "category", path)
        try:
            category = Category(cat_name)
        except ValueError:
            raise CodecError(f"{path}.category: unknown category {cat_name!r}",
                             path=f"{path}.category") from None
        status_name = _string(raw, "status", path, optional=True) or "OK"
        try:
            status = Status(status_name)
        except ValueError:
            raise CodecError(f"{path}.status: unknown status {status_name!r}",
                             path=f"{path}.status") from None
        begin = raw.get("begin")
        end = raw.get("end")
        span = None
        if begin is not None or end is not None:
            _expect(isinstance(begin, int) and isinstance(end, int),
                    f"{path}.begin", "begin/end must both be integers")
            span = Span(begin, end)
        attributes = raw.get("attributes", {})
        _expect(isinstance(attributes, dict)
                and all(isinstance(k, str) and isinstance(v, str)
                        for k, v in attributes.items()),
                f"{path}.attributes", "expected a string-to-string object")
        annotations.append(Annotation(
            id=ann_id, category=category, span=span,
            attributes=dict(attributes), status=status,
            source_id=_string(raw, "source_id", path, optional=True)))

    raw_rels = obj.get("relations")
    _expect(isinstance(raw_rels, list), "$.relations", "expected an array")
    relations = []
    for i, raw in enumerate(raw_rels):
        path = f"$.relations[{i}]"
        _expect(isinstance(raw, dict), path, "expected an object")
        for key in raw:
            _expect(key in _REL_KEYS, f"{path}.{key}", "unknown key")
        type_name = _string(raw, "rel_type", path)
        try:
            rel_type = RelationType(type_name)
        except ValueError:
            raise CodecError(f"{path}.rel_type: unknown type {type_name!r}",
                             path=f"{path}.rel_type") from None
        attributes = raw.get("attributes", {})
        _expect(isinstance(attributes, dict)
                and all(isinstance(k, str) and isinstance(v, str)
                        for k, v in attributes.items()),
                f"{path}.attributes", "expected a string-to-string object")
        relations.append(Relation(
            id=_string(raw, "id", path), rel_type=rel_type,
            source=_string(raw, "source", path),
            target=_string(raw, "target", path),
            attributes=dict(attributes)))

    tokens = None
    if "tokens" in obj:
        raw_tokens = obj["tokens"]
        _expect(isinstance(raw_tokens, list), "$.tokens", "expected an array")
        tokens = []
        for i, pair in enumerate(raw_tokens):
            _expect(isinstance(pair, list) and len(pair) == 2
                    and all(isinstance(x, int) for x in pair),
                    f"$.tokens[{i}]", "expected a [begin, end] pair")
            tokens.append(Span(pair[0], pair[1]))
        tokens = tuple(tokens)

    doc = Document(doc_id=doc_id, language=language, text=text,
                   annotations=tuple(annotations), relations=tuple(relations),
                   tokens=tokens)
    violations = validate_document(doc)
    if violations:
        raise RejectedInput(f"invalid document {doc.doc_id}: {violations[0]}")
    return doc
