"""Standoff XMI codec (reduced UIMA-CAS-style subset).

The supported subset is documented in the README ("File formats"): an
``xmi:XMI`` root holding one ``cas:Sofa`` with the text in ``sofaString``,
one ``anno:DocumentMetadata`` row, optional ``anno:Token`` rows, one
element per annotation named after its category (``anno:ClinicalEntity``,
``anno:Rml``, ...), and one element per relation (``anno:PertainsTo``,
``anno:TLink``, ``anno:ALink``).

Offsets in the files are UTF-16 code units (UIMA convention) and are
converted to Unicode scalar offsets on import, back on export. Domain
attributes are serialized with an ``f_`` prefix; unknown bare attributes
on import are carried opaquely into the attribute map. Unsupported
elements are logged and skipped.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from bisect import bisect_left

from .exceptions import CodecError, RejectedInput
from .model import (Annotation, Category, Document, Relation, RelationType,
                    Span, Status, validate_document)

logger = logging.getLogger(__name__)

XMI_NS = "http://www.omg.org/XMI"
CAS_NS = "http:///uima/cas.ecore"
ANNO_NS = "http:///clinproj/annotations.ecore"

_CATEGORY_ELEMENTS = {
    Category.CLINICAL_ENTITY: "ClinicalEntity",
    Category.BODYPART: "BodyPart",
    Category.RML: "Rml",
    Category.ACTOR: "Actor",
    Category.EVENT: "Event",
    Category.TIMEX3: "Timex3",
}
_RELATION_ELEMENTS = {
    RelationType.PERTAINS_TO: "PertainsTo",
    RelationType.TLINK: "TLink",
    RelationType.ALINK: "ALink",
}

# Import aliases, keyed by the local element name with non-alphanumerics
# dropped and uppercased. CLINENTITY is the layer name used by E3C releases.
_CATEGORY_ALIASES = {"CLINENTITY": Category.CLINICAL_ENTITY}
_CATEGORY_ALIASES.update(
    {name.upper(): cat for cat, name in _CATEGORY_ELEMENTS.items()})
_CATEGORY_ALIASES.update({cat.value.replace("_", ""): cat for cat in Category})
_RELATION_ALIASES = {name.upper(): rt for rt, name in _RELATION_ELEMENTS.items()}
_RELATION_ALIASES.update({rt.value.replace("_", ""): rt for rt in RelationType})

_ANNOTATION_ATTRS = {"id", "sofa", "sofaNum", "begin", "end", "status", "sourceId"}
_RELATION_ATTRS = {"id", "source", "target"}
_FEATURE_PREFIX = "f_"
_XML_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
# Characters XML 1.0 cannot represent at all (even escaped).
_XML_INVALID_RE = re.compile(
    "[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff￾￿]")


class Utf16Index:
    """Bidirectional scalar <-> UTF-16 code-unit offset map for one text."""

    def __init__(self, text: str):
        prefix = [0]
        for ch in text:
            prefix.append(prefix[-1] + (2 if ord(ch) > 0xFFFF else 1))
        self._prefix = prefix

    @property
    def utf16_length(self) -> int:
        return self._prefix[-1]

    def to_utf16(self, scalar: int) -> int:
        if not 0 <= scalar < len(self._prefix):
            raise ValueError(f"scalar offset {scalar} out of range")
        return self._prefix[scalar]

    def to_scalar(self, unit: int, context: str) -> int:
        if unit < 0 or unit > self._prefix[-1]:
            raise RejectedInput(
                f"{context}: UTF-16 offset {unit} outside sofa "
                f"of length {self._prefix[-1]}")
        i = bisect_left(self._prefix, unit)
        if self._prefix[i] != unit:
            raise RejectedInput(
                f"{context}: UTF-16 offset {unit} splits a surrogate pair")
        return i


def _require_xml_safe(value: str, context: str) -> None:
    m = _XML_INVALID_RE.search(value)
    if m:
        raise RejectedInput(
            f"{context}: character U+{ord(m.group(0)):04X} cannot be "
            f"represented in XML 1.0")


def _feature_attrs(attributes: dict[str, str], context: str) -> dict[str, str]:
    out = {}
    for key, value in attributes.items():
        if not _XML_NAME_RE.match(key):
            raise RejectedInput(
                f"{context}: attribute name {key!r} is not XML-safe")
        _require_xml_safe(value, context)
        out[_FEATURE_PREFIX + key] = value
    return out


def serialize_standoff_xmi(doc: Document) -> bytes:
    """Serialize to deterministic XMI bytes.

    Element order is fixed: metadata, sofa, tokens, annotations by
    ``(begin, end, id)`` followed by MISSING metadata rows by id, then
    relations by id. ``parse_standoff_xmi(serialize_standoff_xmi(d)) == d``
    for every valid document.
    """
    violations = validate_document(doc)
    if violations:
        raise RejectedInput(f"invalid document {doc.doc_id}: {violations[0]}")
    _require_xml_safe(doc.text, f"document {doc.doc_id} text")

    u16 = Utf16Index(doc.text)
    root = ET.Element("xmi:XMI", {
        "xmlns:xmi": XMI_NS,
        "xmlns:cas": CAS_NS,
        "xmlns:anno": ANNO_NS,
        "xmi:version": "2.0",
    })
    ET.SubElement(root, "cas:NULL", {"xmi:id": "0"})
    meta = {
        "xmi:id": "meta",
        "docId": doc.doc_id,
        "language": doc.language,
    }
    if doc.tokens is not None:
        meta["tokenized"] = "true"
    ET.SubElement(root, "anno:DocumentMetadata", meta)
    ET.SubElement(root, "cas:Sofa", {
        "xmi:id": "1",
        "sofaNum": "1",
        "sofaID": "_InitialView",
        "mimeType": "text",
        "sofaString": doc.text,
    })
    for i, tok in enumerate(doc.tokens or ()):
        ET.SubElement(root, "anno:Token", {
            "xmi:id": f"t{i}",
            "sofa": "1",
            "begin": str(u16.to_utf16(tok.begin)),
            "end": str(u16.to_utf16(tok.end)),
        })
    for a in doc.annotations:  # canonical order: spanned first, then MISSING
        attrs = {"xmi:id": a.id, "sofa": "1"}
        if a.span is not None:
            attrs["begin"] = str(u16.to_utf16(a.span.begin))
            attrs["end"] = str(u16.to_utf16(a.span.end))
        if a.status is not Status.OK:
            attrs["status"] = a.status.value
        if a.source_id is not None:
            attrs["sourceId"] = a.source_id
        attrs.update(_feature_attrs(a.attributes, f"annotation {a.id}"))
        ET.SubElement(root, f"anno:{_CATEGORY_ELEMENTS[a.category]}", attrs)
    for r in doc.relations:
        attrs = {"xmi:id": r.id, "source": r.source, "target": r.target}
        attrs.update(_feature_attrs(r.attributes, f"relation {r.id}"))
        ET.SubElement(root, f"anno:{_RELATION_ELEMENTS[r.rel_type]}", attrs)

    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode")
    return ('<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n").encode("utf-8")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _attrs_by_local(elem: ET.Element) -> dict[str, str]:
    # Attribute document order is preserved by ElementTree.
    return {_local(k): v for k, v in elem.attrib.items()}


def _canon(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]", "", name).upper()


def parse_standoff_xmi(data: bytes, *, doc_id_hint: str | None = None,
                       language_hint: str | None = None) -> Document:
    """Parse XMI bytes into a validated :class:`Document`.

    ``doc_id_hint``/``language_hint`` fill in files that lack a
    ``DocumentMetadata`` row (e.g. foreign exports); recognized category
    and relation element names are matched case-insensitively with the
    E3C layer aliases. Malformed XML raises :class:`CodecError` with
    line/column; a semantically invalid document raises
    :class:`RejectedInput` naming the offending entity.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as e:
        line, column = e.position
        raise CodecError(f"malformed XML at line {line}, column {column}: "
                         f"{e.msg}", line=line, column=column) from e

    text: str | None = None
    doc_id = doc_id_hint
    language = language_hint
    tokenized = False
    token_rows: list[tuple[str, str, str]] = []
    ann_rows: list[tuple[Category, dict[str, str]]] = []
    rel_rows: list[tuple[RelationType, dict[str, str]]] = []

    for elem in root:
        local = _local(elem.tag)
        attrs = _attrs_by_local(elem)
        if local == "NULL":
            continue
        if local == "Sofa":
            text = attrs.get("sofaString", "")
            continue
        if local == "DocumentMetadata":
            doc_id = attrs.get("docId", doc_id)
            language = attrs.get("language", language)
            tokenized = attrs.get("tokenized") == "true"
            continue
        if local == "Token":
            token_rows.append((attrs.get("id", "?"),
                               attrs.get("begin", ""), attrs.get("end", "")))
            tokenized = True
            continue
        canon = _canon(local)
        if canon in _CATEGORY_ALIASES:
            ann_rows.append((_CATEGORY_ALIASES[canon], attrs))
        elif canon in _RELATION_ALIASES:
            rel_rows.append((_RELATION_ALIASES[canon], attrs))
        else:
            logger.warning("skipping unsupported element <%s>", local)

    if text is None:
        raise CodecError("no Sofa element found")
    if doc_id is None or language is None:
        raise CodecError("no DocumentMetadata element and no hints provided")
    u16 = Utf16Index(text)

    def to_span(attrs: dict[str, str], context: str) -> Span:
        try:
            begin = int(attrs["begin"])
            end = int(attrs["end"])
        except (KeyError, ValueError) as e:
            raise CodecError(f"{context}: bad begin/end offsets") from e
        return Span(u16.to_scalar(begin, context), u16.to_scalar(end, context))

    def features(attrs: dict[str, str],
                 reserved: set[str] = _ANNOTATION_ATTRS) -> dict[str, str]:
        out = {}
        for key, value in attrs.items():
            if key in reserved:
                continue
            if key.startswith(_FEATURE_PREFIX):
                out[key[len(_FEATURE_PREFIX):]] = value
            else:
                out[key] = value  # foreign attribute, carried opaquely
        return out

    tokens = None
    if tokenized:
        tokens = tuple(
            to_span({"begin": b, "end": e}, f"token {tid}")
            for tid, b, e in token_rows)

    annotations = []
    for category, attrs in ann_rows:
        ann_id = attrs.get("id", "")
        context = f"annotation {ann_id or '<no id>'}"
        try:
            status = Status(attrs["status"]) if "status" in attrs else Status.OK
        except ValueError:
            raise CodecError(
                f"{context}: unknown status {attrs['status']!r}") from None
        has_offsets = "begin" in attrs or "end" in attrs
        if status is Status.MISSING and has_offsets:
            raise CodecError(f"{context}: MISSING row must not carry offsets")
        if status is not Status.MISSING and not has_offsets:
            raise CodecError(f"{context}: begin/end required")
        span = to_span(attrs, context) if has_offsets else None
        annotations.append(Annotation(
            id=ann_id,
            category=category,
            span=span,
            attributes=features(attrs),
            status=status,
            source_id=attrs.get("sourceId"),
        ))

    relations = []
    for rel_type, attrs in rel_rows:
        relations.append(Relation(
            id=attrs.get("id", ""),
            rel_type=rel_type,
            source=attrs.get("source", ""),
            target=attrs.get("target", ""),
            attributes=features(attrs, _RELATION_ATTRS),
        ))

    doc = Document(doc_id=doc_id, language=language, text=text,
                   annotations=tuple(annotations), relations=tuple(relations),
                   tokens=tokens)
    violations = validate_document(doc)
    if violations:
        raise RejectedInput(f"invalid document {doc.doc_id}: {violations[0]}")
    return doc
