"""Training-sequence generation and exact-match P/R/F1 scoring for the
two information-extraction tasks.

Entity detection targets echo the input with ``[CL]...[/CL]`` markers
around each clinical entity; entities that cross (partially overlap)
another entity use ID-suffixed markers ``[CL#k]`` so the pairing stays
unambiguous. Relation extraction targets list the test-result pairs as
``[REL] <result text> [TO] <test text>`` items joined by ``" ; "``,
ordered by result offset. The grammar is versioned here; parsers are
tolerant of malformed model output.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Hashable, Sequence

from .exceptions import RejectedInput
from .model import Category, Document, RelationType, Span, validate_document
from .segmentation import merge_to_cover, sentence_spans

_MARKER_RE = re.compile(r"\[(/?)CL(?:#(\d+))?\]")
_REL_ITEM_RE = re.compile(r"^\[REL\]\s*(.*?)\s*\[TO\]\s*(.*)$", re.DOTALL)
_WS_RE = re.compile(r"\s+")


class Task(str, Enum):
    ENTITY = "entity"
    RELATION = "relation"


@dataclass(frozen=True)
class TrainingPair:
    """One text-to-text training example with provenance."""

    task: Task
    input: str
    target: str
    doc_id: str
    span: Span  # segment of the source text the pair was generated from

    def to_json_dict(self) -> dict:
        return {"task": self.task.value, "input": self.input,
                "target": self.target, "doc_id": self.doc_id}


@dataclass(frozen=True)
class PRF:
    """Precision/recall/F1 with the usual zero-denominator conventions."""

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        if tp + fp == 0:
            precision = 1.0 if fn == 0 else 0.0
        else:
            precision = tp / (tp + fp)
        if tp + fn == 0:
            recall = 1.0 if fp == 0 else 0.0
        else:
            recall = tp / (tp + fn)
        if precision + recall == 0.0:
            f1 = 0.0
        else:
            f1 = 2 * precision * recall / (precision + recall)
        return cls(precision, recall, f1, tp, fp, fn)

    def to_json_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "f1": self.f1, "tp": self.tp, "fp": self.fp, "fn": self.fn}


def normalize_phrase(text: str) -> str:
    return _WS_RE.sub(" ", text.strip())


def _segments(doc: Document, cover: list[Span], unit: str) -> list[Span]:
    if unit == "document":
        return [Span(0, len(doc.text))] if doc.text else []
    if unit != "sentence":
        raise RejectedInput(f"unknown unit {unit!r}")
    sentences = sentence_spans(doc.text)
    return merge_to_cover(sentences, cover)


def _contains(outer: Span, inner: Span) -> bool:
    return inner.begin >= outer.begin and inner.end <= outer.end


def _crossing(a: Span, b: Span) -> bool:
    return (a.begin < b.begin < a.end < b.end
            or b.begin < a.begin < b.end < a.end)


def _mark_entities(text: str, entities: list[tuple[str, Span]]) -> str:
    """Insert entity markers into ``text`` (spans are text-local).

    Tag order at equal offsets mirrors the inline codec: closers first
    (most recently opened closes first), then openers (longer spans
    first, ties by id). Crossing entities get ``#k`` suffixes assigned in
    ``(begin, end, id)`` order.
    """
    crossing_ids = set()
    for i, (id_a, span_a) in enumerate(entities):
        for id_b, span_b in entities[i + 1:]:
            if _crossing(span_a, span_b):
                crossing_ids.update((id_a, id_b))
    suffix = {
        ent_id: k
        for k, (ent_id, _) in enumerate(
            sorted(((e, s) for e, s in entities if e in crossing_ids),
                   key=lambda item: (item[1].begin, item[1].end, item[0])),
            start=1)
    }

    open_order = sorted(entities, key=lambda e: (e[1].begin, -e[1].end, e[0]))
    rank = {ent_id: i for i, (ent_id, _) in enumerate(open_order)}
    events = []
    for ent_id, span in entities:
        tag = f"#{suffix[ent_id]}" if ent_id in suffix else ""
        events.append((span.begin, 1, rank[ent_id], f"[CL{tag}]"))
        events.append((span.end, 0, -rank[ent_id], f"[/CL{tag}]"))
    events.sort(key=lambda e: e[:3])

    parts = []
    cursor = 0
    for pos, _, _, marker in events:
        parts.append(text[cursor:pos])
        parts.append(marker)
        cursor = pos
    parts.append(text[cursor:])
    return "".join(parts)


def make_training_sequences(doc: Document, task: Task,
                            *, unit: str = "sentence") -> list[TrainingPair]:
    """Generate text-to-text pairs for one document.

    Sentence segments are merged so no relevant annotation (for RELATION:
    neither endpoint pair) crosses a segment boundary. Deterministic.
    """
    violations = validate_document(doc)
    if violations:
        raise RejectedInput(f"invalid document {doc.doc_id}: {violations[0]}")
    by_id = doc.annotation_map()

    if task is Task.ENTITY:
        entities = [(a.id, a.span) for a in doc.annotations
                    if a.category is Category.CLINICAL_ENTITY
                    and a.span is not None]
        segments = _segments(doc, [s for _, s in entities], unit)
        pairs = []
        for seg in segments:
            local = [(ent_id, Span(s.begin - seg.begin, s.end - seg.begin))
                     for ent_id, s in entities if _contains(seg, s)]
            text = doc.text[seg.begin:seg.end]
            pairs.append(TrainingPair(task=task, input=text,
                                      target=_mark_entities(text, local),
                                      doc_id=doc.doc_id, span=seg))
        return pairs

    rels = []
    for r in doc.relations:
        if r.rel_type is not RelationType.PERTAINS_TO:
            continue
        src = by_id.get(r.source)
        tgt = by_id.get(r.target)
        if src is None or tgt is None or src.span is None or tgt.span is None:
            continue
        rels.append((src.span, tgt.span))
    cover = [Span(min(a.begin, b.begin), max(a.end, b.end)) for a, b in rels]
    segments = _segments(doc, cover, unit)
    pairs = []
    for seg in segments:
        items = sorted(
            ((a, b) for a, b in rels if _contains(seg, a) and _contains(seg, b)),
            key=lambda ab: (ab[0].begin, ab[0].end, ab[1].begin, ab[1].end))
        target = " ; ".join(
            f"[REL] {normalize_phrase(doc.text[a.begin:a.end])} "
            f"[TO] {normalize_phrase(doc.text[b.begin:b.end])}"
            for a, b in items)
        pairs.append(TrainingPair(task=task, input=doc.text[seg.begin:seg.end],
                                  target=target, doc_id=doc.doc_id, span=seg))
    return pairs


@dataclass(frozen=True)
class EntityParse:
    """Predicted entity spans plus marked strings that could not be
    aligned to the input (always false positives)."""

    spans: tuple[Span, ...]
    unaligned: tuple[str, ...]


def parse_entity_output(input_text: str, generated: str) -> EntityParse:
    """Recover predicted spans from generated marker text.

    Suffixed markers pair by suffix, plain markers pair by nesting
    (last-opened closes first); unmatched markers stay literal text. Each
    marked surface string aligns to the input by greedy leftmost search
    starting after the previous match's start.
    """
    tokens = list(_MARKER_RE.finditer(generated))
    matched: dict[int, int] = {}  # open token index -> close token index

    plain_stack: list[int] = []
    suffixed_open: dict[str, list[int]] = {}
    for i, m in enumerate(tokens):
        is_close = m.group(1) == "/"
        suffix = m.group(2)
        if suffix is None:
            if not is_close:
                plain_stack.append(i)
            elif plain_stack:
                matched[plain_stack.pop()] = i
        else:
            if not is_close:
                suffixed_open.setdefault(suffix, []).append(i)
            else:
                opens = suffixed_open.get(suffix)
                if opens:
                    matched[opens.pop(0)] = i

    drop = set(matched) | set(matched.values())
    parts = []
    positions = {}  # token index -> plain position
    cursor = 0
    plain_len = 0
    for i, m in enumerate(tokens):
        chunk = generated[cursor:m.start()]
        parts.append(chunk)
        plain_len += len(chunk)
        positions[i] = plain_len
        if i not in drop:  # unmatched marker stays literal
            parts.append(m.group(0))
            plain_len += len(m.group(0))
        cursor = m.end()
    parts.append(generated[cursor:])
    plain = "".join(parts)

    surfaces = [plain[positions[o]:positions[c]]
                for o, c in sorted(matched.items())]

    spans: list[Span] = []
    unaligned: list[str] = []
    search_from = 0
    for surface in surfaces:
        if not surface:
            unaligned.append(surface)
            continue
        pos = input_text.find(surface, search_from)
        if pos < 0:
            unaligned.append(surface)
            continue
        spans.append(Span(pos, pos + len(surface)))
        search_from = pos + 1
    return EntityParse(tuple(spans), tuple(unaligned))


@dataclass(frozen=True)
class RelationParse:
    """Predicted (result text, test text) pairs; malformed items are
    dropped and counted."""

    pairs: tuple[tuple[str, str], ...]
    malformed: int = 0


def parse_relation_output(generated: str) -> RelationParse:
    pairs = []
    malformed = 0
    for item in generated.split(" ; "):
        item = item.strip()
        if not item:
            continue
        m = _REL_ITEM_RE.match(item)
        if not m:
            malformed += 1
            continue
        result, test = normalize_phrase(m.group(1)), normalize_phrase(m.group(2))
        if not result or not test:
            malformed += 1
            continue
        pairs.append((result, test))
    return RelationParse(tuple(pairs), malformed)


def _multiset_score(gold: Sequence[Hashable], pred: Sequence[Hashable],
                    extra_fp: int = 0) -> PRF:
    tp = sum((Counter(gold) & Counter(pred)).values())
    return PRF.from_counts(tp, len(pred) - tp + extra_fp, len(gold) - tp)


def score_entities(gold: Sequence[Span],
                   pred: EntityParse | Sequence[Span],
                   *, unaligned: int = 0) -> PRF:
    """Exact-match span scoring with multiset semantics: duplicates
    consume matches one-for-one; unalignable predictions count as false
    positives."""
    if isinstance(pred, EntityParse):
        unaligned += len(pred.unaligned)
        pred = pred.spans
    return _multiset_score([(s.begin, s.end) for s in gold],
                           [(s.begin, s.end) for s in pred], unaligned)


def score_relations(gold: Sequence[tuple[str, str]],
                    pred: RelationParse | Sequence[tuple[str, str]]) -> PRF:
    """Exact-match scoring of whitespace-normalized, case-sensitive
    (result, test) string pairs."""
    if isinstance(pred, RelationParse):
        pred = pred.pairs
    norm = lambda pair: (normalize_phrase(pair[0]), normalize_phrase(pair[1]))
    return _multiset_score([norm(p) for p in gold], [norm(p) for p in pred])


def score_relations_offsets(gold: Sequence[tuple[Span, Span]],
                            pred: Sequence[tuple[Span, Span]]) -> PRF:
    """Offset-based relation scoring, for predictions that carry spans."""
    key = lambda pair: (pair[0].begin, pair[0].end, pair[1].begin, pair[1].end)
    return _multiset_score([key(p) for p in gold], [key(p) for p in pred])


def _jaccard(a: Span, b: Span) -> float:
    inter = min(a.end, b.end) - max(a.begin, b.begin)
    if inter <= 0:
        return 0.0
    union = max(a.end, b.end) - min(a.begin, b.begin)
    return inter / union


def score_entities_overlap(gold: Sequence[Span], pred: Sequence[Span],
                           *, threshold: float = 0.5,
                           unaligned: int = 0) -> PRF:
    """Relaxed scoring: greedy one-to-one matching of span pairs with
    character Jaccard >= threshold. Not used by the acceptance suite."""
    candidates = sorted(
        ((i, j, _jaccard(g, p)) for i, g in enumerate(gold)
         for j, p in enumerate(pred) if _jaccard(g, p) >= threshold),
        key=lambda t: (-t[2], t[0], t[1]))
    used_gold: set[int] = set()
    used_pred: set[int] = set()
    tp = 0
    for i, j, _ in candidates:
        if i in used_gold or j in used_pred:
            continue
        used_gold.add(i)
        used_pred.add(j)
        tp += 1
    return PRF.from_counts(tp, len(pred) - tp + unaligned, len(gold) - tp)


def write_training_jsonl(pairs: Sequence[TrainingPair], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_json_dict(), ensure_ascii=False,
                                sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out
