"""Journaled decision store for the revision workflow.

State is an append-only JSONL journal folded over the immutable base
corpus: every accepted decision is written (and flushed) to the journal
before it is acknowledged, and a restart replays the journal to recover
the exact state. The last decision per annotation wins; the journal keeps
the full history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from threading import RLock

from .. import corpusio
from ..exceptions import InvalidDecision, JournalError, UnknownAnnotation
from ..model import Annotation, Document, Relation, Span, Status


class Action(str, Enum):
    ACCEPT = "ACCEPT"    # confirm a flagged span as correct
    CORRECT = "CORRECT"  # replace the span with the reviewer's selection
    ADD = "ADD"          # materialize a MISSING annotation at a new span
    REJECT = "REJECT"    # delete the annotation


@dataclass(frozen=True)
class Decision:
    """One human revision action on one annotation."""

    doc_id: str
    ann_id: str
    action: Action
    begin: int | None = None
    end: int | None = None
    note: str | None = None
    reviewer: str = ""
    ts: str = ""

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id, "ann_id": self.ann_id,
            "action": self.action.value, "begin": self.begin, "end": self.end,
            "note": self.note, "reviewer": self.reviewer, "ts": self.ts,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Decision":
        return cls(doc_id=obj["doc_id"], ann_id=obj["ann_id"],
                   action=Action(obj["action"]), begin=obj.get("begin"),
                   end=obj.get("end"), note=obj.get("note"),
                   reviewer=obj.get("reviewer", ""), ts=obj.get("ts", ""))


@dataclass(frozen=True)
class RevisionStats:
    """Revision bookkeeping in the shape of the projection statistics
    tables: mismatch totals/checked/corrected and missing totals/created.

    Identities: corrected <= checked <= total_mismatches;
    error rate = corrected/checked (0 when nothing was checked).
    """

    total_mismatches: int
    checked: int
    corrected: int
    total_missing: int
    created: int

    @property
    def error_rate(self) -> float:
        if self.checked == 0:
            return 0.0
        return self.corrected / self.checked

    @property
    def error_rate_pct(self) -> float:
        """Percentage truncated to one decimal, as reported."""
        return int(self.error_rate * 1000) / 10

    def to_json_dict(self) -> dict:
        return {
            "total_mismatches": self.total_mismatches,
            "checked": self.checked,
            "corrected": self.corrected,
            "error_rate_on_checked": self.error_rate,
            "error_rate_pct": self.error_rate_pct,
            "total_missing": self.total_missing,
            "created": self.created,
        }

    def to_text(self) -> str:
        rows = [
            ("Total mismatches", str(self.total_mismatches)),
            ("Checked mismatches", str(self.checked)),
            ("Corrected mismatches", str(self.corrected)),
            ("Error rate on checked", f"{self.error_rate_pct:.1f}%"),
            ("Total missing", str(self.total_missing)),
            ("Created missing", str(self.created)),
        ]
        width = max(len(label) for label, _ in rows)
        return "".join(f"{label.ljust(width)}  {value}\n"
                       for label, value in rows)


def compute_stats(total_mismatches: int, checked: int, corrected: int,
                  total_missing: int = 0, created: int = 0) -> RevisionStats:
    """Build stats from raw counts (used for table reproduction checks)."""
    return RevisionStats(total_mismatches, checked, corrected,
                         total_missing, created)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class ReviewStore:
    """Decision journal plus on-demand materialization of corrected
    documents. One writer at a time; reads see a consistent snapshot."""

    def __init__(self, corpus: dict[str, tuple[Path, Document]],
                 journal_path: str | Path,
                 sources: dict[str, Document] | None = None):
        self._corpus = corpus
        self._sources = sources or {}
        self._journal_path = Path(journal_path)
        self._effective: dict[tuple[str, str], Decision] = {}
        self._history: list[Decision] = []
        self._lock = RLock()
        self._replay()

    @classmethod
    def open(cls, corpus_dir: str | Path, journal_path: str | Path,
             source_dir: str | Path | None = None) -> "ReviewStore":
        corpus = {}
        for path, doc in corpusio.read_corpus(corpus_dir):
            corpus[doc.doc_id] = (path, doc)
        if not corpus:
            raise JournalError(f"no standoff files found in {corpus_dir}")
        sources = None
        if source_dir is not None:
            sources = {doc.doc_id: doc
                       for _, doc in corpusio.read_corpus(source_dir)}
        return cls(corpus, journal_path, sources)

    def _replay(self) -> None:
        if not self._journal_path.exists():
            return
        text = self._journal_path.read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                decision = Decision.from_json_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise JournalError(
                    f"{self._journal_path}:{lineno}: malformed journal line: {e}"
                ) from e
            self._validate(decision)
            self._history.append(decision)
            self._effective[(decision.doc_id, decision.ann_id)] = decision

    def _base(self, doc_id: str) -> Document:
        try:
            return self._corpus[doc_id][1]
        except KeyError:
            raise UnknownAnnotation(f"unknown document {doc_id}") from None

    def _validate(self, decision: Decision) -> None:
        doc = self._base(decision.doc_id)
        ann = doc.annotation_map().get(decision.ann_id)
        if ann is None:
            raise UnknownAnnotation(
                f"unknown annotation {decision.ann_id} in {decision.doc_id}")
        action = decision.action
        if action is Action.ACCEPT and ann.status is not Status.MISMATCH_CANDIDATE:
            raise InvalidDecision(
                f"ACCEPT applies to MISMATCH_CANDIDATE items, "
                f"{decision.ann_id} is {ann.status.value}")
        if action is Action.ADD and ann.status is not Status.MISSING:
            raise InvalidDecision(
                f"ADD applies to MISSING items, {decision.ann_id} is "
                f"{ann.status.value}")
        if action is Action.CORRECT and ann.status is Status.MISSING:
            raise InvalidDecision(
                f"CORRECT needs an existing span; use ADD for MISSING "
                f"item {decision.ann_id}")
        if action in (Action.CORRECT, Action.ADD):
            if decision.begin is None or decision.end is None:
                raise InvalidDecision(f"{action.value} requires begin and end")
            if not (0 <= decision.begin < decision.end <= len(doc.text)):
                raise InvalidDecision(
                    f"span ({decision.begin}, {decision.end}) invalid for "
                    f"text of length {len(doc.text)}")

    def apply(self, decision: Decision) -> dict:
        """Validate, journal, then apply one decision; returns the updated
        annotation view."""
        with self._lock:
            self._validate(decision)
            if not decision.ts:
                decision = replace(decision, ts=_utc_now())
            with self._journal_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(decision.to_json_dict(),
                                    ensure_ascii=False, sort_keys=True) + "\n")
                fh.flush()
            self._history.append(decision)
            self._effective[(decision.doc_id, decision.ann_id)] = decision
            return self.annotation_view(decision.doc_id, decision.ann_id)

    def _resolve(self, doc_id: str, ann: Annotation
                 ) -> tuple[Annotation | None, Decision | None]:
        """Annotation after applying its effective decision (None if
        rejected)."""
        decision = self._effective.get((doc_id, ann.id))
        if decision is None:
            return ann, None
        if decision.action is Action.REJECT:
            return None, decision
        if decision.action is Action.ACCEPT:
            resolved = Annotation(id=ann.id, category=ann.category,
                                  span=ann.span, attributes=dict(ann.attributes),
                                  status=Status.OK, source_id=ann.source_id)
            return resolved, decision
        span = Span(decision.begin, decision.end)
        resolved = Annotation(id=ann.id, category=ann.category, span=span,
                              attributes=dict(ann.attributes),
                              status=Status.OK, source_id=ann.source_id)
        return resolved, decision

    def annotation_view(self, doc_id: str, ann_id: str) -> dict:
        doc = self._base(doc_id)
        ann = doc.annotation_map().get(ann_id)
        if ann is None:
            raise UnknownAnnotation(f"unknown annotation {ann_id} in {doc_id}")
        resolved, decision = self._resolve(doc_id, ann)
        view = {
            "doc_id": doc_id,
            "id": ann.id,
            "category": ann.category.value,
            "original_status": ann.status.value,
            "source_id": ann.source_id,
            "attributes": dict(ann.attributes),
            "decided": decision is not None,
            "effective_action": decision.action.value if decision else None,
            "rejected": resolved is None,
            "begin": resolved.span.begin if resolved and resolved.span else None,
            "end": resolved.span.end if resolved and resolved.span else None,
            "status": resolved.status.value if resolved else None,
        }
        source = self._source_info(doc_id, ann)
        if source is not None:
            view["source"] = source
        return view

    def _source_info(self, doc_id: str, ann: Annotation) -> dict | None:
        """Everything known about the source-language annotation this item
        was projected from: span text, attributes, relations."""
        src_doc = self._sources.get(doc_id)
        if src_doc is None or ann.source_id is None:
            return None
        src = src_doc.annotation_map().get(ann.source_id)
        if src is None:
            return None
        return {
            "id": src.id,
            "category": src.category.value,
            "begin": src.span.begin if src.span else None,
            "end": src.span.end if src.span else None,
            "text": src.surface(src_doc.text) if src.span else None,
            "attributes": dict(src.attributes),
            "relations": [
                {"id": r.id, "rel_type": r.rel_type.value,
                 "source": r.source, "target": r.target}
                for r in src_doc.relations
                if src.id in (r.source, r.target)
            ],
        }

    def document_ids(self) -> list[str]:
        return sorted(self._corpus)

    def pending_counts(self, doc_id: str) -> tuple[int, int]:
        doc = self._base(doc_id)
        mismatches = missing = 0
        with self._lock:
            for ann in doc.annotations:
                if (doc_id, ann.id) in self._effective:
                    continue
                if ann.status is Status.MISMATCH_CANDIDATE:
                    mismatches += 1
                elif ann.status is Status.MISSING:
                    missing += 1
        return mismatches, missing

    def document_view(self, doc_id: str) -> dict:
        doc = self._base(doc_id)
        with self._lock:
            annotations = [self.annotation_view(doc_id, a.id)
                           for a in doc.annotations]
        src_doc = self._sources.get(doc_id)
        source = None
        if src_doc is not None:
            source = {
                "text": src_doc.text,
                "annotations": [
                    {"id": a.id, "category": a.category.value,
                     "begin": a.span.begin if a.span else None,
                     "end": a.span.end if a.span else None,
                     "status": a.status.value,
                     "attributes": dict(a.attributes)}
                    for a in src_doc.annotations
                ],
                "relations": [
                    {"id": r.id, "rel_type": r.rel_type.value,
                     "source": r.source, "target": r.target}
                    for r in src_doc.relations
                ],
            }
        return {
            "doc_id": doc_id,
            "language": doc.language,
            "text": doc.text,
            "annotations": annotations,
            "relations": [
                {"id": r.id, "rel_type": r.rel_type.value,
                 "source": r.source, "target": r.target,
                 "attributes": dict(r.attributes)}
                for r in doc.relations
            ],
            "source": source,
        }

    def queue(self, status: Status | None = None) -> list[dict]:
        """Flat list of still-pending flagged items across the corpus."""
        wanted = ((Status.MISMATCH_CANDIDATE, Status.MISSING)
                  if status is None else (status,))
        items = []
        with self._lock:
            for doc_id in self.document_ids():
                doc = self._base(doc_id)
                for ann in doc.annotations:
                    if ann.status not in wanted:
                        continue
                    if (doc_id, ann.id) in self._effective:
                        continue
                    items.append(self.annotation_view(doc_id, ann.id))
        return items

    def stats(self) -> RevisionStats:
        total_mismatches = checked = corrected = 0
        total_missing = created = 0
        with self._lock:
            for doc_id in self.document_ids():
                doc = self._base(doc_id)
                for ann in doc.annotations:
                    decision = self._effective.get((doc_id, ann.id))
                    if ann.status is Status.MISMATCH_CANDIDATE:
                        total_mismatches += 1
                        if decision is not None:
                            checked += 1
                            if decision.action in (Action.CORRECT, Action.REJECT):
                                corrected += 1
                    elif ann.status is Status.MISSING:
                        total_missing += 1
                        if decision is not None and decision.action is Action.ADD:
                            created += 1
        return RevisionStats(total_mismatches, checked, corrected,
                             total_missing, created)

    def materialize(self, doc_id: str) -> tuple[Document, list[Relation]]:
        """Corrected document plus the relations dangling after rejections."""
        doc = self._base(doc_id)
        annotations = []
        with self._lock:
            for ann in doc.annotations:
                resolved, _ = self._resolve(doc_id, ann)
                if resolved is not None:
                    annotations.append(resolved)
        kept_ids = {a.id for a in annotations}
        relations = [r for r in doc.relations
                     if r.source in kept_ids and r.target in kept_ids]
        dangling = [r for r in doc.relations
                    if r.source not in kept_ids or r.target not in kept_ids]
        return (Document(doc_id=doc.doc_id, language=doc.language,
                         text=doc.text, annotations=tuple(annotations),
                         relations=tuple(relations), tokens=doc.tokens),
                dangling)

    def export(self, output_dir: str | Path) -> RevisionStats:
        """Write corrected standoff files (same base formats) plus the
        revision stats table and an export report listing dangling
        relations."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        dangling_report = {}
        with self._lock:
            for doc_id in self.document_ids():
                path, _ = self._corpus[doc_id]
                doc, dangling = self.materialize(doc_id)
                corpusio.write_document(doc, output_dir / path.name)
                if dangling:
                    dangling_report[doc_id] = [r.id for r in dangling]
            stats = self.stats()
        (output_dir / "_revision_stats.json").write_text(
            json.dumps({**stats.to_json_dict(),
                        "dangling_relations": dangling_report},
                       ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        (output_dir / "_revision_stats.txt").write_text(stats.to_text(),
                                                       encoding="utf-8")
        return stats


def export_corrected(corpus_dir: str | Path, journal_path: str | Path,
                     output_dir: str | Path,
                     source_dir: str | Path | None = None) -> RevisionStats:
    """Offline export: replay the journal against the corpus and write the
    corrected files without a running service."""
    store = ReviewStore.open(corpus_dir, journal_path, source_dir)
    return store.export(output_dir)
