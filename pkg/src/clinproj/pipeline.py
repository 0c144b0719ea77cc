"""End-to-end projection: standoff -> inline -> n-best translation ->
tag QA and re-ranking -> flagged target standoff.

Documents are translated whole (one prompt per clinical case); when a
case exceeds ``max_chars`` it falls back to sentence-sized chunks merged
so that no annotation crosses a chunk boundary. Target annotations reuse
their source IDs, attributes are copied verbatim from the source, and
every source relation is copied with endpoints remapped, including
relations touching MISSING annotations (kept attached to the metadata row
so no relation is lost).
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import corpusio
from .exceptions import (CodecError, ProjectionError, ProviderError,
                         RejectedInput, TransportError)
from .inline import parse_inline, to_inline
from .model import (Annotation, Category, Document, Relation, Span, Status,
                    validate_document)
from .segmentation import merge_to_cover, sentence_spans, tokenize
from .tagqa import TagDiff, diff_tags, rerank, semantic_pass
from .translate import (ExemplarSet, PromptSpec, TranslationClient,
                        build_prompt)
from .wordnet import Lexicon

logger = logging.getLogger(__name__)

# Report category grouping: clinical entities, events, test results and
# measurements; body parts, actors and time expressions fold into "Other".
CATEGORY_GROUPS = {
    Category.CLINICAL_ENTITY: "CL",
    Category.EVENT: "EV",
    Category.RML: "RML",
    Category.BODYPART: "Other",
    Category.ACTOR: "Other",
    Category.TIMEX3: "Other",
}
GROUP_ORDER = ("CL", "EV", "RML", "Other")


def _zero_counts() -> dict[str, int]:
    return {g: 0 for g in GROUP_ORDER}


def _with_total(counts: dict[str, int]) -> dict[str, int]:
    out = {g: counts.get(g, 0) for g in GROUP_ORDER}
    out["TOT"] = sum(out.values())
    return out


@dataclass(frozen=True)
class ProjectionConfig:
    """Settings for one projection run."""

    target_language: str
    n_best: int = 4
    exemplars: ExemplarSet | None = None  # None -> bundled default set
    qa_categories: tuple[Category, ...] = tuple(Category)
    max_chars: int = 0  # 0 disables the sentence-chunking fallback
    jobs: int = 1

    def __post_init__(self):
        if self.n_best < 1:
            raise RejectedInput("n_best must be >= 1")
        if self.jobs < 1:
            raise RejectedInput("jobs must be >= 1")

    def exemplar_set(self) -> ExemplarSet:
        return self.exemplars or ExemplarSet.bundled_default()


@dataclass(frozen=True)
class DocumentReport:
    """Per-document projection outcome and error counts by category group."""

    doc_id: str
    status: str  # "ok" | "failed"
    error: str | None = None
    selected_indices: tuple[int, ...] = ()
    n_source_tags: int = 0
    mismatched: dict[str, int] = field(default_factory=_zero_counts)
    missing: dict[str, int] = field(default_factory=_zero_counts)
    diff: TagDiff | None = None

    def to_json_dict(self) -> dict:
        out = {
            "doc_id": self.doc_id,
            "status": self.status,
            "error": self.error,
            "selected_indices": list(self.selected_indices),
            "n_source_tags": self.n_source_tags,
            "mismatched": _with_total(self.mismatched),
            "missing": _with_total(self.missing),
        }
        if self.diff is not None:
            out["detail"] = {
                "missing_ids": list(self.diff.missing),
                "mismatches": [list(m) for m in self.diff.mismatch_candidates],
                "ok_ids": list(self.diff.ok),
                "spurious_ids": list(self.diff.spurious),
            }
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DocumentReport":
        detail = obj.get("detail")
        diff = None
        if detail is not None:
            diff = TagDiff(
                missing=tuple(detail.get("missing_ids", ())),
                mismatch_candidates=tuple(
                    tuple(m) for m in detail.get("mismatches", ())),
                ok=tuple(detail.get("ok_ids", ())),
                spurious=tuple(detail.get("spurious_ids", ())))
        return cls(
            doc_id=obj["doc_id"], status=obj["status"],
            error=obj.get("error"),
            selected_indices=tuple(obj.get("selected_indices", ())),
            n_source_tags=obj.get("n_source_tags", 0),
            mismatched={g: obj.get("mismatched", {}).get(g, 0) for g in GROUP_ORDER},
            missing={g: obj.get("missing", {}).get(g, 0) for g in GROUP_ORDER},
            diff=diff)


@dataclass(frozen=True)
class ProjectionReport:
    """Corpus-level report; aggregates equal the sum of per-document counts."""

    target_language: str
    documents: tuple[DocumentReport, ...] = ()

    def totals(self, kind: str) -> dict[str, int]:
        counts = _zero_counts()
        for doc in self.documents:
            per_doc = doc.mismatched if kind == "mismatched" else doc.missing
            for group in GROUP_ORDER:
                counts[group] += per_doc.get(group, 0)
        return _with_total(counts)

    @property
    def failed(self) -> tuple[DocumentReport, ...]:
        return tuple(d for d in self.documents if d.status != "ok")

    def to_json_dict(self) -> dict:
        return {
            "target_language": self.target_language,
            "documents": [d.to_json_dict() for d in self.documents],
            "totals": {
                "mismatched": self.totals("mismatched"),
                "missing": self.totals("missing"),
            },
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ProjectionReport":
        return cls(
            target_language=obj["target_language"],
            documents=tuple(DocumentReport.from_json_dict(d)
                            for d in obj["documents"]))

    @classmethod
    def load(cls, path: str | Path) -> "ProjectionReport":
        return cls.from_json_dict(
            json.loads(Path(path).read_text(encoding="utf-8")))


def _chunk_spans(doc: Document, max_chars: int) -> list[Span]:
    if not max_chars or len(doc.text) <= max_chars:
        return [Span(0, len(doc.text))] if doc.text else [Span(0, 0)]
    sentences = sentence_spans(doc.text)
    if not sentences:
        return [Span(0, len(doc.text))]
    spans = [a.span for a in doc.annotations if a.span is not None]
    return merge_to_cover(sentences, spans)


def _subdocument(doc: Document, chunk: Span) -> Document:
    anns = tuple(
        Annotation(id=a.id, category=a.category,
                   span=Span(a.span.begin - chunk.begin, a.span.end - chunk.begin),
                   attributes=dict(a.attributes), status=a.status,
                   source_id=a.source_id)
        for a in doc.annotations
        if a.span is not None and a.span.begin >= chunk.begin
        and a.span.end <= chunk.end)
    return Document(doc_id=doc.doc_id, language=doc.language,
                    text=doc.text[chunk.begin:chunk.end], annotations=anns)


@dataclass(frozen=True)
class ChunkResult:
    source_inline: str
    candidates: tuple[str, ...]
    selected_index: int
    diff: TagDiff
    selected_plain: str
    selected_spans: dict[str, Span]


def _project_chunk(subdoc: Document, cfg: ProjectionConfig,
                   client: TranslationClient, lexicon: Lexicon,
                   check_ids: set[str]) -> ChunkResult:
    inline = to_inline(subdoc)
    source_parsed = parse_inline(inline.tagged_text)
    exemplars = cfg.exemplar_set()
    messages = build_prompt(PromptSpec(
        instruction=exemplars.instruction, exemplars=exemplars.pairs,
        input=inline.tagged_text, target_language=cfg.target_language))
    candidates = client.translate_nbest(messages, cfg.n_best)
    if not candidates:
        raise ProviderError("provider returned no candidates")

    diffs = []
    parsed_candidates = []
    for cand in candidates:
        parsed = parse_inline(cand.tagged_text)
        diff = diff_tags(source_parsed, parsed)
        diff = semantic_pass(diff, source_parsed, parsed, lexicon, client,
                             check_ids=check_ids)
        diffs.append(diff)
        parsed_candidates.append(parsed)
    best = rerank(diffs, len(source_parsed.spans))
    return ChunkResult(
        source_inline=inline.tagged_text,
        candidates=tuple(c.tagged_text for c in candidates),
        selected_index=best,
        diff=diffs[best],
        selected_plain=parsed_candidates[best].plain_text,
        selected_spans=parsed_candidates[best].spans)


def project_document(source: Document, cfg: ProjectionConfig,
                     client: TranslationClient, lexicon: Lexicon | None = None
                     ) -> tuple[Document, DocumentReport, list[ChunkResult]]:
    """Project one document into the target language.

    Returns the flagged target document, its report entry, and the
    per-chunk candidate record (kept so tag QA can be re-run offline).
    """
    violations = validate_document(source)
    if violations:
        raise RejectedInput(f"invalid document {source.doc_id}: {violations[0]}")
    lexicon = lexicon or Lexicon.empty()
    by_id = source.annotation_map()
    qa_categories = set(cfg.qa_categories)
    check_ids = {a.id for a in source.annotations
                 if a.category in qa_categories}

    chunks = _chunk_spans(source, cfg.max_chars)
    results: list[ChunkResult] = []
    text_parts: list[str] = []
    target_spans: dict[str, Span] = {}
    statuses: dict[str, Status] = {}
    mismatch_detail: list[tuple[str, str, str]] = []
    spurious: set[str] = set()
    cursor = 0
    offset = 0
    for chunk in chunks:
        gap = source.text[cursor:chunk.begin]
        text_parts.append(gap)
        offset += len(gap)
        cursor = chunk.end

        result = _project_chunk(_subdocument(source, chunk), cfg, client,
                                lexicon, check_ids)
        results.append(result)
        text_parts.append(result.selected_plain)
        for tag_id in result.diff.ok:
            span = result.selected_spans[tag_id]
            target_spans[tag_id] = Span(span.begin + offset, span.end + offset)
            statuses[tag_id] = Status.OK
        for tag_id, src_text, cand_text in result.diff.mismatch_candidates:
            span = result.selected_spans[tag_id]
            target_spans[tag_id] = Span(span.begin + offset, span.end + offset)
            statuses[tag_id] = Status.MISMATCH_CANDIDATE
            mismatch_detail.append((tag_id, src_text, cand_text))
        for tag_id in result.diff.missing:
            statuses[tag_id] = Status.MISSING
        spurious.update(result.diff.spurious)
        offset += len(result.selected_plain)
    text_parts.append(source.text[cursor:])
    target_text = "".join(text_parts)

    annotations = []
    for a in source.annotations:
        status = statuses.get(a.id, Status.MISSING)
        span = target_spans.get(a.id)
        annotations.append(Annotation(
            id=a.id, category=a.category,
            span=span if status is not Status.MISSING else None,
            attributes=dict(a.attributes), status=status, source_id=a.id))
    relations = tuple(
        Relation(id=r.id, rel_type=r.rel_type, source=r.source,
                 target=r.target, attributes=dict(r.attributes))
        for r in source.relations)
    target = Document(
        doc_id=source.doc_id, language=cfg.target_language, text=target_text,
        annotations=tuple(annotations), relations=relations,
        tokens=tokenize(target_text))
    violations = validate_document(target)
    if violations:
        raise ProjectionError(
            f"projected document {source.doc_id} is invalid: {violations[0]}")

    merged = TagDiff(
        missing=tuple(sorted(a.id for a in annotations
                             if a.status is Status.MISSING)),
        mismatch_candidates=tuple(sorted(mismatch_detail)),
        ok=tuple(sorted(a.id for a in annotations if a.status is Status.OK)),
        spurious=tuple(sorted(spurious)))

    mismatched_counts = _zero_counts()
    for tag_id, _, _ in merged.mismatch_candidates:
        mismatched_counts[CATEGORY_GROUPS[by_id[tag_id].category]] += 1
    missing_counts = _zero_counts()
    for tag_id in merged.missing:
        missing_counts[CATEGORY_GROUPS[by_id[tag_id].category]] += 1

    n_ok = sum(1 for a in annotations if a.status is Status.OK)
    n_mis = sum(1 for a in annotations if a.status is Status.MISMATCH_CANDIDATE)
    n_missing = sum(1 for a in annotations if a.status is Status.MISSING)
    if n_ok + n_mis + n_missing != len(source.annotations):
        raise ProjectionError(
            f"conservation violated for {source.doc_id}: "
            f"{n_ok}+{n_mis}+{n_missing} != {len(source.annotations)}")

    report = DocumentReport(
        doc_id=source.doc_id, status="ok",
        selected_indices=tuple(r.selected_index for r in results),
        n_source_tags=len(source.annotations),
        mismatched=mismatched_counts, missing=missing_counts, diff=merged)
    return target, report, results


def _candidates_sidecar(doc: Document, cfg: ProjectionConfig,
                        results: list[ChunkResult]) -> dict:
    return {
        "doc_id": doc.doc_id,
        "target_language": cfg.target_language,
        "categories": {a.id: a.category.value for a in doc.annotations},
        "chunks": [
            {
                "source_inline": r.source_inline,
                "candidates": list(r.candidates),
                "selected_index": r.selected_index,
            }
            for r in results
        ],
    }


def rescore_candidates(sidecar: dict, client: TranslationClient,
                       lexicon: Lexicon | None = None,
                       qa_categories: tuple[Category, ...] | None = None
                       ) -> DocumentReport:
    """Re-run tag QA and re-ranking on a stored candidates sidecar.

    Lets the QA pass be repeated offline (different lexicon, category
    filter, or back-translation backend) without new n-best requests.
    """
    lexicon = lexicon or Lexicon.empty()
    categories = {k: Category(v) for k, v in sidecar["categories"].items()}
    qa_set = set(qa_categories if qa_categories is not None else tuple(Category))
    check_ids = {i for i, c in categories.items() if c in qa_set}

    selected: list[int] = []
    missing: list[str] = []
    mismatches: list[tuple[str, str, str]] = []
    ok: list[str] = []
    spurious: set[str] = set()
    n_source_tags = 0
    for chunk in sidecar["chunks"]:
        source_parsed = parse_inline(chunk["source_inline"])
        n_source_tags += len(source_parsed.spans)
        diffs = []
        for tagged in chunk["candidates"]:
            parsed = parse_inline(tagged)
            diff = diff_tags(source_parsed, parsed)
            diffs.append(semantic_pass(diff, source_parsed, parsed, lexicon,
                                       client, check_ids=check_ids))
        best = rerank(diffs, len(source_parsed.spans))
        selected.append(best)
        missing.extend(diffs[best].missing)
        mismatches.extend(diffs[best].mismatch_candidates)
        ok.extend(diffs[best].ok)
        spurious.update(diffs[best].spurious)

    mismatched_counts = _zero_counts()
    for tag_id, _, _ in mismatches:
        mismatched_counts[CATEGORY_GROUPS[categories[tag_id]]] += 1
    missing_counts = _zero_counts()
    for tag_id in missing:
        missing_counts[CATEGORY_GROUPS[categories[tag_id]]] += 1
    diff = TagDiff(missing=tuple(sorted(missing)),
                   mismatch_candidates=tuple(sorted(mismatches)),
                   ok=tuple(sorted(ok)), spurious=tuple(sorted(spurious)))
    return DocumentReport(
        doc_id=sidecar["doc_id"], status="ok",
        selected_indices=tuple(selected), n_source_tags=n_source_tags,
        mismatched=mismatched_counts, missing=missing_counts, diff=diff)


def project_corpus(input_dir: str | Path, output_dir: str | Path,
                   cfg: ProjectionConfig, client: TranslationClient,
                   lexicon: Lexicon | None = None,
                   *, write_candidates: bool = True) -> ProjectionReport:
    """Project every standoff file in ``input_dir``.

    One output file per input, in the same base format. Per-document
    failures are isolated: the document is marked failed in the report
    and no partial output is written for it. Output is deterministic for
    a fixed config and mock fixture.
    """
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    candidates_dir = output_dir / "candidates"
    files = corpusio.corpus_files(input_dir)

    def run_one(path: Path) -> DocumentReport:
        try:
            source = corpusio.read_document(path)
            target, report, results = project_document(source, cfg, client,
                                                       lexicon)
            corpusio.write_document(target, output_dir / path.name)
            if write_candidates:
                candidates_dir.mkdir(exist_ok=True)
                sidecar = candidates_dir / f"{source.doc_id}.json"
                sidecar.write_text(
                    json.dumps(_candidates_sidecar(source, cfg, results),
                               ensure_ascii=False, indent=2, sort_keys=True)
                    + "\n", encoding="utf-8")
            return report
        except (TransportError, ProviderError, RejectedInput, CodecError,
                ProjectionError) as e:
            logger.error("projection failed for %s: %s", path.name, e)
            return DocumentReport(doc_id=path.stem, status="failed",
                                  error=str(e))

    if cfg.jobs > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(run_one, files))
    else:
        reports = [run_one(p) for p in files]

    report = ProjectionReport(
        target_language=cfg.target_language,
        documents=tuple(sorted(reports, key=lambda r: r.doc_id)))

    (output_dir / "_report.json").write_text(
        json.dumps(report.to_json_dict(), ensure_ascii=False, indent=2,
                   sort_keys=True) + "\n", encoding="utf-8")
    from . import stats  # local import; stats renders the table shape
    (output_dir / "_report.txt").write_text(
        stats.render_qa_table([report]), encoding="utf-8")
    return report
