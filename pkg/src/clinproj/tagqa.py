"""Tag quality checks on candidate translations and n-best re-ranking.

Processing has two passes. The structural pass partitions the source tag
IDs by presence in a candidate (missing / provisionally ok); the semantic
pass back-translates each surviving span and keeps it only when the
back-translation matches the source span, allowing WordNet synonyms.
Candidates are then ranked by the combined missing+mismatched ratio;
translation-quality metrics play no part in the ranking.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .exceptions import ProviderError, RejectedInput, TransportError
from .inline import ParsedInline
from .segmentation import tokenize
from .translate import TranslationClient
from .wordnet import Lexicon, normalize_lemma

logger = logging.getLogger(__name__)

_WS_RE = re.compile(r"\s+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("clinproj").joinpath(
        "data/stopwords_en.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


@dataclass(frozen=True)
class TagDiff:
    """Partition of the source tag-ID set for one candidate.

    ``missing`` + the ids of ``mismatch_candidates`` + ``ok`` equals the
    source tag-ID set, pairwise disjoint. ``spurious`` lists candidate
    tags absent from the source; they are reported but excluded from the
    two error ratios.
    """

    missing: tuple[str, ...] = ()
    mismatch_candidates: tuple[tuple[str, str, str], ...] = ()
    ok: tuple[str, ...] = ()
    spurious: tuple[str, ...] = ()

    @property
    def error_count(self) -> int:
        return len(self.missing) + len(self.mismatch_candidates)

    def error_ratio(self, source_tag_count: int) -> float:
        if source_tag_count == 0:
            return 0.0
        return self.error_count / source_tag_count


def diff_tags(source: ParsedInline, candidate: ParsedInline) -> TagDiff:
    """Structural pass: partition source IDs by presence in the candidate.

    An ID that is orphaned in the candidate counts as missing; IDs present
    in both sides are provisionally ok pending the semantic pass.
    """
    if source.orphans:
        raise RejectedInput(
            f"source has orphaned tags: {', '.join(source.orphans)}")
    src_ids = set(source.spans)
    cand_ids = set(candidate.spans)
    missing = tuple(sorted(src_ids - cand_ids))
    ok = tuple(sorted(src_ids & cand_ids))
    spurious = tuple(sorted((cand_ids | set(candidate.orphans)) - src_ids))
    return TagDiff(missing=missing, ok=ok, spurious=spurious)


def _content_tokens(text: str) -> list[str]:
    out = []
    for span in tokenize(text):
        token = text[span.begin:span.end].lower()
        if token.isalnum() and token not in STOPWORDS:
            out.append(token)
    return out


def _normalize_ws(text: str) -> str:
    return _WS_RE.sub(" ", text.strip())


def span_matches(source_text: str, target_text: str, lexicon: Lexicon,
                 client: TranslationClient) -> bool:
    """Decide whether a target span carries the meaning of a source span.

    True when any of the following holds for the back-translation of
    ``target_text`` into the source language: (1) case-insensitive,
    whitespace-normalized equality with ``source_text``; (2) the whole
    phrases share a WordNet synset; (3) after stopword removal, every
    content token on each side equals or shares a synset with some token
    on the other side.
    """
    if not source_text.strip() or not target_text.strip():
        raise RejectedInput("span_matches requires non-empty texts")
    back = client.backtranslate(target_text)

    if _normalize_ws(back).lower() == _normalize_ws(source_text).lower():
        return True

    if lexicon.share_synset(normalize_lemma(back), normalize_lemma(source_text)):
        return True

    back_tokens = _content_tokens(back)
    source_tokens = _content_tokens(source_text)
    if not back_tokens or not source_tokens:
        return not back_tokens and not source_tokens

    def covered(tokens: list[str], others: list[str]) -> bool:
        return all(
            any(t == o or lexicon.share_synset(t, o) for o in others)
            for t in tokens)

    return covered(back_tokens, source_tokens) and covered(source_tokens, back_tokens)


def semantic_pass(diff: TagDiff, source: ParsedInline, candidate: ParsedInline,
                  lexicon: Lexicon, client: TranslationClient,
                  check_ids: Iterable[str] | None = None) -> TagDiff:
    """Move provisionally-ok IDs whose spans fail the semantic check to
    ``mismatch_candidates``.

    A backend failure for one span conservatively flags that span (human
    revision will see it) and logs a warning. ``check_ids`` restricts the
    check to a subset of IDs (e.g. by category); unchecked IDs stay ok.
    """
    check = None if check_ids is None else set(check_ids)
    ok: list[str] = []
    mismatches = list(diff.mismatch_candidates)
    for tag_id in diff.ok:
        if check is not None and tag_id not in check:
            ok.append(tag_id)
            continue
        src_span = source.spans[tag_id]
        cand_span = candidate.spans[tag_id]
        src_text = source.plain_text[src_span.begin:src_span.end]
        cand_text = candidate.plain_text[cand_span.begin:cand_span.end]
        if not src_text.strip() or not cand_text.strip():
            matched = _normalize_ws(src_text) == _normalize_ws(cand_text)
        else:
            try:
                matched = span_matches(src_text, cand_text, lexicon, client)
            except (TransportError, ProviderError) as e:
                logger.warning("backend failure checking %s, flagging it: %s",
                               tag_id, e)
                matched = False
        if matched:
            ok.append(tag_id)
        else:
            mismatches.append((tag_id, src_text, cand_text))
    return TagDiff(missing=diff.missing,
                   mismatch_candidates=tuple(mismatches),
                   ok=tuple(ok), spurious=diff.spurious)


def rerank(diffs: Sequence[TagDiff], source_tag_count: int) -> int:
    """Index of the candidate with the lowest missing+mismatched ratio.

    All candidates share the source tag set, so comparing raw error
    counts is equivalent to comparing ratios (ratio is 0 when the source
    has no tags). Ties break toward the lowest index, i.e. the provider's
    own ranking.
    """
    if not diffs:
        raise RejectedInput("rerank requires at least one candidate")
    return min(range(len(diffs)), key=lambda i: diffs[i].error_count)
