"""Deterministic rule-based tokenization and sentence splitting.

The tokenizer is structural, not linguistic: maximal runs of letters and
digits are tokens, every other non-whitespace character is a token of its
own. It exists to populate token rows and corpus statistics, so the only
requirement is determinism.
"""

from __future__ import annotations

import re

from .model import Span

# Letter/digit runs first (unicode, underscore excluded), else any single
# non-whitespace character.
_TOKEN_RE = re.compile(r"[^\W_]+|\S")

_SENTENCE_FINAL = ".!?"


def tokenize(text: str) -> tuple[Span, ...]:
    return tuple(Span(m.start(), m.end()) for m in _TOKEN_RE.finditer(text))


def sentence_spans(text: str) -> list[Span]:
    """Split into sentence spans, trimmed of surrounding whitespace.

    A boundary is sentence-final punctuation followed by whitespace and
    an uppercase letter or digit.
    """
    boundaries = [0]
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _SENTENCE_FINAL:
            j = i + 1
            while j < n and text[j] in _SENTENCE_FINAL:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j and k < n and (text[k].isupper() or text[k].isdigit()):
                boundaries.append(k)
                i = k
                continue
            i = j
        else:
            i += 1
    boundaries.append(n)

    spans = []
    for begin, end in zip(boundaries, boundaries[1:]):
        while begin < end and text[begin].isspace():
            begin += 1
        while end > begin and text[end - 1].isspace():
            end -= 1
        if begin < end:
            spans.append(Span(begin, end))
    return spans


def merge_to_cover(chunks: list[Span], spans: list[Span]) -> list[Span]:
    """Merge adjacent chunks so that no span in ``spans`` crosses a chunk
    boundary. Merged chunks absorb the gaps between the chunks they join."""
    if not chunks:
        return []
    merged = list(chunks)
    for span in spans:
        lo = hi = None
        for i, chunk in enumerate(merged):
            if span.begin < chunk.end and span.end > chunk.begin:
                if lo is None:
                    lo = i
                hi = i
        if lo is None:
            # Span sits entirely in whitespace between chunks; attach it
            # to the nearest following chunk (or the last one).
            for i, chunk in enumerate(merged):
                if chunk.begin >= span.end:
                    merged[i] = Span(min(chunk.begin, span.begin), chunk.end)
                    break
            else:
                last = merged[-1]
                merged[-1] = Span(last.begin, max(last.end, span.end))
            continue
        # Extending into the surrounding gaps cannot reach the neighbour
        # chunks: any chunk the span touches is already inside lo..hi.
        covering = Span(min(merged[lo].begin, span.begin),
                        max(merged[hi].end, span.end))
        merged[lo:hi + 1] = [covering]
    return merged
