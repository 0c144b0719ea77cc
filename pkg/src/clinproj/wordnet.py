"""Princeton WordNet 3.x flat-file loader and synonym lookup.

Reads the ``index.<pos>``/``data.<pos>`` pairs (noun/verb/adj/adv) from a
database directory. Only lemmas and synset membership are used; pointers,
glosses and sense ranking are ignored. License header lines (leading two
spaces) are skipped. Lookups are part-of-speech blind: synsets across all
POS are unioned, which errs toward "synonym" — downstream review catches
residual errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import LexiconError

POS_SUFFIXES = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}

_WS_RE = re.compile(r"\s+")


def normalize_lemma(phrase: str) -> str:
    """Lowercase and join words with underscores, WordNet-lemma style."""
    return _WS_RE.sub("_", phrase.strip().lower())


@dataclass
class Lexicon:
    """Lemma index plus synset membership, read-only after load.

    ``index`` maps lemma -> pos -> synset offsets; ``synsets`` maps
    ``(pos, offset)`` -> member lemmas. Every offset referenced by the
    index exists in ``synsets``.
    """

    index: dict[str, dict[str, tuple[int, ...]]] = field(default_factory=dict)
    synsets: dict[tuple[str, int], tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "Lexicon":
        return cls()

    def synset_ids(self, phrase: str) -> set[tuple[str, int]]:
        lemma = normalize_lemma(phrase)
        by_pos = self.index.get(lemma, {})
        return {(pos, off) for pos, offs in by_pos.items() for off in offs}

    def synonyms(self, phrase: str) -> set[str]:
        """All synset co-members of ``phrase`` (normalized), plus itself."""
        lemma = normalize_lemma(phrase)
        out = {lemma}
        for key in self.synset_ids(lemma):
            out.update(self.synsets[key])
        return out

    def share_synset(self, a: str, b: str) -> bool:
        return bool(self.synset_ids(a) & self.synset_ids(b))


def _parse_data_line(line: str, where: str) -> tuple[int, tuple[str, ...]]:
    fields = line.split()
    try:
        offset = int(fields[0])
        w_cnt = int(fields[3], 16)  # word count is two-digit hexadecimal
        if w_cnt < 1:
            raise ValueError("w_cnt < 1")
        words = fields[4:4 + 2 * w_cnt:2]  # (word, lex_id) pairs
        if len(words) != w_cnt:
            raise ValueError("truncated word list")
    except (IndexError, ValueError) as e:
        raise LexiconError(f"{where}: corrupt data line: {e}") from e
    return offset, tuple(normalize_lemma(w) for w in words)


def _parse_index_line(line: str, where: str) -> tuple[str, tuple[int, ...]]:
    fields = line.split()
    try:
        lemma = normalize_lemma(fields[0])
        synset_cnt = int(fields[2])
        if synset_cnt < 1:
            raise ValueError("synset_cnt < 1")
        offsets = tuple(int(x) for x in fields[-synset_cnt:])
    except (IndexError, ValueError) as e:
        raise LexiconError(f"{where}: corrupt index line: {e}") from e
    return lemma, offsets


def load_wordnet(directory: str | Path) -> Lexicon:
    """Load a WordNet 3.x database directory into a :class:`Lexicon`.

    Raises :class:`LexiconError` when no POS file pair is present, when a
    pair is incomplete, or on a corrupt line (named with file and line
    number).
    """
    directory = Path(directory)
    lexicon = Lexicon()
    loaded_any = False

    for pos, suffix in POS_SUFFIXES.items():
        index_path = directory / f"index.{suffix}"
        data_path = directory / f"data.{suffix}"
        if not index_path.exists() and not data_path.exists():
            continue
        for path in (index_path, data_path):
            if not path.exists():
                raise LexiconError(f"missing database file: {path}")
        loaded_any = True

        for lineno, line in enumerate(
                data_path.read_text(encoding="utf-8").splitlines(), start=1):
            if line.startswith("  ") or not line.strip():
                continue
            offset, lemmas = _parse_data_line(line, f"{data_path}:{lineno}")
            lexicon.synsets[(pos, offset)] = lemmas

        for lineno, line in enumerate(
                index_path.read_text(encoding="utf-8").splitlines(), start=1):
            if line.startswith("  ") or not line.strip():
                continue
            lemma, offsets = _parse_index_line(line, f"{index_path}:{lineno}")
            for off in offsets:
                if (pos, off) not in lexicon.synsets:
                    raise LexiconError(
                        f"{index_path}:{lineno}: lemma {lemma!r} references "
                        f"synset {off} missing from {data_path.name}")
            by_pos = lexicon.index.setdefault(lemma, {})
            by_pos[pos] = tuple(offsets)

    if not loaded_any:
        raise LexiconError(f"no WordNet database files found in {directory}")
    return lexicon
