"""Reading and writing corpus directories of standoff files.

Format is chosen by extension (``.xmi`` or ``.json``). Files lacking
embedded metadata get their doc id from the file stem and, when the stem
starts with a two-letter language prefix (E3C convention, e.g.
``EN103007``), their language from that prefix.
"""

from __future__ import annotations

from pathlib import Path

from . import jsoncodec, xmi
from .exceptions import CodecError
from .model import Document

STANDOFF_SUFFIXES = (".xmi", ".json")


def corpus_files(directory: str | Path) -> list[Path]:
    """Standoff files in a corpus directory.

    Names starting with ``_`` are run metadata (reports, manifests), not
    documents; subdirectories are ignored.
    """
    root = Path(directory)
    return sorted(p for p in root.iterdir()
                  if p.is_file() and p.suffix in STANDOFF_SUFFIXES
                  and not p.name.startswith("_"))


def _language_hint(stem: str) -> str | None:
    prefix = stem[:2]
    if len(prefix) == 2 and prefix.isalpha():
        return prefix.lower()
    return None


def read_document(path: str | Path) -> Document:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix == ".xmi":
        return xmi.parse_standoff_xmi(
            data, doc_id_hint=path.stem, language_hint=_language_hint(path.stem))
    if path.suffix == ".json":
        return jsoncodec.parse_json(data)
    raise CodecError(f"unsupported standoff file extension: {path.name}")


def write_document(doc: Document, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".xmi":
        data = xmi.serialize_standoff_xmi(doc)
    elif path.suffix == ".json":
        data = jsoncodec.serialize_json(doc)
    else:
        raise CodecError(f"unsupported standoff file extension: {path.name}")
    path.write_bytes(data)


def read_corpus(directory: str | Path) -> list[tuple[Path, Document]]:
    """Read every standoff file in ``directory``, sorted by file name."""
    return [(p, read_document(p)) for p in corpus_files(directory)]
