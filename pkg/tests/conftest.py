import json
from pathlib import Path

import pytest

from clinproj import corpusio
from clinproj.backend import MockChatBackend
from clinproj.model import (Annotation, Category, Document, Relation,
                            RelationType, Span)
from clinproj.pipeline import ProjectionConfig, project_corpus
from clinproj.translate import TranslationClient

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fig3_path() -> Path:
    return FIXTURES / "standoff" / "EN103007.xmi"


@pytest.fixture
def astral_path() -> Path:
    return FIXTURES / "standoff" / "astral.xmi"


@pytest.fixture
def wordnet_dir() -> Path:
    return FIXTURES / "wordnet"


@pytest.fixture
def mock3_path() -> Path:
    return FIXTURES / "mock_corpus3.json"


def _ann(text: str, ann_id: str, category: Category, surface: str,
         occurrence: int = 0) -> Annotation:
    start = -1
    for _ in range(occurrence + 1):
        start = text.index(surface, start + 1)
    return Annotation(id=ann_id, category=category,
                      span=Span(start, start + len(surface)))


def build_corpus3() -> list[Document]:
    """Three-document English fixture corpus for the fault-injection runs.

    The paired mock fixture (mock_corpus3.json) injects exactly: missing
    EV x2 (EV1 in EN001, EV7 in EN003), missing CL x1 (CL1 in EN001) and
    mismatched RML x1 (RML1 in EN002).
    """
    text1 = ("A 54-year-old woman presented nausea and vomiting. "
             "She was admitted after the onset.")
    doc1 = Document(
        doc_id="EN001", language="en", text=text1,
        annotations=(
            _ann(text1, "ACT1", Category.ACTOR, "A 54-year-old woman"),
            _ann(text1, "EV1", Category.EVENT, "presented"),
            _ann(text1, "CL1", Category.CLINICAL_ENTITY, "nausea"),
            _ann(text1, "CL2", Category.CLINICAL_ENTITY, "vomiting"),
            _ann(text1, "EV2", Category.EVENT, "admitted"),
            _ann(text1, "EV3", Category.EVENT, "onset"),
        ),
        relations=(
            Relation("R1", RelationType.TLINK, "EV1", "EV2"),
            Relation("R2", RelationType.TLINK, "EV2", "EV3"),
        ))

    text2 = "Laboratory tests showed platelets 3000-8000/μL. Hemoglobin was 12 g/dL."
    doc2 = Document(
        doc_id="EN002", language="en", text=text2,
        annotations=(
            _ann(text2, "EV4", Category.EVENT, "platelets"),
            _ann(text2, "RML1", Category.RML, "3000-8000/μL"),
            _ann(text2, "EV5", Category.EVENT, "Hemoglobin"),
            _ann(text2, "RML2", Category.RML, "12 g/dL"),
        ),
        relations=(
            Relation("R3", RelationType.PERTAINS_TO, "RML1", "EV4"),
            Relation("R4", RelationType.PERTAINS_TO, "RML2", "EV5"),
        ))

    text3 = "An ultrasound revealed a mass in the left kidney. Surgery was planned."
    doc3 = Document(
        doc_id="EN003", language="en", text=text3,
        annotations=(
            _ann(text3, "EV6", Category.EVENT, "ultrasound"),
            _ann(text3, "CL3", Category.CLINICAL_ENTITY, "mass in the left kidney"),
            _ann(text3, "BP1", Category.BODYPART, "left kidney"),
            _ann(text3, "EV7", Category.EVENT, "Surgery"),
        ),
        relations=(
            Relation("R5", RelationType.TLINK, "EV6", "EV7"),
        ))
    return [doc1, doc2, doc3]


def write_corpus3(directory: Path) -> list[Path]:
    """Write the fixture corpus in mixed base formats (.xmi and .json)."""
    directory.mkdir(parents=True, exist_ok=True)
    docs = build_corpus3()
    paths = [directory / "EN001.xmi", directory / "EN002.xmi",
             directory / "EN003.json"]
    for doc, path in zip(docs, paths):
        corpusio.write_document(doc, path)
    return paths


@pytest.fixture
def corpus3_dir(tmp_path: Path) -> Path:
    directory = tmp_path / "corpus3"
    write_corpus3(directory)
    return directory


def make_mock_client(fixture_path: Path, audit_log=None) -> TranslationClient:
    return TranslationClient(MockChatBackend.from_file(fixture_path),
                             model="mock", source_language="en",
                             audit_log=audit_log, sleep=lambda s: None)


@pytest.fixture
def mock3_client(mock3_path: Path) -> TranslationClient:
    return make_mock_client(mock3_path)


@pytest.fixture
def projected_corpus(tmp_path: Path, corpus3_dir: Path,
                     mock3_client) -> tuple[Path, Path]:
    """(target_dir, source_dir) after projecting the fixture corpus."""
    out = tmp_path / "projected"
    cfg = ProjectionConfig(target_language="it")
    project_corpus(corpus3_dir, out, cfg, mock3_client)
    return out, corpus3_dir


def echo_client(**kwargs) -> TranslationClient:
    """Client whose backend echoes the input: a perfect 'translation'."""
    return TranslationClient(MockChatBackend(default="echo"), model="mock",
                             source_language="en", sleep=lambda s: None,
                             **kwargs)
