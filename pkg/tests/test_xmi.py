import logging
import random

import pytest

from clinproj.exceptions import CodecError, RejectedInput
from clinproj.model import (Annotation, Category, Document, RelationType,
                            Span, Status)
from clinproj.xmi import parse_standoff_xmi, serialize_standoff_xmi

from .generators import random_document


def test_fig3_style_fixture(fig3_path):
    doc = parse_standoff_xmi(fig3_path.read_bytes())
    assert doc.doc_id == "EN103007"
    assert doc.language == "en"
    assert len(doc.annotations) == 2
    assert len(doc.relations) == 1
    by_id = doc.annotation_map()
    assert by_id["EV1"].category is Category.EVENT
    assert by_id["EV1"].surface(doc.text) == "platelets"
    assert by_id["EV1"].attributes == {"eventType": "test"}
    assert by_id["RML1"].surface(doc.text) == "3000-8000/μL"
    rel = doc.relations[0]
    assert rel.rel_type is RelationType.PERTAINS_TO
    assert (rel.source, rel.target) == ("RML1", "EV1")


def test_second_serialize_is_byte_identical(fig3_path):
    doc = parse_standoff_xmi(fig3_path.read_bytes())
    once = serialize_standoff_xmi(doc)
    again = serialize_standoff_xmi(parse_standoff_xmi(once))
    assert once == again


def test_utf16_offsets_convert_to_scalars(astral_path):
    doc = parse_standoff_xmi(astral_path.read_bytes())
    ann = doc.annotations[0]
    assert ann.span == Span(2, 3)
    assert ann.surface(doc.text) == "B"
    out = serialize_standoff_xmi(doc).decode("utf-8")
    assert 'begin="3" end="4"' in out


def test_missing_annotation_serialized_as_metadata_row():
    doc = Document(
        doc_id="D1", language="en", text="abc",
        annotations=(
            Annotation("A1", Category.EVENT, Span(0, 2)),
            Annotation("M1", Category.CLINICAL_ENTITY, None,
                       status=Status.MISSING, source_id="CL9"),
        ))
    data = serialize_standoff_xmi(doc)
    text = data.decode("utf-8")
    row = next(line for line in text.splitlines() if 'xmi:id="M1"' in line)
    assert "begin" not in row and "end" not in row
    assert 'sourceId="CL9"' in row and 'status="MISSING"' in row
    assert parse_standoff_xmi(data) == doc


def test_mismatch_candidate_status_round_trips():
    doc = Document(
        doc_id="D1", language="it", text="abc",
        annotations=(Annotation("A1", Category.RML, Span(0, 2),
                                status=Status.MISMATCH_CANDIDATE,
                                source_id="A1"),))
    data = serialize_standoff_xmi(doc)
    assert b'status="MISMATCH_CANDIDATE"' in data
    assert parse_standoff_xmi(data) == doc


def test_malformed_xml_reports_line_and_column():
    with pytest.raises(CodecError) as exc:
        parse_standoff_xmi(b"<?xml version='1.0'?>\n<xmi:XMI><broken</xmi:XMI>")
    assert exc.value.line is not None
    assert exc.value.column is not None


def _wrap(body: str) -> bytes:
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<xmi:XMI xmlns:xmi="http://www.omg.org/XMI" '
        'xmlns:cas="http:///uima/cas.ecore" '
        'xmlns:anno="http:///clinproj/annotations.ecore">'
        '<anno:DocumentMetadata xmi:id="meta" docId="D1" language="en" />'
        '<cas:Sofa xmi:id="1" sofaNum="1" sofaID="_InitialView" '
        'mimeType="text" sofaString="abcdef" />'
        f"{body}</xmi:XMI>").encode("utf-8")


def test_offset_outside_sofa_names_annotation():
    data = _wrap('<anno:Event xmi:id="EV1" sofa="1" begin="0" end="99" />')
    with pytest.raises(RejectedInput, match="EV1"):
        parse_standoff_xmi(data)


def test_offset_splitting_surrogate_pair_rejected(astral_path):
    data = astral_path.read_bytes().replace(b'begin="3"', b'begin="2"')
    with pytest.raises(RejectedInput, match="surrogate"):
        parse_standoff_xmi(data)


def test_unsupported_element_is_skipped_with_warning(caplog):
    data = _wrap('<anno:Mystery xmi:id="z" foo="1" />'
                 '<anno:Event xmi:id="EV1" sofa="1" begin="0" end="2" />')
    with caplog.at_level(logging.WARNING):
        doc = parse_standoff_xmi(data)
    assert len(doc.annotations) == 1
    assert any("Mystery" in r.message for r in caplog.records)


def test_foreign_attributes_carried_opaquely():
    data = _wrap('<anno:Event xmi:id="EV1" sofa="1" begin="0" end="2" '
                 'polarity="NEG" f_certainty="high" />')
    doc = parse_standoff_xmi(data)
    assert doc.annotations[0].attributes == {"polarity": "NEG",
                                             "certainty": "high"}


def test_e3c_layer_alias_recognized():
    data = _wrap('<custom:CLINENTITY xmi:id="CL1" sofa="1" begin="0" end="3" '
                 'xmlns:custom="http:///webanno/custom.ecore" />')
    doc = parse_standoff_xmi(data)
    assert doc.annotations[0].category is Category.CLINICAL_ENTITY


def test_rejects_xml_unrepresentable_characters():
    doc = Document(doc_id="D1", language="en", text="a\x01b")
    with pytest.raises(RejectedInput, match="U\\+0001"):
        serialize_standoff_xmi(doc)


def test_newlines_and_tabs_round_trip():
    doc = Document(doc_id="D1", language="en", text="a\nb\tc d",
                   annotations=(Annotation("A1", Category.EVENT, Span(0, 3)),))
    assert parse_standoff_xmi(serialize_standoff_xmi(doc)) == doc


def test_round_trip_randomized():
    rng = random.Random(99)
    for _ in range(100):
        doc = random_document(rng, all_ok=False)
        data = serialize_standoff_xmi(doc)
        assert parse_standoff_xmi(data) == doc
