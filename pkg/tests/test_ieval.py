import random

import pytest

from clinproj.ieval import (EntityParse, Task, make_training_sequences,
                            parse_entity_output, parse_relation_output,
                            score_entities, score_entities_overlap,
                            score_relations, score_relations_offsets)
from clinproj.model import (Annotation, Category, Document, Relation,
                            RelationType, Span)

from .conftest import build_corpus3


def entity_doc(text, *surfaces):
    annotations = []
    cursor = {}
    for i, surface in enumerate(surfaces):
        start = text.index(surface, cursor.get(surface, 0))
        cursor[surface] = start + 1
        annotations.append(Annotation(f"CL{i}", Category.CLINICAL_ENTITY,
                                      Span(start, start + len(surface))))
    return Document(doc_id="D1", language="en", text=text,
                    annotations=tuple(annotations))


def test_entity_target_basic():
    doc = entity_doc("presented nausea", "nausea")
    pairs = make_training_sequences(doc, Task.ENTITY)
    assert len(pairs) == 1
    assert pairs[0].input == "presented nausea"
    assert pairs[0].target == "presented [CL]nausea[/CL]"


def test_entity_target_without_entities_is_identity():
    doc = entity_doc("no findings at all")
    pairs = make_training_sequences(doc, Task.ENTITY)
    assert pairs[0].target == pairs[0].input


def test_entity_nested_markers():
    doc = entity_doc("a mass in the left kidney", "mass in the left kidney",
                     "left kidney")
    target = make_training_sequences(doc, Task.ENTITY)[0].target
    assert target == "a [CL]mass in the [CL]left kidney[/CL][/CL]"


def test_entity_crossing_uses_suffixed_markers():
    text = "ab cd ef"
    doc = Document(doc_id="D1", language="en", text=text, annotations=(
        Annotation("CLA", Category.CLINICAL_ENTITY, Span(0, 5)),
        Annotation("CLB", Category.CLINICAL_ENTITY, Span(3, 8)),
    ))
    target = make_training_sequences(doc, Task.ENTITY, unit="document")[0].target
    assert target == "[CL#1]ab [CL#2]cd[/CL#1] ef[/CL#2]"


def test_relation_target_format():
    doc = build_corpus3()[1]  # platelets 3000-8000/μL document
    pairs = make_training_sequences(doc, Task.RELATION, unit="document")
    assert pairs[0].target == ("[REL] 3000-8000/μL [TO] platelets ; "
                               "[REL] 12 g/dL [TO] Hemoglobin")


def test_relation_sentence_unit_splits():
    doc = build_corpus3()[1]
    pairs = make_training_sequences(doc, Task.RELATION, unit="sentence")
    assert len(pairs) == 2
    assert pairs[0].target == "[REL] 3000-8000/μL [TO] platelets"
    assert pairs[1].target == "[REL] 12 g/dL [TO] Hemoglobin"


def test_sentence_merge_when_entity_crosses_boundary():
    text = "He was ill. Then fine."
    doc = Document(doc_id="D1", language="en", text=text, annotations=(
        Annotation("CL0", Category.CLINICAL_ENTITY,
                   Span(text.index("ill"), text.index("fine") + 4)),))
    pairs = make_training_sequences(doc, Task.ENTITY)
    assert len(pairs) == 1
    assert pairs[0].input == text


def test_parse_entity_exact_echo_round_trip():
    doc = entity_doc("fever and chills noted", "fever", "chills")
    pair = make_training_sequences(doc, Task.ENTITY)[0]
    parsed = parse_entity_output(pair.input, pair.target)
    assert parsed.unaligned == ()
    assert sorted((s.begin, s.end) for s in parsed.spans) == sorted(
        (a.span.begin, a.span.end) for a in doc.annotations)


def test_parse_entity_alignment_offsets():
    parsed = parse_entity_output("presented nausea",
                                 "presented [CL]nausea[/CL]")
    assert parsed.spans == (Span(10, 16),)


def test_parse_entity_unalignable_marked_text():
    parsed = parse_entity_output("presented nausea",
                                 "noted [CL]vertigo[/CL]")
    assert parsed.spans == ()
    assert parsed.unaligned == ("vertigo",)


def test_parse_entity_malformed_markers_stay_literal():
    parsed = parse_entity_output("a [CL] b", "a [CL] b")
    assert parsed.spans == ()
    assert parsed.unaligned == ()
    parsed = parse_entity_output("x", "[/CL]x[CL]")
    assert parsed.spans == ()


def test_parse_entity_empty_pair_is_false_positive():
    parsed = parse_entity_output("abc", "a[CL][/CL]bc")
    assert parsed.spans == ()
    assert parsed.unaligned == ("",)


def test_parse_entity_crossing_round_trip():
    parsed = parse_entity_output("ab cd ef",
                                 "[CL#1]ab [CL#2]cd[/CL#1] ef[/CL#2]")
    assert parsed.unaligned == ()
    assert sorted((s.begin, s.end) for s in parsed.spans) == [(0, 5), (3, 8)]


def test_parse_relation_basic():
    parsed = parse_relation_output("[REL] 12 g/dL [TO] hemoglobin")
    assert parsed.pairs == (("12 g/dL", "hemoglobin"),)
    assert parsed.malformed == 0


def test_parse_relation_empty():
    assert parse_relation_output("").pairs == ()
    assert parse_relation_output("").malformed == 0


def test_parse_relation_malformed_counted():
    parsed = parse_relation_output("[REL] a [TO]")
    assert parsed.pairs == ()
    assert parsed.malformed == 1
    parsed = parse_relation_output("[REL] a [TO] b ; junk ; [REL] c [TO] d")
    assert parsed.pairs == (("a", "b"), ("c", "d"))
    assert parsed.malformed == 1


def test_score_identity_is_one():
    gold = [Span(0, 3), Span(5, 9)]
    prf = score_entities(gold, list(gold))
    assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)


def test_score_half_overlap():
    prf = score_entities([Span(0, 1), Span(2, 3)], [Span(0, 1), Span(4, 5)])
    assert (prf.precision, prf.recall, prf.f1) == (0.5, 0.5, 0.5)
    assert (prf.tp, prf.fp, prf.fn) == (1, 1, 1)


def test_score_empty_conventions():
    empty = score_entities([], [])
    assert (empty.precision, empty.recall, empty.f1) == (1.0, 1.0, 1.0)
    none_predicted = score_entities([Span(0, 1)], [])
    assert (none_predicted.precision, none_predicted.recall,
            none_predicted.f1) == (0.0, 0.0, 0.0)
    spurious_only = score_entities([], [Span(0, 1)])
    assert (spurious_only.precision, spurious_only.recall,
            spurious_only.f1) == (0.0, 0.0, 0.0)


def test_score_multiset_duplicates_consume_matches():
    gold = [Span(0, 1), Span(0, 1)]
    prf = score_entities(gold, [Span(0, 1)])
    assert (prf.tp, prf.fp, prf.fn) == (1, 0, 1)
    prf = score_entities([Span(0, 1)], [Span(0, 1), Span(0, 1)])
    assert (prf.tp, prf.fp, prf.fn) == (1, 1, 0)


def test_unaligned_predictions_are_false_positives():
    parse = EntityParse(spans=(Span(0, 1),), unaligned=("ghost",))
    prf = score_entities([Span(0, 1)], parse)
    assert (prf.tp, prf.fp, prf.fn) == (1, 1, 0)


def test_score_relations_normalizes_whitespace_not_case():
    gold = [("12  g/dL", "hemoglobin")]
    assert score_relations(gold, [("12 g/dL", "hemoglobin")]).f1 == 1.0
    assert score_relations(gold, [("12 g/dL", "Hemoglobin")]).f1 == 0.0


def test_score_relations_offsets_mode():
    gold = [(Span(0, 3), Span(5, 8))]
    assert score_relations_offsets(gold, list(gold)).f1 == 1.0
    assert score_relations_offsets(gold, [(Span(0, 3), Span(5, 9))]).f1 == 0.0


def test_overlap_scoring_behind_flag():
    gold = [Span(0, 10)]
    pred = [Span(0, 8)]
    assert score_entities(gold, pred).f1 == 0.0
    assert score_entities_overlap(gold, pred, threshold=0.5).f1 == 1.0
    assert score_entities_overlap(gold, pred, threshold=0.9).f1 == 0.0


def test_scorer_matches_brute_force_matcher():
    from .oracles import brute_force_prf

    rng = random.Random(31)
    for _ in range(300):
        gold = [(rng.randint(0, 4), rng.randint(5, 8))
                for _ in range(rng.randint(0, 6))]
        pred = [(rng.randint(0, 4), rng.randint(5, 8))
                for _ in range(rng.randint(0, 6))]
        expected = brute_force_prf(gold, pred)
        got = score_entities([Span(*g) for g in gold],
                             [Span(*p) for p in pred])
        assert (got.tp, got.fp, got.fn) == (expected.tp, expected.fp,
                                            expected.fn)


def test_precision_monotonicity():
    rng = random.Random(13)
    for _ in range(100):
        gold = [Span(i, i + 1) for i in range(rng.randint(0, 5))]
        pred = [Span(i, i + 1) for i in range(rng.randint(0, 5))]
        base = score_entities(gold, pred)
        spiked = score_entities(gold, pred + [Span(90, 91)])
        assert spiked.precision <= base.precision


def test_round_trip_both_tasks_on_fixture_corpus():
    for doc in build_corpus3():
        for unit in ("sentence", "document"):
            for pair in make_training_sequences(doc, Task.ENTITY, unit=unit):
                parsed = parse_entity_output(pair.input, pair.target)
                gold = [a.span for a in doc.annotations
                        if a.category is Category.CLINICAL_ENTITY
                        and a.span is not None
                        and pair.span.begin <= a.span.begin
                        and a.span.end <= pair.span.end]
                local = sorted((s.begin - pair.span.begin,
                                s.end - pair.span.begin) for s in gold)
                assert parsed.unaligned == ()
                assert sorted((s.begin, s.end) for s in parsed.spans) == local
            for pair in make_training_sequences(doc, Task.RELATION, unit=unit):
                parsed = parse_relation_output(pair.target)
                assert parsed.malformed == 0
                assert score_relations(parsed.pairs, parsed.pairs).f1 == 1.0
