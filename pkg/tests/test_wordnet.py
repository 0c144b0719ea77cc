import pytest

from clinproj.exceptions import LexiconError
from clinproj.wordnet import Lexicon, load_wordnet, normalize_lemma


def test_fixture_synset_membership(wordnet_dir):
    lex = load_wordnet(wordnet_dir)
    assert lex.synonyms("illness") >= {"disease", "sickness"}
    assert lex.synonyms("disease") == {"disease", "illness", "sickness"}


def test_identity_fallback_for_unknown_lemma(wordnet_dir):
    lex = load_wordnet(wordnet_dir)
    assert lex.synonyms("levofloxacin") == {"levofloxacin"}


def test_share_synset(wordnet_dir):
    lex = load_wordnet(wordnet_dir)
    assert lex.share_synset("disease", "illness")
    assert not lex.share_synset("headache", "knee")
    # hypernymy is not synonymy: headache points at the illness synset
    # but is not a member of it
    assert not lex.share_synset("headache", "disease")


def test_multiword_lemma_normalization(wordnet_dir):
    lex = load_wordnet(wordnet_dir)
    assert normalize_lemma("Renal  failure") == "renal_failure"
    assert lex.share_synset("renal failure", "kidney failure")


def test_verb_entries_loaded(wordnet_dir):
    lex = load_wordnet(wordnet_dir)
    assert lex.share_synset("vomit", "regurgitate")


def test_empty_directory_is_load_error(tmp_path):
    with pytest.raises(LexiconError, match="no WordNet"):
        load_wordnet(tmp_path)


def test_missing_counterpart_file_named(tmp_path):
    (tmp_path / "index.noun").write_text("disease n 1 1 @ 1 1 1\n")
    with pytest.raises(LexiconError, match="data.noun"):
        load_wordnet(tmp_path)


def test_corrupt_data_line_names_file_and_line(tmp_path):
    (tmp_path / "data.noun").write_text("  1 header\nnot a valid line\n")
    (tmp_path / "index.noun").write_text("")
    with pytest.raises(LexiconError, match=r"data\.noun:2"):
        load_wordnet(tmp_path)


def test_index_referencing_missing_synset(tmp_path):
    (tmp_path / "data.noun").write_text(
        "00000001 26 n 01 disease 0 000 | gloss\n")
    (tmp_path / "index.noun").write_text("disease n 1 0 1 1 99999999\n")
    with pytest.raises(LexiconError, match="99999999"):
        load_wordnet(tmp_path)


def test_empty_lexicon_identity():
    lex = Lexicon.empty()
    assert lex.synonyms("anything here") == {"anything_here"}
    assert not lex.share_synset("a", "a")
