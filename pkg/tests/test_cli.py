import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from clinproj.cli import cli

from .conftest import write_corpus3

runner = CliRunner()


def test_convert_round_trip_is_byte_identical(tmp_path, fig3_path):
    canon = tmp_path / "canon.xmi"
    as_json = tmp_path / "doc.json"
    back = tmp_path / "back.xmi"
    assert runner.invoke(cli, ["convert", "--in", str(fig3_path),
                               "--out", str(canon)]).exit_code == 0
    assert runner.invoke(cli, ["convert", "--in", str(canon),
                               "--out", str(as_json)]).exit_code == 0
    assert runner.invoke(cli, ["convert", "--in", str(as_json),
                               "--out", str(back)]).exit_code == 0
    assert back.read_bytes() == canon.read_bytes()
    manifest = json.loads((tmp_path / "back.xmi.manifest.json").read_text())
    assert manifest["command"] == "convert"
    assert "package_version" in manifest


def test_project_mock_succeeds_and_reports(tmp_path, mock3_path):
    corpus = tmp_path / "src"
    write_corpus3(corpus)
    out = tmp_path / "out"
    result = runner.invoke(cli, [
        "project", "--in", str(corpus), "--out", str(out),
        "--target-lang", "it", "--mock", str(mock3_path)])
    assert result.exit_code == 0, result.output
    assert (out / "EN001.xmi").exists()
    assert (out / "_report.json").exists()
    assert (out / "candidates" / "EN001.json").exists()
    assert (tmp_path / "out.manifest.json").exists()
    assert (tmp_path / "out.audit.jsonl").exists()
    assert "mismatched TOT" in result.output


def test_project_failure_exits_one(tmp_path, fig3_path):
    corpus = tmp_path / "src"
    corpus.mkdir()
    (corpus / "EN103007.xmi").write_bytes(fig3_path.read_bytes())
    mock = tmp_path / "mock.json"
    mock.write_text('{"rules": []}')  # no canned response for the doc
    out = tmp_path / "out"
    result = runner.invoke(cli, [
        "project", "--in", str(corpus), "--out", str(out),
        "--target-lang", "it", "--mock", str(mock)])
    assert result.exit_code == 1


def test_qa_recomputes_report(tmp_path, mock3_path):
    corpus = tmp_path / "src"
    write_corpus3(corpus)
    out = tmp_path / "out"
    runner.invoke(cli, ["project", "--in", str(corpus), "--out", str(out),
                        "--target-lang", "it", "--mock", str(mock3_path)])
    qa_out = tmp_path / "qa"
    result = runner.invoke(cli, [
        "qa", "--candidates", str(out / "candidates"), "--out", str(qa_out),
        "--mock", str(mock3_path)])
    assert result.exit_code == 0, result.output
    original = json.loads((out / "_report.json").read_text())
    recomputed = json.loads((qa_out / "_report.json").read_text())
    assert recomputed["totals"] == original["totals"]


def test_stats_corpus(tmp_path):
    corpus = tmp_path / "src"
    write_corpus3(corpus)
    result = runner.invoke(cli, ["stats", "corpus", "--in", str(corpus),
                                 "--out", str(tmp_path / "tables" / "corpus")])
    assert result.exit_code == 0, result.output
    assert "en" in result.output
    assert (tmp_path / "tables" / "corpus.csv").exists()


def test_stats_qa_from_report_files(tmp_path, mock3_path):
    corpus = tmp_path / "src"
    write_corpus3(corpus)
    out = tmp_path / "out"
    runner.invoke(cli, ["project", "--in", str(corpus), "--out", str(out),
                        "--target-lang", "it", "--mock", str(mock3_path)])
    result = runner.invoke(cli, ["stats", "qa", "--report",
                                 str(out / "_report.json")])
    assert result.exit_code == 0, result.output
    assert "it" in result.output


def test_make_training_and_score_gold_vs_gold(tmp_path):
    corpus = tmp_path / "src"
    write_corpus3(corpus)
    gold = tmp_path / "entity.jsonl"
    result = runner.invoke(cli, ["make-training", "--in", str(corpus),
                                 "--task", "entity", "--out", str(gold)])
    assert result.exit_code == 0, result.output
    lines = [json.loads(l) for l in gold.read_text().splitlines()]
    assert all(set(l) == {"task", "input", "target", "doc_id"} for l in lines)

    score_out = tmp_path / "score.json"
    result = runner.invoke(cli, ["score", "--task", "entity",
                                 "--gold", str(gold), "--pred", str(gold),
                                 "--out", str(score_out)])
    assert result.exit_code == 0, result.output
    assert json.loads(score_out.read_text())["f1"] == 1.0

    rel_gold = tmp_path / "relation.jsonl"
    runner.invoke(cli, ["make-training", "--in", str(corpus),
                        "--task", "relation", "--out", str(rel_gold)])
    result = runner.invoke(cli, ["score", "--task", "relation",
                                 "--gold", str(rel_gold),
                                 "--pred", str(rel_gold)])
    assert result.exit_code == 0
    assert "1.0000" in result.output


def test_unknown_flag_is_usage_error(tmp_path):
    result = runner.invoke(cli, ["project", "--frobnicate"])
    assert result.exit_code == 2


def test_unknown_category_is_usage_error(tmp_path, mock3_path):
    corpus = tmp_path / "src"
    write_corpus3(corpus)
    result = runner.invoke(cli, [
        "project", "--in", str(corpus), "--out", str(tmp_path / "out"),
        "--target-lang", "it", "--mock", str(mock3_path),
        "--qa-categories", "NOPE"])
    assert result.exit_code == 2


def test_determinism_two_runs_identical_trees(tmp_path, mock3_path):
    corpus = tmp_path / "src"
    write_corpus3(corpus)
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        result = runner.invoke(cli, [
            "project", "--in", str(corpus), "--out", str(out),
            "--target-lang", "it", "--mock", str(mock3_path)])
        assert result.exit_code == 0
        outs.append(out)
    tree1 = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*")
                   if p.is_file())
    tree2 = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*")
                   if p.is_file())
    assert tree1 == tree2
    for rel in tree1:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes()
