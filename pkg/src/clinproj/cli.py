"""Command-line entry point wiring all modules into subcommands.

Exit codes: 0 on full success, 1 when any per-item failure occurred,
2 on usage or configuration errors. Every run writes a machine-readable
manifest (config hash, versions, timings) next to its output; no
subcommand writes outside its ``--out`` path and the journal, audit and
manifest paths.
"""

from __future__ import annotations

import json
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__, corpusio, ieval, stats
from .config import AppConfig
from .exceptions import ClinprojError, ConfigError
from .ieval import Task
from .model import Category
from .pipeline import (ProjectionConfig, ProjectionReport, project_corpus,
                       rescore_candidates)
from .translate import ExemplarSet
from .wordnet import Lexicon, load_wordnet


def _manifest_path(explicit: str | None, anchor: str | Path) -> Path:
    if explicit:
        return Path(explicit)
    anchor = Path(anchor)
    return anchor.parent / (anchor.name + ".manifest.json")


def _write_manifest(path: Path, command: str, params: dict,
                    config_hash: str | None, started: float) -> None:
    manifest = {
        "command": command,
        "params": params,
        "config_hash": config_hash,
        "package_version": __version__,
        "python_version": platform.python_version(),
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "duration_s": round(time.time() - started, 3),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, ensure_ascii=False, indent=2,
                               sort_keys=True) + "\n", encoding="utf-8")


def _load_lexicon(wordnet_dir: str | None) -> Lexicon:
    if wordnet_dir is None:
        return Lexicon.empty()
    return load_wordnet(wordnet_dir)


def _parse_categories(spec: str | None) -> tuple[Category, ...]:
    if not spec or spec.lower() == "all":
        return tuple(Category)
    out = []
    for name in spec.split(","):
        try:
            out.append(Category(name.strip().upper()))
        except ValueError:
            raise click.UsageError(f"unknown category {name.strip()!r}")
    return tuple(out)


@click.group()
@click.version_option(version=__version__)
def cli() -> None:
    """Cross-lingual clinical annotation projection toolkit."""


@cli.command()
@click.option("--in", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Input file.")
@click.option("--out", "output_path", required=True, type=click.Path(),
              help="Output file; format chosen by extension (.xmi/.json).")
@click.option("--manifest", default=None, type=click.Path(),
              help="Manifest path (default: <out>.manifest.json).")
def convert(input_path: str, output_path: str, manifest: str | None) -> None:
    """Convert a standoff file between XMI and canonical JSON."""
    started = time.time()
    doc = corpusio.read_document(input_path)
    corpusio.write_document(doc, output_path)
    _write_manifest(_manifest_path(manifest, output_path), "convert",
                    {"in": str(input_path), "out": str(output_path)},
                    None, started)
    click.echo(f"wrote {output_path}")


@cli.command()
@click.option("--in", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory of source standoff files.")
@click.option("--out", "output_dir", required=True, type=click.Path(),
              help="Output directory for projected files and reports.")
@click.option("--target-lang", required=True, help="Target language code.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON config file (endpoint, model, limits).")
@click.option("--n-best", default=4, show_default=True,
              help="Number of translation candidates per request.")
@click.option("--mock", "mock_fixture", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Mock backend fixture; run offline and deterministically.")
@click.option("--wordnet", "wordnet_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="WordNet 3.x database directory for synonym matching.")
@click.option("--exemplars", "exemplars_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Exemplar prompt file (default: bundled set).")
@click.option("--qa-categories", default="all", show_default=True,
              help="Comma-separated categories to semantic-check.")
@click.option("--max-chars", default=0, show_default=True,
              help="Chunk documents longer than this (0 disables).")
@click.option("--jobs", default=1, show_default=True,
              help="Documents processed concurrently.")
@click.option("--audit-log", default=None, type=click.Path(),
              help="Backend audit log (default: <out>.audit.jsonl).")
@click.option("--manifest", default=None, type=click.Path())
def project(input_dir: str, output_dir: str, target_lang: str,
            config_path: str | None, n_best: int, mock_fixture: str | None,
            wordnet_dir: str | None, exemplars_path: str | None,
            qa_categories: str, max_chars: int, jobs: int,
            audit_log: str | None, manifest: str | None) -> None:
    """Project a source corpus into a target language, flagging transfer
    errors for review."""
    started = time.time()
    app_config = AppConfig.load(config_path)
    audit_path = Path(audit_log) if audit_log else (
        Path(output_dir).parent / (Path(output_dir).name + ".audit.jsonl"))
    client = app_config.build_client(mock_fixture=mock_fixture,
                                     audit_path=audit_path)
    exemplars = (ExemplarSet.from_file(exemplars_path)
                 if exemplars_path else None)
    cfg = ProjectionConfig(
        target_language=target_lang, n_best=n_best, exemplars=exemplars,
        qa_categories=_parse_categories(qa_categories),
        max_chars=max_chars, jobs=jobs)
    report = project_corpus(input_dir, output_dir, cfg, client,
                            _load_lexicon(wordnet_dir))
    _write_manifest(
        _manifest_path(manifest, output_dir), "project",
        {"in": str(input_dir), "out": str(output_dir),
         "target_lang": target_lang, "n_best": n_best,
         "mock": mock_fixture, "qa_categories": qa_categories,
         "max_chars": max_chars, "jobs": jobs},
        app_config.config_hash(), started)
    click.echo(stats.render_qa_table([report]), nl=False)
    if report.failed:
        for doc in report.failed:
            click.echo(f"FAILED {doc.doc_id}: {doc.error}", err=True)
        sys.exit(1)


@cli.command()
@click.option("--candidates", "candidates_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Candidates directory written by a project run.")
@click.option("--out", "output_dir", required=True, type=click.Path(),
              help="Directory for the recomputed report.")
@click.option("--target-lang", default=None,
              help="Override language label (default: from sidecars).")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--mock", "mock_fixture", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--wordnet", "wordnet_dir", default=None,
              type=click.Path(exists=True, file_okay=False))
@click.option("--qa-categories", default="all", show_default=True)
@click.option("--audit-log", default=None, type=click.Path())
@click.option("--manifest", default=None, type=click.Path())
def qa(candidates_dir: str, output_dir: str, target_lang: str | None,
       config_path: str | None, mock_fixture: str | None,
       wordnet_dir: str | None, qa_categories: str,
       audit_log: str | None, manifest: str | None) -> None:
    """Re-run tag QA and re-ranking on stored translation candidates."""
    started = time.time()
    app_config = AppConfig.load(config_path)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    audit_path = Path(audit_log) if audit_log else (
        out.parent / (out.name + ".audit.jsonl"))
    client = app_config.build_client(mock_fixture=mock_fixture,
                                     audit_path=audit_path)
    lexicon = _load_lexicon(wordnet_dir)
    categories = _parse_categories(qa_categories)

    docs = []
    language = target_lang
    for path in sorted(Path(candidates_dir).glob("*.json")):
        sidecar = json.loads(path.read_text(encoding="utf-8"))
        language = language or sidecar.get("target_language")
        docs.append(rescore_candidates(sidecar, client, lexicon, categories))
    report = ProjectionReport(target_language=language or "xx",
                              documents=tuple(sorted(docs,
                                                     key=lambda d: d.doc_id)))
    (out / "_report.json").write_text(
        json.dumps(report.to_json_dict(), ensure_ascii=False, indent=2,
                   sort_keys=True) + "\n", encoding="utf-8")
    (out / "_report.txt").write_text(stats.render_qa_table([report]),
                                    encoding="utf-8")
    _write_manifest(_manifest_path(manifest, output_dir), "qa",
                    {"candidates": str(candidates_dir), "out": str(output_dir),
                     "qa_categories": qa_categories},
                    app_config.config_hash(), started)
    click.echo(stats.render_qa_table([report]), nl=False)


@cli.group(name="stats")
def stats_group() -> None:
    """Corpus and QA statistics tables."""


@stats_group.command(name="corpus")
@click.option("--in", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "output_prefix", default=None, type=click.Path(),
              help="Write <prefix>.txt/.csv/.json next to printing.")
@click.option("--manifest", default=None, type=click.Path())
def stats_corpus(input_dir: str, output_prefix: str | None,
                 manifest: str | None) -> None:
    """Per-language document/token/annotation counts."""
    started = time.time()
    result = stats.corpus_stats(input_dir)
    click.echo(result.to_text(), nl=False)
    if output_prefix:
        prefix = Path(output_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        prefix.with_suffix(".txt").write_text(result.to_text(), encoding="utf-8")
        prefix.with_suffix(".csv").write_text(result.to_csv(), encoding="utf-8")
        prefix.with_suffix(".json").write_text(
            json.dumps(result.to_json_dict(), ensure_ascii=False, indent=2,
                       sort_keys=True) + "\n", encoding="utf-8")
        _write_manifest(_manifest_path(manifest, prefix), "stats corpus",
                        {"in": str(input_dir), "out": str(output_prefix)},
                        None, started)


@stats_group.command(name="qa")
@click.option("--report", "report_paths", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="report.json files from project/qa runs (repeatable).")
@click.option("--out", "output_prefix", default=None, type=click.Path())
@click.option("--manifest", default=None, type=click.Path())
def stats_qa(report_paths: tuple[str, ...], output_prefix: str | None,
             manifest: str | None) -> None:
    """Mismatch/missing tables grouped CL/EV/RML/Oth./TOT."""
    started = time.time()
    reports = [ProjectionReport.load(p) for p in report_paths]
    result = stats.qa_stats(reports)
    click.echo(result.to_text(), nl=False)
    if output_prefix:
        prefix = Path(output_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        prefix.with_suffix(".txt").write_text(result.to_text(), encoding="utf-8")
        prefix.with_suffix(".csv").write_text(result.to_csv(), encoding="utf-8")
        _write_manifest(_manifest_path(manifest, prefix), "stats qa",
                        {"reports": [str(p) for p in report_paths],
                         "out": str(output_prefix)},
                        None, started)


@cli.command(name="make-training")
@click.option("--in", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--task", required=True,
              type=click.Choice([t.value for t in Task]))
@click.option("--out", "output_path", required=True, type=click.Path())
@click.option("--unit", default="sentence", show_default=True,
              type=click.Choice(["sentence", "document"]))
@click.option("--manifest", default=None, type=click.Path())
def make_training(input_dir: str, task: str, output_path: str, unit: str,
                  manifest: str | None) -> None:
    """Generate text-to-text training pairs as JSONL."""
    started = time.time()
    pairs = []
    for _, doc in corpusio.read_corpus(input_dir):
        pairs.extend(ieval.make_training_sequences(doc, Task(task), unit=unit))
    Path(output_path).parent.mkdir(parents=True, exist_ok=True)
    ieval.write_training_jsonl(pairs, output_path)
    _write_manifest(_manifest_path(manifest, output_path), "make-training",
                    {"in": str(input_dir), "task": task, "unit": unit,
                     "out": str(output_path)},
                    None, started)
    click.echo(f"wrote {len(pairs)} pairs to {output_path}")


@cli.command()
@click.option("--task", required=True,
              type=click.Choice([t.value for t in Task]))
@click.option("--gold", "gold_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Gold JSONL (make-training output).")
@click.option("--pred", "pred_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Prediction JSONL, aligned by line; uses the "
                   "'generated' field, falling back to 'target'.")
@click.option("--out", "output_path", default=None, type=click.Path())
@click.option("--manifest", default=None, type=click.Path())
def score(task: str, gold_path: str, pred_path: str,
          output_path: str | None, manifest: str | None) -> None:
    """Exact-match micro-averaged P/R/F1 over prediction files."""
    started = time.time()
    gold_rows = ieval.read_jsonl(gold_path)
    pred_rows = ieval.read_jsonl(pred_path)
    if len(gold_rows) != len(pred_rows):
        raise click.UsageError(
            f"gold has {len(gold_rows)} rows, predictions {len(pred_rows)}")
    tp = fp = fn = 0
    malformed = 0
    for gold_row, pred_row in zip(gold_rows, pred_rows):
        generated = pred_row.get("generated", pred_row.get("target", ""))
        if Task(task) is Task.ENTITY:
            input_text = gold_row["input"]
            gold_parse = ieval.parse_entity_output(input_text,
                                                   gold_row["target"])
            pred_parse = ieval.parse_entity_output(input_text, generated)
            result = ieval.score_entities(gold_parse.spans, pred_parse)
        else:
            gold_parse = ieval.parse_relation_output(gold_row["target"])
            pred_parse = ieval.parse_relation_output(generated)
            malformed += pred_parse.malformed
            result = ieval.score_relations(gold_parse.pairs, pred_parse)
        tp += result.tp
        fp += result.fp
        fn += result.fn
    prf = ieval.PRF.from_counts(tp, fp, fn)
    header = f"{'P':>8}  {'R':>8}  {'F1':>8}"
    values = (f"{prf.precision:8.4f}  {prf.recall:8.4f}  {prf.f1:8.4f}")
    click.echo(header)
    click.echo(values)
    if malformed:
        click.echo(f"malformed predicted items dropped: {malformed}")
    if output_path:
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        Path(output_path).write_text(
            json.dumps({**prf.to_json_dict(), "malformed_dropped": malformed},
                       ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        _write_manifest(_manifest_path(manifest, output_path), "score",
                        {"task": task, "gold": str(gold_path),
                         "pred": str(pred_path), "out": str(output_path)},
                        None, started)


@cli.group()
def review() -> None:
    """Human revision service."""


@review.command()
@click.option("--corpus", "corpus_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory of projected standoff files.")
@click.option("--journal", "journal_path", required=True, type=click.Path(),
              help="Append-only decision journal (replayed on start).")
@click.option("--source", "source_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Matching source-language corpus for side-by-side review.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8800, show_default=True)
@click.option("--ui", "ui_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Built review UI to serve at /.")
@click.option("--token", default=None,
              help="Shared token required on mutating endpoints.")
@click.option("--manifest", default=None, type=click.Path())
def serve(corpus_dir: str, journal_path: str, source_dir: str | None,
          host: str, port: int, ui_dir: str | None, token: str | None,
          manifest: str | None) -> None:
    """Start the review API (and UI) over a projected corpus."""
    from .review.service import serve as run_service

    started = time.time()
    _write_manifest(_manifest_path(manifest, journal_path), "review serve",
                    {"corpus": str(corpus_dir), "journal": str(journal_path),
                     "source": source_dir, "host": host, "port": port},
                    None, started)
    run_service(corpus_dir, journal_path, source_dir=source_dir, host=host,
                port=port, ui_dir=ui_dir, token=token)


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.UsageError as e:
        e.show()
        sys.exit(2)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(130)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    except ClinprojError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
