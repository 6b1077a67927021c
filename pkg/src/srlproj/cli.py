"""Command-line pipeline: align, project, evaluate, export-tasks, merge,
agreement, density, serve, embed.

Defaults for alignment/projection parameters can come from a TOML config file
(--config); explicit flags always win. All report outputs are also written as
JSON beside the primary artifact, and nothing embeds timestamps, so reruns on
identical inputs produce identical bytes.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import agreement as agreement_mod
from . import curation as curation_mod
from .alignment import AlignmentConfig, Mode, align_sentence_pair
from .corpus import load_conll09, save_conll09
from .embeddings import load_bundle, pair_bundles
from .errors import SrlProjError
from .evaluation import evaluate_projection, label_density
from .projection import (SENSE_COPY_SOURCE, SENSE_TARGET_LEMMA,
                         ProjectionConfig, project_corpus)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as handle:
        return tomllib.load(handle)


def _alignment_config(config: dict, k: int | None, mode: str | None) -> AlignmentConfig:
    section = config.get("alignment", {})
    return AlignmentConfig(
        k=k if k is not None else int(section.get("k", 2)),
        mode=Mode(mode if mode is not None else section.get("mode", "s2t")),
    )


def _projection_config(config: dict, k, mode, no_filters, verbal_pos,
                       sense_policy) -> ProjectionConfig:
    section = config.get("projection", {})
    if no_filters:
        filters = False
    else:
        filters = bool(section.get("filters", True))
    if verbal_pos is not None:
        tags = frozenset(t.strip() for t in verbal_pos.split(",") if t.strip())
    else:
        tags = frozenset(section.get("verbal_pos", ["VERB", "AUX"]))
    return ProjectionConfig(
        verbal_pos_tags=tags,
        alignment=_alignment_config(config, k, mode),
        filters_enabled=filters,
        sense_policy=sense_policy or section.get("sense_policy", SENSE_COPY_SOURCE),
    )


def _load_pairs(src, tgt, src_emb, tgt_emb):
    return pair_bundles(load_bundle(src_emb), load_bundle(tgt_emb),
                        load_conll09(src), load_conll09(tgt))


@click.group()
def cli():
    """Cross-lingual projection of head-based semantic-role annotations."""


common_inputs = [
    click.option("--src", required=True, type=click.Path(exists=True),
                 help="source CoNLL-2009 corpus"),
    click.option("--tgt", required=True, type=click.Path(exists=True),
                 help="target CoNLL-2009 corpus (POS-tagged)"),
    click.option("--src-emb", required=True, type=click.Path(exists=True),
                 help="source .embjsonl[.gz] bundle"),
    click.option("--tgt-emb", required=True, type=click.Path(exists=True),
                 help="target .embjsonl[.gz] bundle"),
    click.option("--config", type=click.Path(exists=True),
                 help="TOML config with [alignment]/[projection] defaults"),
    click.option("--k", type=int, default=None, help="top-k piece pairs"),
    click.option("--mode", type=click.Choice(["s2t", "t2s", "inter"]),
                 default=None, help="alignment mode"),
]


def add_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@cli.command()
@add_options(common_inputs)
@click.option("--out", required=True, type=click.Path(),
              help="candidate-table dump, one JSON line per sentence pair")
def align(src, tgt, src_emb, tgt_emb, config, k, mode, out):
    """Dump word-alignment candidate tables for inspection."""
    cfg = _alignment_config(_load_config(config), k, mode)
    quads = _load_pairs(src, tgt, src_emb, tgt_emb)
    with open(out, "w", encoding="utf-8") as handle:
        for src_sent, _tgt_sent, src_enc, tgt_enc in quads:
            table = align_sentence_pair(src_enc, tgt_enc, cfg)
            record = {
                "sent_id": src_sent.sent_id,
                "mode": cfg.mode.value,
                "k": cfg.k,
                "candidates": table.to_record(),
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    click.echo(f"wrote {len(quads)} candidate tables to {out}")


@cli.command()
@add_options(common_inputs)
@click.option("--no-filters", is_flag=True, help="disable the verbal POS filter")
@click.option("--verbal-pos", default=None,
              help="comma-separated verbal POS tags (default VERB,AUX)")
@click.option("--sense-policy",
              type=click.Choice([SENSE_COPY_SOURCE, SENSE_TARGET_LEMMA]),
              default=None)
@click.option("--jobs", type=int, default=1, help="parallel sentence pairs")
@click.option("--out", required=True, type=click.Path(),
              help="projected CoNLL-2009 corpus")
def project(src, tgt, src_emb, tgt_emb, config, k, mode, no_filters,
            verbal_pos, sense_policy, jobs, out):
    """Project source predicate/argument labels onto the target corpus."""
    cfg = _projection_config(_load_config(config), k, mode, no_filters,
                             verbal_pos, sense_policy)
    quads = _load_pairs(src, tgt, src_emb, tgt_emb)
    sentences, report = project_corpus(quads, cfg, jobs=jobs)
    save_conll09(sentences, out)
    report_path = Path(out).with_suffix(Path(out).suffix + ".report.json")
    report_path.write_text(report.to_json() + "\n", encoding="utf-8")
    click.echo(report.to_table())
    click.echo(f"wrote {len(sentences)} sentences to {out}")
    click.echo(f"report: {report_path}")


@cli.command()
@click.option("--projected", required=True, type=click.Path(exists=True))
@click.option("--gold", required=True, type=click.Path(exists=True))
@click.option("--strict-sense", is_flag=True,
              help="require matching sense strings on predicates")
@click.option("--json-out", type=click.Path(), default=None,
              help="where to write the JSON report "
                   "(default: <projected>.eval.json)")
def evaluate(projected, gold, strict_sense, json_out):
    """Score a projected corpus against a gold corpus."""
    report = evaluate_projection(load_conll09(projected), load_conll09(gold),
                                 strict_sense=strict_sense)
    path = Path(json_out) if json_out else Path(projected + ".eval.json")
    path.write_text(report.to_json() + "\n", encoding="utf-8")
    click.echo(report.to_table())
    click.echo(f"report: {path}")


@cli.command("export-tasks")
@click.option("--src", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True))
@click.option("--verbal-pos", default="VERB,AUX",
              help="POS tags defining verbal source predicates")
@click.option("--out", required=True, type=click.Path())
def export_tasks_cmd(src, tgt, verbal_pos, out):
    """Write annotation tasks for a parallel test corpus."""
    tags = frozenset(t.strip() for t in verbal_pos.split(",") if t.strip())
    tasks = curation_mod.export_tasks(load_conll09(src), load_conll09(tgt),
                                      verbal_pos_tags=tags)
    with open(out, "w", encoding="utf-8") as handle:
        curation_mod.write_tasks(tasks, handle)
    click.echo(f"wrote {len(tasks)} tasks to {out}")


@cli.command()
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--responses", required=True, type=click.Path(exists=True))
@click.option("--tgt", required=True, type=click.Path(exists=True),
              help="target corpus with dependency parses")
@click.option("--quality-threshold", type=int, default=None,
              help="drop sentences rated at or below this (default 2)")
@click.option("--config", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(),
              help="gold target CoNLL-2009 corpus")
def merge(tasks_path, responses, tgt, quality_threshold, config, out):
    """Merge validated annotator responses into a gold test corpus."""
    conf = _load_config(config)
    threshold = (quality_threshold if quality_threshold is not None
                 else int(conf.get("curation", {}).get("quality_threshold", 2)))
    with open(tasks_path, encoding="utf-8") as handle:
        tasks = curation_mod.read_tasks(handle)
    with open(responses, encoding="utf-8") as handle:
        resp = curation_mod.read_responses(handle)
    gold, report = curation_mod.merge_validated(
        tasks, resp, load_conll09(tgt),
        curation_mod.MergePolicy(quality_threshold=threshold))
    save_conll09(gold, out, explicit_ids=True)
    report_path = Path(out).with_suffix(Path(out).suffix + ".report.json")
    report_path.write_text(report.to_json() + "\n", encoding="utf-8")
    click.echo(f"kept {report.sentences_kept} sentences "
               f"({report.predicates_kept} predicates, "
               f"{report.arguments_kept} arguments) -> {out}")
    if report.adjudication_queue:
        click.echo(f"{len(report.adjudication_queue)} items need adjudication "
                   f"(see {report_path})")


@cli.command("agreement")
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--responses", required=True, type=click.Path(exists=True))
@click.option("--units", type=click.Choice(["predicates", "roles"]),
              default="predicates", show_default=True)
@click.option("--first-n", type=int, default=None,
              help="restrict to the first N tasks (shared calibration sample)")
@click.option("--json-out", type=click.Path(), default=None)
def agreement_cmd(tasks_path, responses, units, first_n, json_out):
    """Inter-annotator agreement (Krippendorff's alpha, binary distance)."""
    with open(tasks_path, encoding="utf-8") as handle:
        tasks = curation_mod.read_tasks(handle)
    with open(responses, encoding="utf-8") as handle:
        resp = curation_mod.read_responses(handle)
    data = agreement_mod.reliability_from_responses(
        tasks, resp, unit_kind=units, first_n=first_n)
    alpha = agreement_mod.krippendorff_alpha(data)
    payload = {"alpha": alpha, "units": units,
               "n_units": len(data.units), "n_coders": len(data.coders)}
    if json_out:
        Path(json_out).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    click.echo(f"alpha[{units}] = {alpha:.4f} "
               f"({len(data.units)} units, {len(data.coders)} coders)")


@cli.command()
@click.option("--corpus", "corpora", multiple=True, required=True,
              metavar="NAME=PATH",
              help="named corpus; the first one is the reference")
@click.option("--top-n", type=int, default=10, show_default=True)
@click.option("--out", required=True, type=click.Path(), help="CSV output")
@click.option("--fig", type=click.Path(), default=None,
              help="bar-chart PNG (default: <out>.png)")
def density(corpora, top_n, out, fig):
    """Label-density comparison across corpora (counts, coverage, chart)."""
    named = []
    for spec in corpora:
        name, sep, path = spec.partition("=")
        if not sep:
            raise click.UsageError(f"--corpus wants NAME=PATH, got {spec!r}")
        named.append((name, load_conll09(path)))
    report = label_density(named, top_n=top_n)
    Path(out).write_text(report.to_csv(), encoding="utf-8")
    json_path = Path(out).with_suffix(Path(out).suffix + ".json")
    json_path.write_text(report.to_json() + "\n", encoding="utf-8")
    fig_path = Path(fig) if fig else Path(str(out) + ".png")
    from .plots import density_figure
    density_figure(report, fig_path)
    for name, ratio in report.coverage().items():
        click.echo(f"coverage {name} vs {report.reference}: {100 * ratio:.1f}%")
    click.echo(f"wrote {out}, {json_path}, {fig_path}")


@cli.command()
@click.option("--tasks", "tasks_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(),
              help="append-only response log (created if missing)")
@click.option("--coders", required=True,
              help="comma-separated coder ids allowed to annotate")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8731, show_default=True)
@click.option("--static-dir", type=click.Path(exists=True), default=None,
              help="built annotation UI to serve under /")
def serve(tasks_path, log_path, coders, host, port, static_dir):
    """Serve annotation tasks to the web UI and persist responses."""
    from .service import TaskStore, make_server
    with open(tasks_path, encoding="utf-8") as handle:
        tasks = curation_mod.read_tasks(handle)
    store = TaskStore(tasks=tasks,
                      coders=[c.strip() for c in coders.split(",") if c.strip()],
                      log_path=Path(log_path))
    server = make_server(store, host=host, port=port,
                         static_dir=Path(static_dir) if static_dir else None)
    click.echo(f"serving {len(tasks)} tasks on http://{host}:{server.server_port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="CoNLL-2009 corpus to embed")
@click.option("--model", required=True,
              help="pretrained masked-LM id or local model directory")
@click.option("--layer", type=int, default=-1, show_default=True,
              help="hidden layer to export (-1 = final)")
@click.option("--language", default="und", show_default=True)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--out", required=True, type=click.Path(),
              help=".embjsonl or .embjsonl.gz bundle")
def embed(input_path, model, layer, language, batch_size, out):
    """Produce an embedding bundle for a corpus with a pretrained encoder."""
    from .embedder import embed_corpus
    count = embed_corpus(input_path, model, layer, out,
                         language=language, batch_size=batch_size)
    click.echo(f"embedded {count} sentences -> {out}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except SrlProjError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
