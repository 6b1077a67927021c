"""Smoke tests over the checked-in fixture files: the primary pipeline must
run end to end from pre-generated corpora and embedding bundles, with no
encoder in the loop."""

from pathlib import Path

from srlproj.cli import main
from srlproj.corpus import load_conll09, write_conll09
from srlproj.embeddings import load_bundle, pair_bundles
from srlproj.projection import ProjectionConfig, project_corpus

DATA = Path(__file__).parent / "data"


def test_fixture_round_trips():
    text = (DATA / "source.conll").read_text(encoding="utf-8")
    assert write_conll09(load_conll09(DATA / "source.conll")) == text
    bundle = load_bundle(DATA / "source.embjsonl")
    assert bundle.model_id == "designed"
    assert len(bundle.encodings) == 5


def test_fixture_pipeline_runs_from_files(tmp_path, capsys):
    quads = pair_bundles(
        load_bundle(DATA / "source.embjsonl"),
        load_bundle(DATA / "target.embjsonl"),
        load_conll09(DATA / "source.conll"),
        load_conll09(DATA / "target.conll"),
    )
    sentences, report = project_corpus(quads, ProjectionConfig())
    assert len(sentences) == 5
    totals = report.totals()
    assert totals["predicates_projected"] >= 3  # identity + separable prefix
    assert totals["predicates_dropped"]["no_verbal_candidate"] == 2

    out = tmp_path / "proj.conll"
    code = main(["project",
                 "--src", str(DATA / "source.conll"),
                 "--tgt", str(DATA / "target.conll"),
                 "--src-emb", str(DATA / "source.embjsonl"),
                 "--tgt-emb", str(DATA / "target.embjsonl"),
                 "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    assert write_conll09(sentences) == out.read_text(encoding="utf-8")
