"""Shared builders for synthetic corpora and designed-similarity bundles."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from srlproj.corpus import Sentence, Token, make_frame, save_conll09
from srlproj.embeddings import EmbeddingBundle, PieceEncoding, save_bundle


def make_sentence(sent_id: str, words, frames=()) -> Sentence:
    """words: list of (form, pos) or (form, pos, head) tuples; frames: list of
    (predicate_index, sense, [(arg_index, role), ...])."""
    tokens = []
    for position, spec in enumerate(words, start=1):
        form, pos = spec[0], spec[1]
        head = spec[2] if len(spec) > 2 else 0
        tokens.append(Token(index=position, form=form, lemma=form.lower(),
                            pos=pos, head=head, deprel="dep" if head else "root"))
    built = tuple(make_frame(p, sense, roles) for p, sense, roles in frames)
    return Sentence(sent_id, tuple(tokens), built)


def designed_encodings(sent_id: str, sim, src_word_index, tgt_word_index,
                       src_pieces=None, tgt_pieces=None,
                       ) -> tuple[PieceEncoding, PieceEncoding]:
    """Encodings whose similarity matrix approximates `sim` up to one global
    positive factor (rescaled when a column norm would exceed 1), which
    preserves every score comparison."""
    design = np.asarray(sim, dtype=np.float64)
    p, q = design.shape
    norms = np.linalg.norm(design, axis=0)
    worst = norms.max() if norms.size else 0.0
    if worst > 1.0:
        design = design / (worst * (1.0 + 1e-9))
    dim = p + q
    src_vectors = np.zeros((p, dim), dtype=np.float32)
    for i in range(p):
        src_vectors[i, i] = 1.0
    tgt_vectors = np.zeros((q, dim), dtype=np.float32)
    for j in range(q):
        column = design[:, j]
        residual = max(0.0, 1.0 - float(column @ column)) ** 0.5
        tgt_vectors[j, :p] = column
        tgt_vectors[j, p + j] = residual
    src_pieces = src_pieces or [f"s{i}" for i in range(p)]
    tgt_pieces = tgt_pieces or [f"t{j}" for j in range(q)]
    return (
        PieceEncoding(sent_id, tuple(src_pieces), tuple(src_word_index), src_vectors),
        PieceEncoding(sent_id, tuple(tgt_pieces), tuple(tgt_word_index), tgt_vectors),
    )


@dataclass
class PairSpec:
    """One synthetic parallel sentence pair with a designed similarity."""

    src: Sentence
    tgt: Sentence
    sim: object
    src_word_index: list[int] = field(default_factory=list)
    tgt_word_index: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.src_word_index:
            self.src_word_index = list(range(1, len(self.src.tokens) + 1))
        if not self.tgt_word_index:
            self.tgt_word_index = list(range(1, len(self.tgt.tokens) + 1))


def build_pair_data(specs: list[PairSpec]):
    """(src corpus, tgt corpus, src bundle, tgt bundle) from pair specs."""
    src_corpus, tgt_corpus, src_encs, tgt_encs = [], [], [], []
    for spec in specs:
        src_enc, tgt_enc = designed_encodings(
            spec.src.sent_id, spec.sim, spec.src_word_index, spec.tgt_word_index)
        src_corpus.append(spec.src)
        tgt_corpus.append(spec.tgt)
        src_encs.append(src_enc)
        tgt_encs.append(tgt_enc)

    # zero-padding to one shared dim leaves every cosine unchanged
    width = max(e.vectors.shape[1] for e in src_encs + tgt_encs)

    def pad(enc: PieceEncoding) -> PieceEncoding:
        vec = enc.vectors
        if vec.shape[1] < width:
            vec = np.pad(vec, ((0, 0), (0, width - vec.shape[1])))
        return PieceEncoding(enc.sent_id, enc.pieces, enc.word_index, vec)

    src_bundle = EmbeddingBundle("src", "designed", -1, width,
                                 tuple(pad(e) for e in src_encs))
    tgt_bundle = EmbeddingBundle("tgt", "designed", -1, width,
                                 tuple(pad(e) for e in tgt_encs))
    return src_corpus, tgt_corpus, src_bundle, tgt_bundle


def write_pair_files(tmp_path: Path, specs: list[PairSpec]) -> dict[str, Path]:
    """Materialize corpora and bundles as files for CLI-level tests."""
    src_corpus, tgt_corpus, src_bundle, tgt_bundle = build_pair_data(specs)
    paths = {
        "src": tmp_path / "src.conll",
        "tgt": tmp_path / "tgt.conll",
        "src_emb": tmp_path / "src.embjsonl",
        "tgt_emb": tmp_path / "tgt.embjsonl",
    }
    save_conll09(src_corpus, paths["src"])
    save_conll09(tgt_corpus, paths["tgt"])
    save_bundle(src_bundle, paths["src_emb"])
    save_bundle(tgt_bundle, paths["tgt_emb"])
    return paths


# ---------------------------------------------------------------------------
# canonical synthetic suites
# ---------------------------------------------------------------------------

def identity_specs() -> list[PairSpec]:
    """Target = source, one-hot piece vectors; includes one nominal source
    predicate that projection must skip."""
    s0 = make_sentence("s0",
                       [("anna", "NOUN", 2), ("eats", "VERB", 0),
                        ("red", "ADJ", 4), ("apples", "NOUN", 2)],
                       [(2, "eat.01", [(1, "A0"), (4, "A1")])])
    s1 = make_sentence("s1",
                       [("the", "DET", 2), ("decision", "NOUN", 3),
                        ("surprised", "VERB", 0), ("anna", "NOUN", 3)],
                       [(2, "decision.01", [(4, "A1")]),
                        (3, "surprise.01", [(2, "A0"), (4, "A1")])])
    specs = []
    for sentence in (s0, s1):
        n = len(sentence.tokens)
        specs.append(PairSpec(src=sentence, tgt=sentence, sim=np.eye(n)))
    return specs


def identity_verbal_gold() -> list[Sentence]:
    """The verbal-frames-only view of the identity corpus."""
    gold = []
    for spec in identity_specs():
        frames = tuple(
            f for f in spec.src.frames
            if spec.src.token(f.predicate_index).pos in ("VERB", "AUX"))
        gold.append(Sentence(spec.src.sent_id, spec.src.tokens, frames))
    return gold


def permutation_specs() -> tuple[list[PairSpec], list[Sentence]]:
    """Parallel corpus whose alignment is a known token permutation encoded in
    the vectors. Returns (specs, permuted gold)."""
    rng = np.random.RandomState(7)
    specs, gold = [], []
    for index in range(3):
        n = int(rng.randint(4, 8))
        forms = [f"w{index}{i}" for i in range(n)]
        pos = ["NOUN"] * n
        pred = int(rng.randint(0, n))
        pos[pred] = "VERB"
        arg_pool = [i for i in range(n) if i != pred]
        rng.shuffle(arg_pool)
        args = sorted(arg_pool[:2])
        src = make_sentence(
            f"p{index}",
            [(forms[i], pos[i]) for i in range(n)],
            [(pred + 1, f"sense{index}.01",
              [(a + 1, role) for a, role in zip(args, ("A0", "A1"))])])
        perm = rng.permutation(n)  # target position j holds source token perm[j]
        tgt = make_sentence(
            f"p{index}",
            [(forms[perm[j]], pos[perm[j]]) for j in range(n)])
        sim = np.zeros((n, n))
        for j in range(n):
            sim[perm[j], j] = 1.0
        inverse = {int(perm[j]) + 1: j + 1 for j in range(n)}
        gold_frames = [(inverse[pred + 1], f"sense{index}.01",
                        [(inverse[a + 1], role)
                         for a, role in zip(args, ("A0", "A1"))])]
        gold.append(make_sentence(
            f"p{index}",
            [(forms[perm[j]], pos[perm[j]]) for j in range(n)],
            gold_frames))
        specs.append(PairSpec(src=src, tgt=tgt, sim=sim))
    return specs, gold


def tradeoff_specs() -> tuple[list[PairSpec], list[Sentence]]:
    """Suite with correct one-to-many alignments where intersective alignment
    provably trades recall for precision. Returns (specs, gold)."""
    sent_a_src = make_sentence(
        "m0",
        [("eat", "VERB", 0), ("apples", "NOUN", 1), ("quickly", "ADV", 1)],
        [(1, "eat.01", [(2, "A1"), (3, "AM-MNR")])])
    sent_a_tgt = make_sentence(
        "m0",
        [("isst", "VERB", 0), ("Äpfel", "NOUN", 1), ("schnell", "ADV", 1)])
    # source pieces: eat | app ##les | quickly   (apples has two pieces)
    sim_a = [
        [1.00, 0.05, 0.95],   # eat
        [0.92, 0.50, 0.20],   # app      -> wrong best candidate isst
        [0.30, 0.90, 0.20],   # ##les    -> correct candidate Äpfel
        [0.20, 0.10, 0.90],   # quickly  -> schnell, but schnell's best is eat
    ]
    gold_a = make_sentence(
        "m0",
        [("isst", "VERB", 0), ("Äpfel", "NOUN", 1), ("schnell", "ADV", 1)],
        [(1, "eat.01", [(2, "A1"), (3, "AM-MNR")])])

    sent_b_src = make_sentence(
        "m1",
        [("sleeps", "VERB", 0), ("soundly", "ADV", 1)],
        [(1, "sleep.01", [(2, "AM-MNR")])])
    sent_b_tgt = make_sentence(
        "m1", [("schläft", "VERB", 0), ("tief", "ADV", 1)])
    sim_b = [
        [0.98, 0.90],   # sleeps outscores soundly even on tief's column
        [0.20, 0.85],
    ]
    gold_b = make_sentence(
        "m1", [("schläft", "VERB", 0), ("tief", "ADV", 1)],
        [(1, "sleep.01", [(2, "AM-MNR")])])

    specs = [
        PairSpec(src=sent_a_src, tgt=sent_a_tgt, sim=sim_a,
                 src_word_index=[1, 2, 2, 3]),
        PairSpec(src=sent_b_src, tgt=sent_b_tgt, sim=sim_b),
    ]
    return specs, [gold_a, gold_b]


def translation_shift_specs() -> list[PairSpec]:
    """Fixtures rebuilding the classic translation shifts: a nominalized
    predicate, a light-verb construction, and a separable-prefix verb."""
    nominal_src = make_sentence(
        "f0",
        [("people", "NOUN", 3), ("are", "AUX", 3), ("panicking", "VERB", 0)],
        [(3, "panic.01", [(1, "A0")])])
    nominal_tgt = make_sentence(
        "f0",
        [("la", "DET", 2), ("gente", "NOUN", 5), ("no", "ADV", 5),
         ("está", "AUX", 5), ("entrando", "NOUN", 0), ("en", "ADP", 7),
         ("pánico", "NOUN", 5)])
    sim_nominal = [
        [0.10, 0.90, 0.05, 0.05, 0.20, 0.05, 0.10],  # people -> gente
        [0.05, 0.05, 0.10, 0.60, 0.20, 0.05, 0.05],  # are -> está
        [0.05, 0.05, 0.05, 0.20, 0.40, 0.85, 0.90],  # panicking -> pánico, en
    ]

    light_src = make_sentence(
        "f1",
        [("account", "NOUN", 2), ("billed", "VERB", 0), ("millions", "NOUN", 2)],
        [(2, "bill.01", [(1, "A0"), (3, "A1")])])
    light_tgt = make_sentence(
        "f1",
        [("Konto", "NOUN", 6), ("hatte", "AUX", 6), ("Millionen", "NOUN", 6),
         ("in", "ADP", 5), ("Rechnung", "NOUN", 6), ("gestellt", "VERB", 0)])
    sim_light = [
        [0.90, 0.05, 0.10, 0.05, 0.10, 0.05],  # account -> Konto
        [0.05, 0.10, 0.05, 0.80, 0.90, 0.30],  # billed -> Rechnung, in
        [0.05, 0.05, 0.90, 0.05, 0.10, 0.05],  # millions -> Millionen
    ]

    prefix_src = make_sentence(
        "f2",
        [("economy", "NOUN", 2), ("depends", "VERB", 0),
         ("confidence", "NOUN", 2)],
        [(2, "depend.01", [(1, "A0"), (3, "A1")])])
    prefix_tgt = make_sentence(
        "f2",
        [("Wirtschaft", "NOUN", 2), ("hängt", "VERB", 0), ("vom", "ADP", 4),
         ("Vertrauen", "NOUN", 2), ("ab", "PART", 2)])
    sim_prefix = [
        [0.90, 0.05, 0.05, 0.10, 0.05],  # economy -> Wirtschaft
        [0.05, 0.85, 0.10, 0.05, 0.90],  # depends -> ab scores above hängt
        [0.05, 0.05, 0.30, 0.90, 0.05],  # confidence -> Vertrauen
    ]

    return [
        PairSpec(src=nominal_src, tgt=nominal_tgt, sim=sim_nominal),
        PairSpec(src=light_src, tgt=light_tgt, sim=sim_light),
        PairSpec(src=prefix_src, tgt=prefix_tgt, sim=sim_prefix),
    ]


@pytest.fixture
def identity_pairs():
    return build_pair_data(identity_specs())


@pytest.fixture
def tradeoff_pairs():
    specs, gold = tradeoff_specs()
    return build_pair_data(specs), gold


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[ACCEPTANCE] {verdict}: {name}")
