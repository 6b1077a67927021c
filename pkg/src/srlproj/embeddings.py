"""Embedding bundle I/O.

A bundle decouples the projection core from any specific encoder: it stores,
per sentence, the word pieces, a piece -> word index map, and one vector per
piece. The on-disk format is JSON Lines (`.embjsonl`, optionally gzipped as
`.embjsonl.gz`): a header record {"language","model_id","layer","dim"}
followed by one record per sentence with keys "sent_id", "pieces",
"word_index" and "vectors". Vector values follow a 32-bit precision contract:
they are materialized as float32 and written as plain decimal floats, which
round-trips bit-exactly.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .corpus import Sentence
from .errors import BundleError, PairingError


@dataclass(frozen=True)
class PieceEncoding:
    """Word pieces of one sentence with their vectors.

    word_index values are 1-based token indices into the paired Sentence.
    Special encoder tokens (sequence markers, padding) must not appear here.
    """

    sent_id: str
    pieces: tuple[str, ...]
    word_index: tuple[int, ...]
    vectors: np.ndarray  # shape (len(pieces), dim), float32

    def __post_init__(self):
        object.__setattr__(self, "vectors",
                           np.asarray(self.vectors, dtype=np.float32))

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def words_covered(self) -> set[int]:
        return set(self.word_index)


@dataclass(frozen=True)
class EmbeddingBundle:
    language: str
    model_id: str
    layer: int
    dim: int
    encodings: tuple[PieceEncoding, ...]

    def by_sent_id(self) -> dict[str, PieceEncoding]:
        return {enc.sent_id: enc for enc in self.encodings}


def _validate_encoding(record_no: int, enc: PieceEncoding, dim: int) -> None:
    where = f"record {record_no} (sent_id {enc.sent_id!r})"
    if not (len(enc.pieces) == len(enc.word_index) == enc.vectors.shape[0]):
        raise BundleError(
            f"{where}: vector count mismatch: {len(enc.pieces)} pieces, "
            f"{len(enc.word_index)} word indices, {enc.vectors.shape[0]} vectors")
    if enc.vectors.size and enc.vectors.shape[1] != dim:
        raise BundleError(
            f"{where}: dimension mismatch: header says {dim}, "
            f"vectors have {enc.vectors.shape[1]}")
    if not enc.word_index:
        return
    if min(enc.word_index) < 1:
        raise BundleError(
            f"{where}: out-of-range word_index {min(enc.word_index)}")
    # full coverage of the paired sentence is a pairing-time check


def _open_maybe_gzip(path, mode: str) -> IO:
    if str(path).endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def load_bundle(path) -> EmbeddingBundle:
    """Load and eagerly validate a bundle file."""
    with _open_maybe_gzip(path, "r") as handle:
        return read_bundle(handle)


def read_bundle(stream: Iterable[str]) -> EmbeddingBundle:
    header = None
    encodings: list[PieceEncoding] = []
    seen: set[str] = set()
    for record_no, line in enumerate(stream):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BundleError(f"record {record_no}: invalid JSON: {exc}") from exc
        if header is None:
            for key in ("language", "model_id", "layer", "dim"):
                if key not in record:
                    raise BundleError(f"header record missing {key!r}")
            header = record
            continue
        for key in ("sent_id", "pieces", "word_index", "vectors"):
            if key not in record:
                raise BundleError(f"record {record_no}: missing {key!r}")
        if record["sent_id"] in seen:
            raise BundleError(
                f"record {record_no}: duplicate sent_id {record['sent_id']!r}")
        seen.add(record["sent_id"])
        vectors = record["vectors"]
        lengths = {len(v) for v in vectors}
        if len(lengths) > 1:
            raise BundleError(
                f"record {record_no} (sent_id {record['sent_id']!r}): "
                f"ragged vectors with dims {sorted(lengths)}")
        arr = np.asarray(vectors, dtype=np.float32)
        if arr.ndim == 1:  # empty record
            arr = arr.reshape(0, int(header["dim"]))
        enc = PieceEncoding(
            sent_id=record["sent_id"],
            pieces=tuple(record["pieces"]),
            word_index=tuple(int(i) for i in record["word_index"]),
            vectors=arr,
        )
        _validate_encoding(record_no, enc, int(header["dim"]))
        encodings.append(enc)
    if header is None:
        raise BundleError("empty bundle: header record required")
    return EmbeddingBundle(
        language=header["language"],
        model_id=header["model_id"],
        layer=int(header["layer"]),
        dim=int(header["dim"]),
        encodings=tuple(encodings),
    )


def save_bundle(bundle: EmbeddingBundle, path) -> None:
    with _open_maybe_gzip(path, "w") as handle:
        write_bundle(bundle, handle)


def write_bundle(bundle: EmbeddingBundle, stream: IO) -> None:
    header = {
        "language": bundle.language,
        "model_id": bundle.model_id,
        "layer": bundle.layer,
        "dim": bundle.dim,
    }
    stream.write(json.dumps(header, ensure_ascii=False) + "\n")
    for enc in bundle.encodings:
        record = {
            "sent_id": enc.sent_id,
            "pieces": list(enc.pieces),
            "word_index": list(enc.word_index),
            # float() of a float32 prints the shortest decimal that parses
            # back to the exact same float32, keeping the round trip bit-exact
            "vectors": [[float(x) for x in row] for row in enc.vectors],
        }
        stream.write(json.dumps(record, ensure_ascii=False) + "\n")


PairedSentence = tuple[Sentence, Sentence, PieceEncoding, PieceEncoding]


def pair_bundles(src_bundle: EmbeddingBundle, tgt_bundle: EmbeddingBundle,
                 src_corpus: Iterable[Sentence],
                 tgt_corpus: Iterable[Sentence]) -> list[PairedSentence]:
    """Join the four collections on sent_id, ordered by source corpus order.

    Every sent_id of the source corpus must be present everywhere; word_index
    ranges are validated against the paired sentences.
    """
    src_sentences = list(src_corpus)
    tgt_by_id = {s.sent_id: s for s in tgt_corpus}
    src_enc = src_bundle.by_sent_id()
    tgt_enc = tgt_bundle.by_sent_id()

    missing: list[str] = []
    for sentence in src_sentences:
        sid = sentence.sent_id
        for name, coll in (("target corpus", tgt_by_id),
                           ("source bundle", src_enc),
                           ("target bundle", tgt_enc)):
            if sid not in coll:
                missing.append(f"{sid} (in {name})")
    if missing:
        raise PairingError("missing sent_ids: " + ", ".join(missing))

    quads: list[PairedSentence] = []
    for sentence in src_sentences:
        sid = sentence.sent_id
        tgt_sentence = tgt_by_id[sid]
        for side, sent, enc in (("source", sentence, src_enc[sid]),
                                ("target", tgt_sentence, tgt_enc[sid])):
            covered = enc.words_covered()
            expected = set(range(1, len(sent.tokens) + 1))
            if covered != expected:
                raise PairingError(
                    f"{sid}: {side} encoding covers words {sorted(covered)} "
                    f"but the sentence has tokens 1..{len(sent.tokens)}")
        quads.append((sentence, tgt_sentence, src_enc[sid], tgt_enc[sid]))
    return quads
