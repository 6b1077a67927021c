"""Bundle production from a pretrained multilingual masked-LM encoder.

Runs the encoder's own word-piece tokenizer over the corpus tokens, exports
one vector per piece from the selected hidden layer, and maps every piece
back to its 1-based corpus token. Sequence markers are excluded. Tokens the
encoder cannot encode at all get a single placeholder piece carrying the
sentence-mean vector; such records are flagged so downstream users can audit
them. Output is written atomically (temp file + rename).

Heavy dependencies (torch, transformers) are imported lazily so the rest of
the toolkit works without them.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .corpus import Sentence, load_conll09
from .embeddings import _open_maybe_gzip
from .errors import BundleError

PLACEHOLDER_PIECE = "[UNENCODABLE]"


def _piece_surface(pieces: list[str]) -> str:
    return "".join(p[2:] if p.startswith("##") else p for p in pieces)


def embed_corpus(corpus_path, model_id: str, layer: int, out_path,
                 language: str = "und", batch_size: int = 16) -> int:
    """Embed a corpus into a bundle file; returns the sentence count."""
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer
    except ImportError as exc:
        raise BundleError(
            "the embed command needs the optional 'embed' extras "
            "(torch, transformers)") from exc

    sentences = load_conll09(corpus_path)
    tokenizer = AutoTokenizer.from_pretrained(model_id)
    model = AutoModel.from_pretrained(model_id)
    model.eval()
    dim = int(model.config.hidden_size)
    max_len = int(getattr(model.config, "max_position_embeddings", 512))

    records = []
    with torch.no_grad():
        for start in range(0, len(sentences), batch_size):
            batch = sentences[start:start + batch_size]
            records.extend(_embed_batch(batch, tokenizer, model, layer, max_len))

    out_path = Path(out_path)
    header = {"language": language, "model_id": str(model_id),
              "layer": layer, "dim": dim}
    fd, tmp_name = tempfile.mkstemp(dir=out_path.parent,
                                    suffix=out_path.suffix)
    os.close(fd)
    try:
        with _open_maybe_gzip(tmp_name, "w") as handle:
            handle.write(json.dumps(header, ensure_ascii=False) + "\n")
            for record in records:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        os.replace(tmp_name, out_path)
    finally:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
    return len(records)


def _embed_batch(batch: list[Sentence], tokenizer, model, layer: int,
                 max_len: int) -> list[dict]:
    import torch

    forms = [[t.form for t in s.tokens] for s in batch]
    encoded = tokenizer(forms, is_split_into_words=True, padding=True,
                        return_tensors="pt")
    if encoded["input_ids"].shape[1] > max_len:
        too_long = [s.sent_id for s, f in zip(batch, forms)
                    if len(tokenizer(f, is_split_into_words=True)["input_ids"]) > max_len]
        raise BundleError(f"sentences exceed the encoder's maximum length: "
                          f"{too_long}")
    output = model(**encoded, output_hidden_states=True)
    hidden = output.hidden_states[layer]  # (batch, seq, dim)

    records = []
    for row, sentence in enumerate(batch):
        word_ids = encoded.word_ids(batch_index=row)
        ids = encoded["input_ids"][row].tolist()
        pieces: list[str] = []
        word_index: list[int] = []
        vectors: list[list[float]] = []
        per_word: dict[int, list[str]] = {}
        for pos, word_id in enumerate(word_ids):
            if word_id is None:  # sequence markers, padding
                continue
            piece = tokenizer.convert_ids_to_tokens(ids[pos])
            pieces.append(piece)
            word_index.append(word_id + 1)
            vectors.append([float(x) for x in
                            hidden[row, pos].to(torch.float32)])
            per_word.setdefault(word_id + 1, []).append(piece)

        flags: dict[str, list[int]] = {}
        n = len(sentence.tokens)
        missing = [i for i in range(1, n + 1) if i not in per_word]
        if missing:
            if not vectors:
                raise BundleError(
                    f"{sentence.sent_id}: encoder produced no pieces at all")
            mean = [float(sum(col) / len(vectors))
                    for col in zip(*vectors)]
            for index in missing:
                pieces.append(PLACEHOLDER_PIECE)
                word_index.append(index)
                vectors.append(mean)
            flags["placeholders"] = missing
        inexact = [
            index for index, token in enumerate(sentence.tokens, start=1)
            if index not in missing
            and _piece_surface(per_word[index]) != token.form
        ]
        if inexact:
            flags["inexact_surface"] = inexact

        record = {
            "sent_id": sentence.sent_id,
            "pieces": pieces,
            "word_index": word_index,
            "vectors": vectors,
        }
        if flags:
            record["flags"] = flags
        records.append(record)
    return records
