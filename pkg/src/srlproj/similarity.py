"""Pairwise cosine similarity between word-piece vectors.

Convention fixed here once for the whole toolkit: entry (i, j) of the matrix
is the similarity of source piece i and target piece j. Dot products are
accumulated in double precision even for 32-bit inputs so that downstream
tie-breaking on raw scores is stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import PieceEncoding
from .errors import SrlProjError


class ZeroVectorError(SrlProjError):
    """Cosine similarity is undefined for the zero vector."""


@dataclass(frozen=True)
class SimilarityMatrix:
    """p x q matrix of source-piece / target-piece cosine similarities."""

    values: np.ndarray

    @property
    def p(self) -> int:
        return int(self.values.shape[0])

    @property
    def q(self) -> int:
        return int(self.values.shape[1])


def cosine(v_s, v_t) -> float:
    """cos(v_s, v_t) = v_s . v_t / (|v_s| |v_t|), symmetric in its arguments."""
    a = np.asarray(v_s, dtype=np.float64)
    b = np.asarray(v_t, dtype=np.float64)
    if a.shape != b.shape:
        raise SrlProjError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity of a zero vector is undefined")
    return float(np.dot(a, b) / (na * nb))


def _normalized(vectors: np.ndarray, side: str) -> np.ndarray:
    dense = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(dense, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroVectorError(f"{side} piece {int(zero[0])} has a zero vector")
    return dense / norms[:, None]


def similarity_matrix(src: PieceEncoding, tgt: PieceEncoding) -> SimilarityMatrix:
    """All-pairs cosine between the pieces of two encodings.

    One pass of row normalization followed by a dense matrix product,
    O(p*q*d) with BLAS blocking.
    """
    if src.vectors.shape[0] == 0 or tgt.vectors.shape[0] == 0:
        raise SrlProjError(
            f"empty encoding: {src.sent_id!r} has {src.vectors.shape[0]} source "
            f"and {tgt.vectors.shape[0]} target pieces")
    if src.vectors.shape[1] != tgt.vectors.shape[1]:
        raise SrlProjError(
            f"dimension mismatch: source dim {src.vectors.shape[1]}, "
            f"target dim {tgt.vectors.shape[1]}")
    s = _normalized(src.vectors, "source")
    t = _normalized(tgt.vectors, "target")
    return SimilarityMatrix(s @ t.T)
