"""Word alignment candidates from piece-level similarities.

Piece-level top-k pairs are lifted to full-word candidates: each pair
contributes one vote and one score to the (source word -> target word) entry
it belongs to. The resulting table is the per-sentence candidate dictionary
that projection consumes. Source-to-target (S2T), target-to-source (T2S) and
intersective (INTER) modes are all derived from the same similarity matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .embeddings import PieceEncoding
from .similarity import SimilarityMatrix, similarity_matrix


class Mode(str, Enum):
    S2T = "s2t"
    T2S = "t2s"
    INTER = "inter"


@dataclass(frozen=True)
class AlignmentConfig:
    k: int = 2
    mode: Mode = Mode.S2T

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass
class Candidate:
    """One aligned target word with every piece-level score that voted for it."""

    target: int
    scores: list[float] = field(default_factory=list)

    @property
    def vote_count(self) -> int:
        return len(self.scores)

    @property
    def max_score(self) -> float:
        return max(self.scores)


class CandidateTable:
    """Word-level alignment candidates keyed by anchor token index.

    For an S2T table the anchors are source tokens and candidates are target
    tokens; a T2S table built over the target side is the mirror image.
    """

    def __init__(self):
        self._entries: dict[int, dict[int, Candidate]] = {}

    def add(self, anchor: int, target: int, score: float) -> None:
        slot = self._entries.setdefault(anchor, {})
        cand = slot.get(target)
        if cand is None:
            slot[target] = Candidate(target, [score])
        else:
            cand.scores.append(score)

    def candidates(self, anchor: int) -> list[Candidate]:
        """Candidates for one anchor, sorted by target index; empty if none."""
        slot = self._entries.get(anchor, {})
        return [slot[t] for t in sorted(slot)]

    def anchors(self) -> list[int]:
        return sorted(self._entries)

    def has(self, anchor: int, target: int) -> bool:
        return target in self._entries.get(anchor, {})

    def pairs(self) -> set[tuple[int, int]]:
        return {(a, t) for a, slot in self._entries.items() for t in slot}

    def to_record(self) -> dict:
        """JSON-friendly view used by the alignment debug dump."""
        return {
            str(anchor): [
                {
                    "target": cand.target,
                    "votes": cand.vote_count,
                    "max_score": cand.max_score,
                    "scores": list(cand.scores),
                }
                for cand in self.candidates(anchor)
            ]
            for anchor in self.anchors()
        }


def topk_pairs(sm: SimilarityMatrix, k: int,
               direction: Mode = Mode.S2T) -> list[tuple[int, int, float]]:
    """Piece-level alignment pairs (src piece, tgt piece, score).

    S2T keeps, for every source piece, the min(k, q) highest-scoring target
    pieces; T2S mirrors the process over target pieces. Ties at the cutoff
    keep the lower candidate piece index. Output iterates anchors in order,
    candidates by descending score.
    """
    if direction == Mode.INTER:
        raise ValueError("topk_pairs needs a primitive direction, s2t or t2s")
    values = sm.values
    pairs: list[tuple[int, int, float]] = []
    if values.size == 0:
        return pairs
    if direction == Mode.S2T:
        rows, take = values, min(k, sm.q)
    else:
        rows, take = values.T, min(k, sm.p)
    for anchor in range(rows.shape[0]):
        row = rows[anchor]
        # stable sort on negated scores keeps the lower index among ties
        order = np.argsort(-row, kind="stable")[:take]
        for j in order:
            if direction == Mode.S2T:
                pairs.append((anchor, int(j), float(row[j])))
            else:
                pairs.append((int(j), anchor, float(row[j])))
    return pairs


def build_candidate_table(pairs: list[tuple[int, int, float]],
                          src: PieceEncoding,
                          tgt: PieceEncoding) -> CandidateTable:
    """Lift piece pairs to full words: every pair adds one vote and its score
    under (word of src piece -> word of tgt piece)."""
    table = CandidateTable()
    for i, j, score in pairs:
        table.add(src.word_index[i], tgt.word_index[j], score)
    return table


def intersect_tables(s2t: CandidateTable, t2s: CandidateTable) -> CandidateTable:
    """Keep (w_s -> w_t) only when the target side aligns back: w_t lists w_s
    among its T2S candidates. Votes and scores come from the S2T side."""
    out = CandidateTable()
    for w_s in s2t.anchors():
        for cand in s2t.candidates(w_s):
            if t2s.has(cand.target, w_s):
                for score in cand.scores:
                    out.add(w_s, cand.target, score)
    return out


def _invert(table: CandidateTable) -> CandidateTable:
    out = CandidateTable()
    for anchor in table.anchors():
        for cand in table.candidates(anchor):
            for score in cand.scores:
                out.add(cand.target, anchor, score)
    return out


def candidate_table(sm: SimilarityMatrix, src: PieceEncoding,
                    tgt: PieceEncoding, cfg: AlignmentConfig) -> CandidateTable:
    """The source-keyed candidate table for the configured alignment mode."""
    if cfg.mode == Mode.S2T:
        return build_candidate_table(topk_pairs(sm, cfg.k, Mode.S2T), src, tgt)
    t2s_pairs = [(j, i, s) for i, j, s in topk_pairs(sm, cfg.k, Mode.T2S)]
    t2s = build_candidate_table(t2s_pairs, tgt, src)
    if cfg.mode == Mode.T2S:
        return _invert(t2s)
    s2t = build_candidate_table(topk_pairs(sm, cfg.k, Mode.S2T), src, tgt)
    return intersect_tables(s2t, t2s)


def align_sentence_pair(src_sent_enc: PieceEncoding, tgt_sent_enc: PieceEncoding,
                        cfg: AlignmentConfig) -> CandidateTable:
    """similarity_matrix + candidate_table in one step for one sentence pair."""
    sm = similarity_matrix(src_sent_enc, tgt_sent_enc)
    return candidate_table(sm, src_sent_enc, tgt_sent_enc, cfg)
