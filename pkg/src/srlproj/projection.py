"""Filtered projection of predicate/argument labels onto target sentences.

Only labeled source words are looked up in the candidate table; everything
else is ignored as potential noise. Predicates keep only target candidates
with a verbal POS tag (translation shifts such as nominalizations and light
verb constructions drop out here because their best candidates are nominal).
Arguments are decided by vote count with the similarity score as tie-breaker.

Collision policy: when two frames claim the same target predicate token, or
two arguments of one frame claim the same target token, the higher-scoring
claim wins and the loser is dropped, never reassigned. Every drop is
accounted for in the projection report.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .alignment import AlignmentConfig, Candidate, CandidateTable, align_sentence_pair
from .corpus import PredicateFrame, Sentence, make_frame
from .embeddings import PairedSentence
from .errors import ConfigError

DEFAULT_VERBAL_POS = frozenset({"VERB", "AUX"})

SENSE_COPY_SOURCE = "copy_source"
SENSE_TARGET_LEMMA = "target_lemma_sense"

# drop reasons, predicates
NO_CANDIDATE = "no_candidate"
NO_VERBAL_CANDIDATE = "no_verbal_candidate"
COLLISION = "collision"
# drop reasons, arguments
PREDICATE_DROPPED = "predicate_dropped"


@dataclass(frozen=True)
class ProjectionConfig:
    verbal_pos_tags: frozenset[str] = DEFAULT_VERBAL_POS
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    filters_enabled: bool = True
    sense_policy: str = SENSE_COPY_SOURCE

    def __post_init__(self):
        object.__setattr__(self, "verbal_pos_tags", frozenset(self.verbal_pos_tags))
        if self.filters_enabled and not self.verbal_pos_tags:
            raise ConfigError("verbal_pos_tags must be nonempty when filters are on")
        if self.sense_policy not in (SENSE_COPY_SOURCE, SENSE_TARGET_LEMMA):
            raise ConfigError(f"unknown sense_policy {self.sense_policy!r}")


@dataclass
class CollisionRecord:
    sent_id: str
    kind: str  # "predicate" | "argument"
    frame: int  # source frame position of the losing claim
    loser_source: int
    winner_source: int
    target: int


@dataclass
class SentenceReport:
    sent_id: str
    predicates_projected: int = 0
    predicates_dropped: Counter = field(default_factory=Counter)
    arguments_projected: int = 0
    arguments_dropped: Counter = field(default_factory=Counter)
    collisions: list[CollisionRecord] = field(default_factory=list)

    @property
    def predicates_total(self) -> int:
        return self.predicates_projected + sum(self.predicates_dropped.values())

    @property
    def arguments_total(self) -> int:
        return self.arguments_projected + sum(self.arguments_dropped.values())


@dataclass
class ProjectionReport:
    sentences: list[SentenceReport] = field(default_factory=list)

    def totals(self) -> dict:
        preds_dropped: Counter = Counter()
        args_dropped: Counter = Counter()
        preds_projected = args_projected = 0
        for frag in self.sentences:
            preds_projected += frag.predicates_projected
            args_projected += frag.arguments_projected
            preds_dropped.update(frag.predicates_dropped)
            args_dropped.update(frag.arguments_dropped)
        source_total = (preds_projected + sum(preds_dropped.values())
                        + args_projected + sum(args_dropped.values()))
        projected_total = preds_projected + args_projected
        return {
            "predicates_projected": preds_projected,
            "predicates_dropped": dict(preds_dropped),
            "arguments_projected": args_projected,
            "arguments_dropped": dict(args_dropped),
            "labels_source": source_total,
            "labels_projected": projected_total,
            "coverage": (projected_total / source_total) if source_total else 0.0,
            "collisions": sum(len(f.collisions) for f in self.sentences),
        }

    def to_json(self) -> str:
        payload = {
            "totals": self.totals(),
            "sentences": [
                {
                    "sent_id": frag.sent_id,
                    "predicates_projected": frag.predicates_projected,
                    "predicates_dropped": dict(frag.predicates_dropped),
                    "arguments_projected": frag.arguments_projected,
                    "arguments_dropped": dict(frag.arguments_dropped),
                    "collisions": [
                        {
                            "kind": c.kind,
                            "frame": c.frame,
                            "loser_source": c.loser_source,
                            "winner_source": c.winner_source,
                            "target": c.target,
                        }
                        for c in frag.collisions
                    ],
                }
                for frag in self.sentences
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_table(self) -> str:
        t = self.totals()
        rows = [
            ("predicates projected", t["predicates_projected"]),
            ("predicates dropped", sum(t["predicates_dropped"].values())),
            ("arguments projected", t["arguments_projected"]),
            ("arguments dropped", sum(t["arguments_dropped"].values())),
            ("collisions", t["collisions"]),
        ]
        lines = [f"{name:<24}{count:>8}" for name, count in rows]
        for reason, count in sorted(t["predicates_dropped"].items()):
            lines.append(f"  pred drop: {reason:<12}{count:>8}")
        for reason, count in sorted(t["arguments_dropped"].items()):
            lines.append(f"  arg drop:  {reason:<12}{count:>8}")
        lines.append(f"{'coverage':<24}{t['coverage']:>8.3f}")
        return "\n".join(lines)


def _is_verbal(sentence: Sentence, index: int, cfg: ProjectionConfig) -> bool:
    return sentence.token(index).pos in cfg.verbal_pos_tags


def project_predicate(frame: PredicateFrame, table: CandidateTable,
                      tgt: Sentence, cfg: ProjectionConfig) -> Candidate | None:
    """Pick the target token for a predicate, or None when nothing survives.

    With filters on, only candidates bearing a verbal POS tag are kept; the
    survivor with the highest score wins (lower index on a tie). An empty
    surviving list means the predicate is not projected.
    """
    candidates = table.candidates(frame.predicate_index)
    if cfg.filters_enabled:
        candidates = [c for c in candidates
                      if tgt.token(c.target).pos in cfg.verbal_pos_tags]
    if not candidates:
        return None
    return max(candidates, key=lambda c: (c.max_score, -c.target))


def project_argument(arg_index: int, table: CandidateTable,
                     cfg: ProjectionConfig) -> Candidate | None:
    """Pick the target token for an argument head by majority vote; ties fall
    back to the highest similarity score, then the lower index."""
    candidates = table.candidates(arg_index)
    if not candidates:
        return None
    return max(candidates, key=lambda c: (c.vote_count, c.max_score, -c.target))


def _sense_for(frame: PredicateFrame, tgt: Sentence, target_index: int,
               cfg: ProjectionConfig) -> str:
    if cfg.sense_policy == SENSE_COPY_SOURCE:
        return frame.sense
    lemma = tgt.token(target_index).lemma or tgt.token(target_index).form
    base, dot, suffix = frame.sense.rpartition(".")
    return f"{lemma}.{suffix}" if dot else lemma


def project_sentence(src: Sentence, tgt: Sentence, table: CandidateTable,
                     cfg: ProjectionConfig) -> tuple[Sentence, SentenceReport]:
    """Project every verbal source frame onto the target sentence.

    Non-verbal source predicates are outside the corpus scope and are skipped
    entirely (they appear in neither the projected nor the dropped counts).
    """
    report = SentenceReport(sent_id=src.sent_id)
    if cfg.filters_enabled:
        untagged = [t.index for t in tgt.tokens if t.pos in ("", "_")]
        if untagged:
            raise ConfigError(
                f"{tgt.sent_id}: target tokens {untagged} carry no POS tag; "
                "POS filters need a tagged target corpus")

    considered = [
        (pos, frame) for pos, frame in enumerate(src.frames)
        if _is_verbal(src, frame.predicate_index, cfg)
    ]

    # predicate pass
    placed: list[tuple[int, PredicateFrame, Candidate]] = []
    for pos, frame in considered:
        chosen = project_predicate(frame, table, tgt, cfg)
        if chosen is None:
            reason = NO_CANDIDATE
            if cfg.filters_enabled and table.candidates(frame.predicate_index):
                reason = NO_VERBAL_CANDIDATE
            report.predicates_dropped[reason] += 1
            report.arguments_dropped[PREDICATE_DROPPED] += len(frame.roles)
        else:
            placed.append((pos, frame, chosen))

    # collision pass: one frame per target predicate token
    by_target: dict[int, tuple[int, PredicateFrame, Candidate]] = {}
    for pos, frame, chosen in placed:
        incumbent = by_target.get(chosen.target)
        if incumbent is None:
            by_target[chosen.target] = (pos, frame, chosen)
            continue
        inc_pos, inc_frame, inc_chosen = incumbent
        if chosen.max_score > inc_chosen.max_score:
            winner, loser = (pos, frame, chosen), incumbent
        else:
            winner, loser = incumbent, (pos, frame, chosen)
        by_target[chosen.target] = winner
        report.predicates_dropped[COLLISION] += 1
        report.arguments_dropped[PREDICATE_DROPPED] += len(loser[1].roles)
        report.collisions.append(CollisionRecord(
            sent_id=src.sent_id, kind="predicate", frame=loser[0],
            loser_source=loser[1].predicate_index,
            winner_source=winner[1].predicate_index,
            target=chosen.target))
    surviving = sorted(by_target.values(), key=lambda item: item[0])

    # argument pass, per surviving frame
    out_frames: list[PredicateFrame] = []
    for pos, frame, chosen in surviving:
        report.predicates_projected += 1
        claimed: dict[int, tuple[int, str, Candidate]] = {}
        for arg_index, label in frame.roles:
            cand = project_argument(arg_index, table, cfg)
            if cand is None:
                report.arguments_dropped[NO_CANDIDATE] += 1
                continue
            incumbent = claimed.get(cand.target)
            if incumbent is None:
                claimed[cand.target] = (arg_index, label, cand)
                continue
            inc_index, inc_label, inc_cand = incumbent
            if cand.max_score > inc_cand.max_score:
                claimed[cand.target] = (arg_index, label, cand)
                loser_index, winner_index = inc_index, arg_index
            else:
                loser_index, winner_index = arg_index, inc_index
            report.arguments_dropped[COLLISION] += 1
            report.collisions.append(CollisionRecord(
                sent_id=src.sent_id, kind="argument", frame=pos,
                loser_source=loser_index, winner_source=winner_index,
                target=cand.target))
        roles = []
        for target, (arg_index, label, cand) in claimed.items():
            roles.append((target, label))
            report.arguments_projected += 1
        out_frames.append(make_frame(
            chosen.target, _sense_for(frame, tgt, chosen.target, cfg), roles))

    out_frames.sort(key=lambda f: f.predicate_index)
    projected = Sentence(tgt.sent_id, tgt.tokens, tuple(out_frames))
    return projected, report


def project_pair(quad: PairedSentence,
                 cfg: ProjectionConfig) -> tuple[Sentence, SentenceReport]:
    src, tgt, src_enc, tgt_enc = quad
    table = align_sentence_pair(src_enc, tgt_enc, cfg.alignment)
    return project_sentence(src, tgt, table, cfg)


def project_corpus(quads: list[PairedSentence], cfg: ProjectionConfig,
                   jobs: int = 1) -> tuple[list[Sentence], ProjectionReport]:
    """Map projection over sentence pairs; deterministic output order
    regardless of the worker count."""
    report = ProjectionReport()
    if jobs <= 1:
        results = [project_pair(quad, cfg) for quad in quads]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda q: project_pair(q, cfg), quads))
    sentences = []
    for projected, frag in results:
        sentences.append(projected)
        report.sentences.append(frag)
    return sentences, report
