"""Scoring of projected annotations against human-validated gold corpora,
label-density accounting across corpora, and quality-rating statistics.

Frames correspond across the projected and gold views of a sentence through
their predicate's target token index: head-based annotations make the token
index the identity of every labeled item. Predicates a annotator mapped to
NONE have no gold frame, so projecting onto them surfaces as a false
positive, and they never enter recall's denominator.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Sentence, label_multiset
from .errors import PairingError, SrlProjError


@dataclass(frozen=True)
class PRF:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        total = self.tp + self.fp
        return self.tp / total if total else 0.0

    @property
    def recall(self) -> float:
        total = self.tp + self.fn
        return self.tp / total if total else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def __add__(self, other: "PRF") -> "PRF":
        return PRF(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class EvalReport:
    predicate: PRF
    argument: PRF

    @property
    def combined(self) -> PRF:
        return self.predicate + self.argument

    def to_json(self) -> str:
        def block(prf: PRF) -> dict:
            return {
                "precision": prf.precision,
                "recall": prf.recall,
                "f1": prf.f1,
                "tp": prf.tp, "fp": prf.fp, "fn": prf.fn,
            }
        return json.dumps({
            "predicate": block(self.predicate),
            "argument": block(self.argument),
            "combined": block(self.combined),
        }, indent=2, sort_keys=True)

    def to_table(self) -> str:
        header = f"{'':<10}{'P':>8}{'R':>8}{'F1':>8}{'TP':>8}{'FP':>8}{'FN':>8}"
        lines = [header]
        for name, prf in (("predicate", self.predicate),
                          ("argument", self.argument),
                          ("combined", self.combined)):
            lines.append(
                f"{name:<10}{100 * prf.precision:>8.1f}{100 * prf.recall:>8.1f}"
                f"{100 * prf.f1:>8.1f}{prf.tp:>8}{prf.fp:>8}{prf.fn:>8}")
        return "\n".join(lines)


def _score_sentence(projected: Sentence, gold: Sentence,
                    strict_sense: bool) -> tuple[PRF, PRF]:
    proj_frames = {f.predicate_index: f for f in projected.frames}
    gold_frames = {f.predicate_index: f for f in gold.frames}

    matched = set(proj_frames) & set(gold_frames)
    if strict_sense:
        matched = {i for i in matched
                   if proj_frames[i].sense == gold_frames[i].sense}

    pred = PRF(tp=len(matched),
               fp=len(set(proj_frames) - matched),
               fn=len(set(gold_frames) - matched))

    arg_tp = arg_fp = arg_fn = 0
    for index in matched:
        proj_roles = set(proj_frames[index].roles)
        gold_roles = set(gold_frames[index].roles)
        arg_tp += len(proj_roles & gold_roles)
        arg_fp += len(proj_roles - gold_roles)
        arg_fn += len(gold_roles - proj_roles)
    # arguments of unmatched predicates never match anything
    for index in set(proj_frames) - matched:
        arg_fp += len(proj_frames[index].roles)
    for index in set(gold_frames) - matched:
        arg_fn += len(gold_frames[index].roles)

    return pred, PRF(arg_tp, arg_fp, arg_fn)


def evaluate_projection(projected: Iterable[Sentence], gold: Iterable[Sentence],
                        strict_sense: bool = False) -> EvalReport:
    """Micro-averaged predicate/argument/combined scores."""
    proj_by_id = {s.sent_id: s for s in projected}
    gold_by_id = {s.sent_id: s for s in gold}
    if set(proj_by_id) != set(gold_by_id):
        only_proj = sorted(set(proj_by_id) - set(gold_by_id))
        only_gold = sorted(set(gold_by_id) - set(proj_by_id))
        raise PairingError(
            f"sent_id mismatch: only projected {only_proj}, only gold {only_gold}")

    pred = PRF(0, 0, 0)
    arg = PRF(0, 0, 0)
    for sent_id in sorted(proj_by_id):
        p, a = _score_sentence(proj_by_id[sent_id], gold_by_id[sent_id],
                               strict_sense)
        pred += p
        arg += a
    return EvalReport(predicate=pred, argument=arg)


@dataclass
class DensityReport:
    """Per-label counts for a reference corpus and any number of projected
    corpora, plus coverage ratios relative to the reference."""

    names: list[str]
    counts: dict[str, Counter] = field(default_factory=dict)
    top_n: int = 10

    @property
    def reference(self) -> str:
        return self.names[0]

    def ranking(self) -> list[str]:
        ref = self.counts[self.reference]
        ordered = sorted(ref.items(), key=lambda item: (-item[1], item[0]))
        return [label for label, _ in ordered[:self.top_n]]

    def coverage(self) -> dict[str, float]:
        ref_total = sum(self.counts[self.reference].values())
        out = {}
        for name in self.names[1:]:
            total = sum(self.counts[name].values())
            out[name] = total / ref_total if ref_total else 0.0
        return out

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["label"] + self.names)
        for label in self.ranking():
            writer.writerow([label] + [self.counts[n].get(label, 0)
                                       for n in self.names])
        return buffer.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "names": self.names,
            "top_labels": self.ranking(),
            "counts": {n: dict(self.counts[n]) for n in self.names},
            "coverage": self.coverage(),
        }, indent=2, sort_keys=True)


def label_density(corpora: Sequence[tuple[str, Iterable[Sentence]]],
                  top_n: int = 10) -> DensityReport:
    """Count predicate ("PRED") and role labels per corpus. The first corpus
    is the reference that fixes the top-N ranking and coverage denominators."""
    if not corpora:
        raise SrlProjError("label_density needs at least one corpus")
    report = DensityReport(names=[name for name, _ in corpora], top_n=top_n)
    for name, sentences in corpora:
        counter: Counter = Counter()
        for sentence in sentences:
            counter.update(label_multiset(sentence))
        report.counts[name] = counter
    return report


@dataclass(frozen=True)
class QualityStats:
    sentences_kept: int
    predicates_kept: int
    arguments_kept: int


def quality_stats(ratings: Sequence[int] | Mapping[str, int],
                  corpus: Sequence[Sentence] | None = None,
                  threshold: int = 2) -> QualityStats:
    """Counts of sentences (and their annotations) with rating > threshold.

    `ratings` is either one integer per corpus sentence in order, or a map
    from sent_id to rating. Without a corpus, only sentences are counted.
    """
    if isinstance(ratings, Mapping):
        if corpus is None:
            raise SrlProjError("sent_id-keyed ratings require the corpus")
        values = [ratings[s.sent_id] for s in corpus]
    else:
        values = list(ratings)
        if corpus is not None and len(values) != len(corpus):
            raise SrlProjError(
                f"{len(values)} ratings for {len(corpus)} sentences")
    for rating in values:
        if not 1 <= rating <= 5:
            raise SrlProjError(f"rating {rating} outside 1..5")

    kept_sentences = kept_predicates = kept_arguments = 0
    for position, rating in enumerate(values):
        if rating <= threshold:
            continue
        kept_sentences += 1
        if corpus is not None:
            sentence = corpus[position]
            kept_predicates += len(sentence.frames)
            kept_arguments += sum(len(f.roles) for f in sentence.frames)
    return QualityStats(kept_sentences, kept_predicates, kept_arguments)
