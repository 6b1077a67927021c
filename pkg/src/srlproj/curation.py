"""Gold test-set curation: task export, response ingestion, quality and
linguistic validation, and the merge that emits the gold target corpus.

Annotators rate translation quality 1-5 and, for sentences rated above the
threshold, mark the target tokens realizing each labeled source predicate and
argument head. Special-case flags drive the validation rules: nominalized or
light-verb predicates are dropped, separable-prefix verbs keep the stem,
multi-word and named-entity selections are relocated to the syntactic head of
the marked span. A markable can also be mapped to NONE when the translation
has no corresponding expression.

File formats are JSON Lines with a schema header record; see TASKS_SCHEMA and
RESPONSES_SCHEMA.
"""

from __future__ import annotations

import json
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Sequence

from .corpus import PredicateFrame, Sentence, make_frame
from .errors import CurationError, PairingError
from .projection import DEFAULT_VERBAL_POS

TASKS_SCHEMA = "srlproj-tasks"
RESPONSES_SCHEMA = "srlproj-responses"
SCHEMA_VERSION = 1

NONE_VALUE = "NONE"

FLAG_NOMINALIZATION = "nominalization"
FLAG_LIGHT_VERB = "light_verb"
FLAG_SEPARABLE_PREFIX = "separable_prefix"
FLAG_MWE = "mwe"
FLAG_NAMED_ENTITY = "named_entity"
FLAG_OTHER = "other"
ALL_FLAGS = frozenset({
    FLAG_NOMINALIZATION, FLAG_LIGHT_VERB, FLAG_SEPARABLE_PREFIX,
    FLAG_MWE, FLAG_NAMED_ENTITY, FLAG_OTHER,
})

PREDICATE_DROP_FLAGS = frozenset({FLAG_NOMINALIZATION, FLAG_LIGHT_VERB})


def predicate_key(frame_pos: int) -> str:
    return f"pred:{frame_pos}"

def argument_key(frame_pos: int, source_index: int) -> str:
    return f"arg:{frame_pos}:{source_index}"


@dataclass(frozen=True)
class TaskPredicate:
    source_index: int
    sense: str
    arguments: tuple[tuple[int, str], ...]  # (source index, role)


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    sent_id: str
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    target_text: str
    predicates: tuple[TaskPredicate, ...]

    def markable_keys(self) -> list[str]:
        keys = []
        for pos, pred in enumerate(self.predicates):
            keys.append(predicate_key(pos))
            keys.extend(argument_key(pos, idx) for idx, _ in pred.arguments)
        return keys

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "sent_id": self.sent_id,
            "source_tokens": list(self.source_tokens),
            "target_tokens": list(self.target_tokens),
            "target_text": self.target_text,
            "predicates": [
                {
                    "source_index": p.source_index,
                    "sense": p.sense,
                    "arguments": [
                        {"source_index": i, "role": r} for i, r in p.arguments
                    ],
                }
                for p in self.predicates
            ],
        }


@dataclass(frozen=True)
class Markable:
    """One annotated item: a token index selection (or NONE) plus flags."""

    selection: tuple[int, ...] | None  # None encodes NONE
    flags: frozenset[str] = frozenset()

    @property
    def is_none(self) -> bool:
        return self.selection is None


@dataclass(frozen=True)
class AnnotationResponse:
    task_id: str
    coder_id: str
    quality: int
    markables: dict[str, Markable] = field(default_factory=dict)
    edited_target_text: str | None = None

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "coder_id": self.coder_id,
            "quality": self.quality,
            "markables": {
                key: {
                    "selection": (NONE_VALUE if m.is_none
                                  else list(m.selection)),
                    "flags": sorted(m.flags),
                }
                for key, m in sorted(self.markables.items())
            },
            "edited_target_text": self.edited_target_text,
        }


def validate_response(response: AnnotationResponse,
                      task: AnnotationTask | None = None) -> None:
    """Schema-level checks; raises CurationError naming the offending field."""
    if not 1 <= response.quality <= 5:
        raise CurationError(
            f"{response.task_id}/{response.coder_id}: quality out of range: "
            f"{response.quality}")
    known = set(task.markable_keys()) if task is not None else None
    n_target = len(task.target_tokens) if task is not None else None
    for key, markable in response.markables.items():
        if known is not None and key not in known:
            raise CurationError(
                f"{response.task_id}/{response.coder_id}: unknown markable {key!r}")
        bad_flags = markable.flags - ALL_FLAGS
        if bad_flags:
            raise CurationError(
                f"{response.task_id}/{response.coder_id}: markables.{key}.flags: "
                f"unknown flags {sorted(bad_flags)}")
        if markable.is_none:
            continue
        if not markable.selection:
            raise CurationError(
                f"{response.task_id}/{response.coder_id}: markables.{key}.selection: "
                "empty selection (use NONE to mark unrealized)")
        if n_target is not None:
            out = [i for i in markable.selection if not 1 <= i <= n_target]
            if out:
                raise CurationError(
                    f"{response.task_id}/{response.coder_id}: markables.{key}"
                    f".selection: indices {out} outside 1..{n_target}")


def export_tasks(src_corpus: Sequence[Sentence], tgt_corpus: Sequence[Sentence],
                 verbal_pos_tags: frozenset[str] | None = DEFAULT_VERBAL_POS,
                 ) -> list[AnnotationTask]:
    """One task per sentence pair, listing only verbal source predicates and
    their labeled argument heads. `verbal_pos_tags=None` disables the
    predicate POS filter (used when re-deriving tasks from a gold corpus)."""
    tgt_by_id = {s.sent_id: s for s in tgt_corpus}
    missing = [s.sent_id for s in src_corpus if s.sent_id not in tgt_by_id]
    if missing:
        raise PairingError(f"unpaired source sentences: {missing}")
    tasks = []
    for position, src in enumerate(src_corpus):
        tgt = tgt_by_id[src.sent_id]
        predicates = []
        for frame in src.frames:
            if (verbal_pos_tags is not None
                    and src.token(frame.predicate_index).pos not in verbal_pos_tags):
                continue
            predicates.append(TaskPredicate(
                source_index=frame.predicate_index,
                sense=frame.sense,
                arguments=frame.roles,
            ))
        tasks.append(AnnotationTask(
            task_id=f"t{position:05d}",
            sent_id=src.sent_id,
            source_tokens=tuple(t.form for t in src.tokens),
            target_tokens=tuple(t.form for t in tgt.tokens),
            target_text=" ".join(t.form for t in tgt.tokens),
            predicates=tuple(predicates),
        ))
    return tasks


def write_tasks(tasks: Iterable[AnnotationTask], stream: IO) -> None:
    stream.write(json.dumps(
        {"schema": TASKS_SCHEMA, "version": SCHEMA_VERSION}) + "\n")
    for task in tasks:
        stream.write(json.dumps(task.to_record(), ensure_ascii=False) + "\n")


def _check_header(record: dict, schema: str) -> None:
    if record.get("schema") != schema:
        raise CurationError(
            f"expected schema {schema!r}, got {record.get('schema')!r}")
    if record.get("version") != SCHEMA_VERSION:
        raise CurationError(
            f"unsupported {schema} version {record.get('version')!r}")


def read_tasks(stream: Iterable[str]) -> list[AnnotationTask]:
    tasks = []
    header_seen = False
    for line in stream:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if not header_seen:
            _check_header(record, TASKS_SCHEMA)
            header_seen = True
            continue
        tasks.append(AnnotationTask(
            task_id=record["task_id"],
            sent_id=record["sent_id"],
            source_tokens=tuple(record["source_tokens"]),
            target_tokens=tuple(record["target_tokens"]),
            target_text=record["target_text"],
            predicates=tuple(
                TaskPredicate(
                    source_index=p["source_index"],
                    sense=p["sense"],
                    arguments=tuple((a["source_index"], a["role"])
                                    for a in p["arguments"]),
                )
                for p in record["predicates"]
            ),
        ))
    if not header_seen:
        raise CurationError("empty tasks file: header record required")
    return tasks


def response_from_record(record: dict) -> AnnotationResponse:
    markables = {}
    for key, payload in record.get("markables", {}).items():
        selection = payload.get("selection")
        if selection == NONE_VALUE or selection is None:
            parsed = None
        else:
            parsed = tuple(sorted(int(i) for i in selection))
        markables[key] = Markable(
            selection=parsed,
            flags=frozenset(payload.get("flags", [])),
        )
    return AnnotationResponse(
        task_id=record["task_id"],
        coder_id=record["coder_id"],
        quality=int(record["quality"]),
        markables=markables,
        edited_target_text=record.get("edited_target_text"),
    )


def write_responses(responses: Iterable[AnnotationResponse], stream: IO) -> None:
    stream.write(json.dumps(
        {"schema": RESPONSES_SCHEMA, "version": SCHEMA_VERSION}) + "\n")
    for response in responses:
        stream.write(json.dumps(response.to_record(), ensure_ascii=False) + "\n")


def read_responses(stream: Iterable[str]) -> list[AnnotationResponse]:
    responses = []
    header_seen = False
    for line in stream:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if not header_seen:
            _check_header(record, RESPONSES_SCHEMA)
            header_seen = True
            continue
        responses.append(response_from_record(record))
    if not header_seen:
        raise CurationError("empty responses file: header record required")
    return responses


def head_of_span(span: Iterable[int], sentence: Sentence) -> int:
    """The token in `span` whose dependency head lies outside the span (or is
    the root); leftmost on a tie, leftmost span token if the parse is
    degenerate (no such token)."""
    members = sorted(set(span))
    if not members:
        raise CurationError("head_of_span: empty span")
    inside = set(members)
    for index in members:
        if not 1 <= index <= len(sentence.tokens):
            raise CurationError(f"head_of_span: index {index} out of range")
        head = sentence.token(index).head
        if head == 0 or head not in inside:
            return index
    return members[0]


@dataclass(frozen=True)
class MergePolicy:
    quality_threshold: int = 2


@dataclass
class AdjudicationItem:
    sent_id: str
    markable: str
    reason: str
    values: list = field(default_factory=list)


@dataclass
class MergeReport:
    quality_histogram: Counter = field(default_factory=Counter)
    sentences_kept: int = 0
    sentences_dropped: int = 0
    predicates_kept: int = 0
    arguments_kept: int = 0
    frames_dropped: Counter = field(default_factory=Counter)
    arguments_dropped: Counter = field(default_factory=Counter)
    adjudication_queue: list[AdjudicationItem] = field(default_factory=list)
    edits_applied: int = 0
    edits_deferred: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "quality_histogram": dict(self.quality_histogram),
            "sentences_kept": self.sentences_kept,
            "sentences_dropped": self.sentences_dropped,
            "predicates_kept": self.predicates_kept,
            "arguments_kept": self.arguments_kept,
            "frames_dropped": dict(self.frames_dropped),
            "arguments_dropped": dict(self.arguments_dropped),
            "adjudication_queue": [
                {"sent_id": item.sent_id, "markable": item.markable,
                 "reason": item.reason, "values": item.values}
                for item in self.adjudication_queue
            ],
            "edits_applied": self.edits_applied,
            "edits_deferred": self.edits_deferred,
        }, indent=2, sort_keys=True)


def _majority(values: list[Markable]) -> Markable | None:
    """Most frequent markable value; None on a tie (escalates)."""
    counts = Counter(values)
    ranked = counts.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return None
    return ranked[0][0]


def _resolve_markable(task: AnnotationTask, key: str,
                      responses: list[AnnotationResponse],
                      report: MergeReport) -> Markable | None:
    """Adjudicate one markable across coders; None when it needs escalation."""
    voted = [r.markables[key] for r in responses if key in r.markables]
    if not voted:
        report.adjudication_queue.append(AdjudicationItem(
            task.sent_id, key, "unaddressed"))
        return None
    winner = _majority(voted)
    if winner is None:
        report.adjudication_queue.append(AdjudicationItem(
            task.sent_id, key, "vote_tie",
            [NONE_VALUE if m.is_none else list(m.selection) for m in voted]))
        return None
    return winner


def _apply_edit(tokens: tuple[str, ...], edited: str | None,
                sent_id: str, report: MergeReport) -> tuple[str, ...]:
    """Apply a free-text target fix only when whitespace re-tokenization keeps
    the token count (and therefore every marked index) valid; otherwise the
    edit is deferred for re-annotation."""
    if not edited:
        return tokens
    new_tokens = tuple(edited.split())
    if len(new_tokens) != len(tokens):
        report.edits_deferred.append(sent_id)
        return tokens
    if new_tokens != tokens:
        report.edits_applied += 1
    return new_tokens


def merge_validated(tasks: Sequence[AnnotationTask],
                    responses: Sequence[AnnotationResponse],
                    tgt_corpus: Sequence[Sentence],
                    policy: MergePolicy = MergePolicy(),
                    ) -> tuple[list[Sentence], MergeReport]:
    """Merge coder responses into a gold target corpus.

    Sentences whose (median) quality rating is at or below the threshold are
    dropped. Per markable: majority value across coders, ties escalated to the
    adjudication queue; NONE drops the item; flags apply the linguistic
    validation rules. Every gold predicate and argument is a single token.
    """
    tasks_by_id = {t.task_id: t for t in tasks}
    tgt_by_id = {s.sent_id: s for s in tgt_corpus}
    grouped: dict[str, list[AnnotationResponse]] = defaultdict(list)
    for response in responses:
        task = tasks_by_id.get(response.task_id)
        if task is None:
            raise CurationError(f"response references unknown task "
                                f"{response.task_id!r}")
        validate_response(response, task)
        grouped[response.task_id].append(response)

    report = MergeReport()
    gold: list[Sentence] = []
    for task in tasks:
        replies = sorted(grouped.get(task.task_id, []), key=lambda r: r.coder_id)
        if not replies:
            continue
        if task.sent_id not in tgt_by_id:
            raise PairingError(f"task {task.task_id}: no target sentence "
                               f"{task.sent_id!r} in the corpus")
        target = tgt_by_id[task.sent_id]
        # lower median keeps the adjudicated rating an observed integer
        quality = statistics.median_low(r.quality for r in replies)
        report.quality_histogram[quality] += 1
        if quality <= policy.quality_threshold:
            report.sentences_dropped += 1
            continue
        report.sentences_kept += 1

        edits = [r.edited_target_text for r in replies if r.edited_target_text]
        forms = _apply_edit(
            tuple(t.form for t in target.tokens),
            edits[0] if edits else None, task.sent_id, report)
        target_tokens = tuple(
            tok if tok.form == form else replace(tok, form=form)
            for tok, form in zip(target.tokens, forms)
        )

        frames: list[PredicateFrame] = []
        occupied: set[int] = set()
        for pos, pred in enumerate(task.predicates):
            value = _resolve_markable(task, predicate_key(pos), replies, report)
            if value is None:
                report.frames_dropped["needs_adjudication"] += 1
                continue
            if value.is_none:
                report.frames_dropped["unrealized"] += 1
                continue
            if value.flags & PREDICATE_DROP_FLAGS:
                reason = (FLAG_NOMINALIZATION
                          if FLAG_NOMINALIZATION in value.flags else FLAG_LIGHT_VERB)
                report.frames_dropped[reason] += 1
                continue
            if len(value.selection) == 1:
                head = value.selection[0]
            else:
                # separable prefix: particle depends on the stem, so the
                # span head IS the truncated stem; MWEs/NEs relocate to the
                # syntactic head of the marked span
                head = head_of_span(value.selection, target)
            if head in occupied:
                report.adjudication_queue.append(AdjudicationItem(
                    task.sent_id, predicate_key(pos), "duplicate_target",
                    [head]))
                report.frames_dropped["needs_adjudication"] += 1
                continue
            occupied.add(head)

            roles = []
            for arg_index, role in pred.arguments:
                arg_value = _resolve_markable(
                    task, argument_key(pos, arg_index), replies, report)
                if arg_value is None:
                    report.arguments_dropped["needs_adjudication"] += 1
                    continue
                if arg_value.is_none:
                    report.arguments_dropped["unrealized"] += 1
                    continue
                if len(arg_value.selection) == 1:
                    arg_head = arg_value.selection[0]
                else:
                    arg_head = head_of_span(arg_value.selection, target)
                if any(existing == arg_head for existing, _ in roles):
                    report.arguments_dropped["duplicate_target"] += 1
                    continue
                roles.append((arg_head, role))
            frames.append(make_frame(head, pred.sense, roles))
            report.predicates_kept += 1
            report.arguments_kept += len(roles)

        frames.sort(key=lambda f: f.predicate_index)
        gold.append(Sentence(task.sent_id, target_tokens, tuple(frames)))
    return gold, report


def identity_responses(tasks: Sequence[AnnotationTask],
                       coder_id: str = "adjudicated") -> list[AnnotationResponse]:
    """Responses that select exactly the indices the tasks already carry.

    Meaningful for tasks derived from an annotated corpus viewed as its own
    source (export_tasks(gold, gold, verbal_pos_tags=None)): merging them back
    must reproduce that corpus unchanged.
    """
    responses = []
    for task in tasks:
        markables: dict[str, Markable] = {}
        for pos, pred in enumerate(task.predicates):
            markables[predicate_key(pos)] = Markable((pred.source_index,))
            for arg_index, _role in pred.arguments:
                markables[argument_key(pos, arg_index)] = Markable((arg_index,))
        responses.append(AnnotationResponse(
            task_id=task.task_id, coder_id=coder_id, quality=5,
            markables=markables))
    return responses
