"""CoNLL-2009 corpus model and round-tripping parser/writer.

The data model is head-based: a predicate is a single token, every argument is
a single token carrying a role label. Frames are kept in APRED column order,
which equals predicate token order in a well-formed file.

Column layout (tab-separated, 14 fixed columns + one APRED column per
predicate): ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL
PDEPREL FILLPRED PRED APRED1..APREDn. Gold and predicted column pairs are
read with a gold-first fallback and written mirrored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from .errors import ParseError, SerializationError, StructuralError

PLACEHOLDER = "_"
SENT_ID_PREFIX = "# sent_id ="


@dataclass(frozen=True)
class Token:
    """One corpus token. `index` is 1-based; `head` is 0 for the root."""

    index: int
    form: str
    lemma: str = ""
    pos: str = ""
    head: int = 0
    deprel: str = ""


@dataclass(frozen=True)
class PredicateFrame:
    """A predicate token plus its head-based argument labels.

    `roles` holds (argument token index, role label) pairs, sorted by index;
    at most one label per argument index.
    """

    predicate_index: int
    sense: str
    roles: tuple[tuple[int, str], ...] = ()

    def role_for(self, index: int) -> str | None:
        for arg_index, label in self.roles:
            if arg_index == index:
                return label
        return None


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    tokens: tuple[Token, ...]
    frames: tuple[PredicateFrame, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> Token:
        """1-based access mirroring CoNLL numbering."""
        return self.tokens[index - 1]


def make_frame(predicate_index: int, sense: str,
               roles: Iterable[tuple[int, str]]) -> PredicateFrame:
    """Build a frame with canonically sorted, de-duplicated roles."""
    seen: dict[int, str] = {}
    for idx, label in roles:
        if idx in seen and seen[idx] != label:
            raise StructuralError(
                f"conflicting roles {seen[idx]!r} and {label!r} for argument {idx}")
        seen[idx] = label
    ordered = tuple(sorted(seen.items()))
    return PredicateFrame(predicate_index, sense, ordered)


def validate_sentence(sentence: Sentence) -> None:
    """Check the structural invariants; raise StructuralError on violation."""
    n = len(sentence.tokens)
    for pos, token in enumerate(sentence.tokens, start=1):
        if token.index != pos:
            raise StructuralError(
                f"{sentence.sent_id}: token index {token.index} at position {pos}, "
                "indices must be contiguous from 1")
        if not (0 <= token.head <= n):
            raise StructuralError(
                f"{sentence.sent_id}: head {token.head} of token {pos} out of range 0..{n}")
        if token.head == token.index:
            raise StructuralError(
                f"{sentence.sent_id}: token {pos} is its own head")
    seen_predicates: set[int] = set()
    for frame in sentence.frames:
        if not 1 <= frame.predicate_index <= n:
            raise StructuralError(
                f"{sentence.sent_id}: predicate index {frame.predicate_index} out of range")
        if frame.predicate_index in seen_predicates:
            raise StructuralError(
                f"{sentence.sent_id}: duplicate predicate at token {frame.predicate_index}")
        seen_predicates.add(frame.predicate_index)
        arg_indices = [idx for idx, _ in frame.roles]
        if len(arg_indices) != len(set(arg_indices)):
            raise StructuralError(
                f"{sentence.sent_id}: duplicate argument index in frame "
                f"at token {frame.predicate_index}")
        for idx, _ in frame.roles:
            if not 1 <= idx <= n:
                raise StructuralError(
                    f"{sentence.sent_id}: argument index {idx} out of range")
    frame_order = [f.predicate_index for f in sentence.frames]
    if frame_order != sorted(frame_order):
        raise StructuralError(
            f"{sentence.sent_id}: frames not in predicate (APRED column) order")


def _pick(gold: str, predicted: str) -> str:
    return gold if gold != PLACEHOLDER else predicted


def _parse_block(lines: list[tuple[int, str]], sent_id: str) -> Sentence:
    rows = []
    width = None
    for lineno, line in lines:
        cols = line.split("\t")
        if len(cols) < 14:
            raise ParseError(
                f"expected >= 14 tab-separated columns, got {len(cols)}", lineno)
        if width is None:
            width = len(cols)
        elif len(cols) != width:
            raise ParseError(
                f"ragged block: row has {len(cols)} columns, block started with {width}",
                lineno)
        rows.append((lineno, cols))

    tokens = []
    predicates: list[tuple[int, str]] = []  # (token index, sense)
    for position, (lineno, cols) in enumerate(rows, start=1):
        try:
            head = int(_pick(cols[8], cols[9]))
        except ValueError:
            raise ParseError(f"non-integer HEAD {cols[8]!r}/{cols[9]!r}", lineno)
        try:
            index = int(cols[0])
        except ValueError:
            raise ParseError(f"non-integer ID {cols[0]!r}", lineno)
        def clean(value: str) -> str:
            return "" if value == PLACEHOLDER else value

        tokens.append(Token(
            index=index,
            form=cols[1],
            lemma=clean(_pick(cols[2], cols[3])),
            pos=clean(_pick(cols[4], cols[5])),
            head=head,
            deprel=clean(_pick(cols[10], cols[11])),
        ))
        if cols[12] == "Y":
            predicates.append((position, cols[13]))

    apred_count = width - 14
    if apred_count != len(predicates):
        raise StructuralError(
            f"{sent_id}: {len(predicates)} FILLPRED=Y rows but {apred_count} APRED columns")

    frames = []
    for j, (pred_index, sense) in enumerate(predicates):
        roles = []
        for position, (_, cols) in enumerate(rows, start=1):
            label = cols[14 + j]
            if label != PLACEHOLDER:
                roles.append((position, label))
        frames.append(make_frame(pred_index, sense, roles))

    sentence = Sentence(sent_id, tuple(tokens), tuple(frames))
    validate_sentence(sentence)
    return sentence


def iter_conll09(stream: Iterable[str]) -> Iterator[Sentence]:
    """Yield sentences from a CoNLL-2009 character stream, in file order.

    Sentences without a `# sent_id = …` comment get positional ids "s0",
    "s1", … so that parallel corpora can be paired by order.
    """
    block: list[tuple[int, str]] = []
    pending_id: str | None = None
    count = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line.startswith("#"):
            if line.startswith(SENT_ID_PREFIX):
                pending_id = line[len(SENT_ID_PREFIX):].strip()
            continue
        if not line.strip():
            if block:
                yield _parse_block(block, pending_id or f"s{count}")
                count += 1
                block = []
                pending_id = None
            continue
        block.append((lineno, line))
    if block:
        yield _parse_block(block, pending_id or f"s{count}")


def parse_conll09(stream: Iterable[str] | str) -> list[Sentence]:
    if isinstance(stream, str):
        stream = stream.splitlines(keepends=True)
    sentences = list(iter_conll09(stream))
    seen: set[str] = set()
    for sentence in sentences:
        if sentence.sent_id in seen:
            raise StructuralError(f"duplicate sent_id {sentence.sent_id!r}")
        seen.add(sentence.sent_id)
    return sentences


def load_conll09(path) -> list[Sentence]:
    with open(path, encoding="utf-8", newline="") as handle:
        return parse_conll09(handle)


def _format_sentence(sentence: Sentence, explicit_id: bool) -> str:
    """Render one sentence block (without the trailing blank separator)."""
    validate_sentence(sentence)
    predicates = {f.predicate_index: f for f in sentence.frames}
    lines = []
    if explicit_id:
        lines.append(f"{SENT_ID_PREFIX} {sentence.sent_id}")
    for token in sentence.tokens:
        lemma = token.lemma or PLACEHOLDER
        pos = token.pos or PLACEHOLDER
        deprel = token.deprel or PLACEHOLDER
        frame = predicates.get(token.index)
        cols = [
            str(token.index), token.form,
            lemma, lemma,
            pos, pos,
            PLACEHOLDER, PLACEHOLDER,
            str(token.head), str(token.head),
            deprel, deprel,
            "Y" if frame else PLACEHOLDER,
            frame.sense if frame else PLACEHOLDER,
        ]
        for other in sentence.frames:
            cols.append(other.role_for(token.index) or PLACEHOLDER)
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"


def write_conll09(sentences: Iterable[Sentence], stream: TextIO | None = None,
                  explicit_ids: bool | None = None) -> str:
    """Serialize to canonical CoNLL-2009. Returns the text; also writes to
    `stream` when one is given.

    `explicit_ids=None` preserves sent_id comments exactly when the id is not
    the positional default, so parse -> write round-trips both id styles.
    Raises SerializationError naming the sentence when an invariant fails.
    """
    chunks = []
    for position, sentence in enumerate(sentences):
        if explicit_ids is None:
            with_id = sentence.sent_id != f"s{position}"
        else:
            with_id = explicit_ids
        try:
            chunks.append(_format_sentence(sentence, with_id))
        except StructuralError as exc:
            raise SerializationError(
                f"cannot serialize sentence {sentence.sent_id!r}: {exc}") from exc
    # canonical form: every block, including the last, ends with a blank line
    text = "".join(chunk + "\n" for chunk in chunks)
    if stream is not None:
        stream.write(text)
    return text


def save_conll09(sentences: Iterable[Sentence], path,
                 explicit_ids: bool | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        write_conll09(sentences, handle, explicit_ids=explicit_ids)


def label_multiset(sentence: Sentence) -> list[str]:
    """All annotation labels in a sentence: one "PRED" per frame plus every
    role label. Used by density/coverage accounting."""
    labels = []
    for frame in sentence.frames:
        labels.append("PRED")
        labels.extend(label for _, label in frame.roles)
    return labels
