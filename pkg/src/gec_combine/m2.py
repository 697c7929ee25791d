"""Reading, writing and applying edits in the M2 annotation format.

An M2 file is a sequence of blocks separated by blank lines::

    S This are bad .
    A 1 2|||R:VERB:SVA|||is|||REQUIRED|||-NONE-|||0

The ``S`` line holds the whitespace-tokenized source sentence; each ``A``
line holds one typed edit against it, tagged with the annotator id.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AlignmentError, M2ParseError, OverlapError

NOOP = "noop"
NONE_FIELD = "-NONE-"


@dataclass(frozen=True)
class Edit:
    """A typed correction of the source span ``[start, end)``.

    ``start == end`` is an insertion before token ``start``; an empty
    ``replacement`` is a deletion.  Multi-token replacements are stored as a
    single space-joined string.
    """

    start: int
    end: int
    error_type: str
    replacement: str = ""
    annotator: int = 0

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")
        if not self.error_type:
            raise ValueError("error_type must be nonempty")

    @property
    def tokens(self) -> list[str]:
        return self.replacement.split()

    @property
    def is_insertion(self) -> bool:
        return self.start == self.end

    @property
    def key(self) -> tuple[int, int, str]:
        """What must agree for two edits to produce the same correction."""
        return self.start, self.end, self.replacement

    def to_m2(self) -> str:
        return (f"A {self.start} {self.end}|||{self.error_type}|||{self.replacement}"
                f"|||REQUIRED|||{NONE_FIELD}|||{self.annotator}")


def edit_sort_key(edit: Edit):
    return edit.start, edit.end, edit.replacement, edit.error_type


def edits_conflict(a: Edit, b: Edit) -> bool:
    """True when ``a`` and ``b`` touch the same location of the source.

    Spans conflict when they overlap, when both insert at the same point, or
    when one inserts strictly inside the other's span.  Identical edits are
    duplicates, not conflicts.
    """
    if a.start == b.start and a.end == b.end and a.replacement == b.replacement \
            and a.error_type == b.error_type:
        return False
    if max(a.start, b.start) < min(a.end, b.end):
        return True
    if a.is_insertion and b.is_insertion:
        return a.start == b.start
    if a.is_insertion:
        return b.start < a.start < b.end
    if b.is_insertion:
        return a.start < b.start < a.end
    return False


@dataclass(frozen=True)
class SentenceAnnotation:
    """One M2 block: a source sentence and every annotator's edits.

    ``annotators`` lists every annotator id present in the block, including
    ones that only contributed a noop line.  A block with no ``A`` lines is
    treated as a single noop from annotator 0.
    """

    source_tokens: tuple[str, ...]
    edits: tuple[Edit, ...] = ()
    annotators: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "source_tokens", tuple(self.source_tokens))
        edits = tuple(sorted(self.edits, key=lambda e: (e.annotator,) + edit_sort_key(e)))
        object.__setattr__(self, "edits", edits)
        ids = set(self.annotators) | {e.annotator for e in edits}
        object.__setattr__(self, "annotators", tuple(sorted(ids)) or (0,))
        n = len(self.source_tokens)
        for e in edits:
            if e.end > n:
                raise ValueError(f"edit span [{e.start}, {e.end}) exceeds {n} source tokens")

    def edits_for(self, annotator: int) -> tuple[Edit, ...]:
        return tuple(e for e in self.edits if e.annotator == annotator)

    @property
    def hypothesis_edits(self) -> tuple[Edit, ...]:
        """Edits of the lowest annotator id (system outputs only carry one)."""
        return self.edits_for(self.annotators[0])

    @property
    def source(self) -> str:
        return " ".join(self.source_tokens)


@dataclass(frozen=True)
class CorpusEdits:
    sentences: tuple[SentenceAnnotation, ...]
    system_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return CorpusEdits(self.sentences[index], self.system_id)
        return self.sentences[index]

    def relabel(self, system_id: str) -> "CorpusEdits":
        return CorpusEdits(self.sentences, system_id)

    def error_types(self) -> set[str]:
        return {e.error_type for s in self.sentences for e in s.edits}


def _parse_a_line(line: str, lineno: int, n_tokens: int) -> Edit | None:
    fields = line[2:].split("|||")
    if len(fields) != 6:
        raise M2ParseError(f"expected 6 '|||'-separated fields, got {len(fields)}", lineno)
    span, error_type, replacement, _, _, annotator = fields
    parts = span.split()
    try:
        if len(parts) != 2:
            raise ValueError
        start, end = int(parts[0]), int(parts[1])
    except ValueError:
        raise M2ParseError(f"malformed span {span!r}", lineno) from None
    try:
        annotator = int(annotator)
    except ValueError:
        raise M2ParseError(f"malformed annotator id {annotator!r}", lineno) from None
    if error_type == NOOP and (start, end) == (-1, -1):
        return None
    if start < 0 or end < start:
        raise M2ParseError(f"invalid span {start} {end}", lineno)
    if end > n_tokens:
        raise M2ParseError(f"span {start} {end} exceeds {n_tokens} source tokens", lineno)
    if not error_type:
        raise M2ParseError("empty error type", lineno)
    if replacement == NONE_FIELD:
        replacement = ""
    return Edit(start, end, error_type, " ".join(replacement.split()), annotator)


def _parse_block(lines: list[tuple[int, str]]) -> SentenceAnnotation:
    lineno, first = lines[0]
    if not (first.startswith("S ") or first == "S"):
        raise M2ParseError("block must start with an 'S ' line", lineno)
    tokens = tuple(first[2:].split())
    edits = []
    annotators = set()
    for lineno, line in lines[1:]:
        if not line.startswith("A "):
            raise M2ParseError(f"expected an 'A ' line, got {line[:20]!r}", lineno)
        edit = _parse_a_line(line, lineno, len(tokens))
        if edit is None:
            annotators.add(int(line.rsplit("|||", 1)[1]))
        else:
            edits.append(edit)
    return SentenceAnnotation(tokens, tuple(edits), tuple(annotators))


def parse_m2(text: str | Iterable[str], system_id: str = "") -> CorpusEdits:
    """Parse M2 text (a string or an iterable of lines) into a corpus."""
    if isinstance(text, str):
        text = text.splitlines()
    sentences = []
    block: list[tuple[int, str]] = []
    for lineno, line in enumerate(text, 1):
        line = line.rstrip("\r\n")
        if line.strip():
            block.append((lineno, line))
        elif block:
            sentences.append(_parse_block(block))
            block = []
    if block:
        sentences.append(_parse_block(block))
    return CorpusEdits(tuple(sentences), system_id)


def serialize_m2(corpus: CorpusEdits) -> str:
    blocks = []
    for sent in corpus:
        lines = [f"S {sent.source}"]
        for annotator in sent.annotators:
            edits = sent.edits_for(annotator)
            if not edits:
                lines.append(f"A -1 -1|||{NOOP}|||{NONE_FIELD}|||REQUIRED|||{NONE_FIELD}|||{annotator}")
            lines.extend(e.to_m2() for e in edits)
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def read_m2(path, system_id: str | None = None) -> CorpusEdits:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        return parse_m2(f, path.stem if system_id is None else system_id)


def apply_edits(source_tokens: Sequence[str], edits: Iterable[Edit]) -> list[str]:
    """Return ``source_tokens`` with ``edits`` applied.

    Edits must not conflict with each other (see :func:`edits_conflict`);
    they are spliced right to left so earlier offsets stay valid.
    """
    edits = sorted(edits, key=edit_sort_key)
    for a, b in combinations(edits, 2):
        if a == b or edits_conflict(a, b):
            raise OverlapError(f"edits overlap: {a} / {b}")
    tokens = list(source_tokens)
    for e in edits:
        if e.end > len(tokens):
            raise ValueError(f"edit span [{e.start}, {e.end}) exceeds {len(tokens)} tokens")
    for e in reversed(edits):
        tokens[e.start:e.end] = e.tokens
    return tokens


def check_aligned(corpora: Sequence[CorpusEdits]) -> None:
    """Raise :class:`AlignmentError` unless all corpora share their source side."""
    if not corpora:
        return
    first = corpora[0]
    for other in corpora[1:]:
        if len(other) != len(first):
            raise AlignmentError(
                f"corpus {other.system_id!r} has {len(other)} sentences, "
                f"{first.system_id!r} has {len(first)}")
        for i, (a, b) in enumerate(zip(first, other)):
            if a.source_tokens != b.source_tokens:
                raise AlignmentError(
                    f"sentence {i} differs between {first.system_id!r} and "
                    f"{other.system_id!r}: {a.source[:60]!r} vs {b.source[:60]!r}")
