"""Edit matching and per-system, per-error-type TP/FP/FN counts.

A hypothesis edit is a true positive when some reference edit has the same
span and replacement; the count is filed under the reference edit's type.
Unmatched hypothesis edits are false positives under their own type and
unmatched reference edits are false negatives under theirs.
"""
from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import AlignmentError
from .m2 import CorpusEdits, Edit, SentenceAnnotation, check_aligned
from .metrics import f_beta_exact


class MatchResult(NamedTuple):
    matched: list[tuple[Edit, Edit]]
    false_positives: list[Edit]
    false_negatives: list[Edit]

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.matched), len(self.false_positives), len(self.false_negatives)


def match_edits(hypothesis: Sequence[Edit], reference: Sequence[Edit]) -> MatchResult:
    pool = defaultdict(deque)
    for ref in reference:
        pool[ref.key].append(ref)
    matched, fps = [], []
    for hyp in hypothesis:
        candidates = pool.get(hyp.key)
        if candidates:
            matched.append((hyp, candidates.popleft()))
        else:
            fps.append(hyp)
    used = {id(r) for _, r in matched}
    fns = [r for r in reference if id(r) not in used]
    return MatchResult(matched, fps, fns)


def score_sentence(hypothesis: Sequence[Edit], reference: SentenceAnnotation,
                   alpha: float = 0.5, annotator: int | None = None) -> tuple[int, MatchResult]:
    """Match ``hypothesis`` against one reference annotator.

    With ``annotator=None`` every annotator is tried and the one giving the
    highest sentence-level F-alpha wins, ties going to the lowest id.
    """
    if annotator is not None:
        if annotator not in reference.annotators:
            raise KeyError(f"annotator {annotator} not present in reference sentence")
        return annotator, match_edits(hypothesis, reference.edits_for(annotator))
    best = None
    for ann in reference.annotators:
        result = match_edits(hypothesis, reference.edits_for(ann))
        f = f_beta_exact(*result.counts, alpha)
        if best is None or f > best[0]:
            best = (f, ann, result)
    return best[1], best[2]


@dataclass(frozen=True)
class ErrorTypeIndex:
    types: tuple[str, ...]

    def __post_init__(self):
        types = tuple(sorted(set(self.types)))
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "_lookup", {t: j for j, t in enumerate(types)})

    def __len__(self):
        return len(self.types)

    def __iter__(self):
        return iter(self.types)

    def __contains__(self, error_type):
        return error_type in self._lookup

    def __getitem__(self, error_type: str) -> int:
        return self._lookup[error_type]

    def get(self, error_type, default=None):
        return self._lookup.get(error_type, default)


@dataclass(frozen=True, eq=False)
class CountMatrix:
    """TP/FP/FN counts, shape (systems, error types)."""

    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    system_ids: tuple[str, ...]
    type_index: ErrorTypeIndex

    def __post_init__(self):
        shape = (len(self.system_ids), len(self.type_index))
        for name in ("tp", "fp", "fn"):
            arr = np.array(getattr(self, name), dtype=np.int64).reshape(shape)
            if (arr < 0).any():
                raise ValueError(f"negative entries in {name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "system_ids", tuple(self.system_ids))
        if not self.system_ids:
            raise ValueError("need at least one system")

    @property
    def shape(self) -> tuple[int, int]:
        return self.tp.shape

    @property
    def types(self) -> tuple[str, ...]:
        return self.type_index.types

    def __eq__(self, other):
        if not isinstance(other, CountMatrix):
            return NotImplemented
        return (self.system_ids == other.system_ids and self.types == other.types
                and all(np.array_equal(getattr(self, k), getattr(other, k))
                        for k in ("tp", "fp", "fn")))

    def row_totals(self, i: int) -> tuple[int, int, int]:
        return int(self.tp[i].sum()), int(self.fp[i].sum()), int(self.fn[i].sum())

    def to_dict(self) -> dict:
        return {"system_ids": list(self.system_ids), "types": list(self.types),
                "tp": self.tp.tolist(), "fp": self.fp.tolist(), "fn": self.fn.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "CountMatrix":
        index = ErrorTypeIndex(tuple(data["types"]))
        if list(index.types) != list(data["types"]):
            raise ValueError("types must be unique and sorted")
        return cls(data["tp"], data["fp"], data["fn"], tuple(data["system_ids"]), index)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CountMatrix":
        return cls.from_dict(json.loads(text))

    def to_tsv(self) -> str:
        lines = ["system\ttype\ttp\tfp\tfn"]
        for i, sys_id in enumerate(self.system_ids):
            for j, t in enumerate(self.types):
                lines.append(f"{sys_id}\t{t}\t{self.tp[i, j]}\t{self.fp[i, j]}\t{self.fn[i, j]}")
        return "\n".join(lines) + "\n"


def build_count_matrix(hypotheses: Sequence[CorpusEdits], reference: CorpusEdits,
                       alpha: float = 0.5, annotator: int | None = None) -> CountMatrix:
    """Accumulate TP/FP/FN per (system, error type) over a training corpus."""
    if not hypotheses:
        raise ValueError("need at least one hypothesis corpus")
    check_aligned([reference, *hypotheses])
    types = set(reference.error_types())
    for hyp in hypotheses:
        types |= hyp.error_types()
    index = ErrorTypeIndex(tuple(types))
    shape = (len(hypotheses), len(index))
    tp, fp, fn = (np.zeros(shape, dtype=np.int64) for _ in range(3))
    for i, hyp in enumerate(hypotheses):
        for h_sent, r_sent in zip(hyp, reference):
            _, result = score_sentence(h_sent.hypothesis_edits, r_sent, alpha, annotator)
            for _, ref in result.matched:
                tp[i, index[ref.error_type]] += 1
            for e in result.false_positives:
                fp[i, index[e.error_type]] += 1
            for e in result.false_negatives:
                fn[i, index[e.error_type]] += 1
    ids = tuple(h.system_id or f"system{i}" for i, h in enumerate(hypotheses))
    if len(set(ids)) != len(ids):
        raise AlignmentError(f"duplicate system ids: {ids}")
    return CountMatrix(tp, fp, fn, ids, index)


def counts_for_selection(counts: CountMatrix, x) -> tuple[int, int, int]:
    """Totals (TP, FP, FN) picked out by a 0/1 selection over ``counts``."""
    x = np.asarray(getattr(x, "x", x))
    if x.shape != counts.shape:
        raise ValueError(f"selection shape {x.shape} != count shape {counts.shape}")
    return (int((counts.tp * x).sum()), int((counts.fp * x).sum()),
            int((counts.fn * x).sum()))
