"""Inference: keep the selected systems' edits and apply them.

For every sentence, each system's edits whose error type is assigned to
that system are kept.  Edits from different systems can still land on the
same location (two systems disagreeing about the error type); such edits
are grouped into conflict clusters and one edit per cluster survives.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import AlignmentError, UnknownTypeError
from .m2 import (CorpusEdits, Edit, SentenceAnnotation, apply_edits, check_aligned,
                 edit_sort_key, edits_conflict)
from .solver import ABSTAIN, SelectionMatrix

log = logging.getLogger(__name__)

CONFLICT_MODES = ("random", "lowest_system_index", "skip_all")

__all__ = ["CandidateEdit", "ConflictPolicy", "Combination", "edits_conflict",
           "select_candidates", "resolve_conflicts", "combine_corpus"]


class CandidateEdit(NamedTuple):
    edit: Edit
    source_system: int


@dataclass(frozen=True)
class ConflictPolicy:
    mode: str = "random"
    seed: int = 0
    # "overlap" uses edits_conflict; "exact_span" only groups identical spans
    location: str = "overlap"

    def __post_init__(self):
        if self.mode not in CONFLICT_MODES:
            raise ValueError(f"unknown conflict mode {self.mode!r}; choose from {CONFLICT_MODES}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.location not in ("overlap", "exact_span"):
            raise ValueError(f"unknown conflict location rule {self.location!r}")

    def rng(self, sentence_index: int) -> np.random.Generator:
        """Generator for one sentence, independent of processing order."""
        seq = np.random.SeedSequence(self.seed, spawn_key=(sentence_index,))
        return np.random.Generator(np.random.PCG64(seq))


def _system_rows(hypotheses: Sequence[CorpusEdits], selection: SelectionMatrix) -> list[int]:
    rows = {s: i for i, s in enumerate(selection.system_ids)}
    out = []
    for hyp in hypotheses:
        if hyp.system_id not in rows:
            raise AlignmentError(
                f"system {hyp.system_id!r} is not in the selection "
                f"(known: {', '.join(s for s in selection.system_ids if s != ABSTAIN)})")
        out.append(rows[hyp.system_id])
    if len(set(out)) != len(out):
        raise AlignmentError("the same system was given twice")
    return out


def select_candidates(hypotheses: Sequence[CorpusEdits], selection: SelectionMatrix,
                      unknown: str = "drop") -> list[list[CandidateEdit]]:
    """Per sentence, the hypothesis edits whose (system, type) is selected.

    Hypotheses are matched to selection rows by ``system_id``, so their
    order does not matter.  Edits with a type the selection has never seen
    are dropped (``unknown="drop"``) or raise :class:`UnknownTypeError`.
    """
    if unknown not in ("drop", "error"):
        raise ValueError("unknown must be 'drop' or 'error'")
    check_aligned(hypotheses)
    rows = _system_rows(hypotheses, selection)
    n_sent = len(hypotheses[0]) if hypotheses else 0
    out: list[list[CandidateEdit]] = [[] for _ in range(n_sent)]
    dropped = 0
    for hyp, row in zip(hypotheses, rows):
        for k, sent in enumerate(hyp):
            for e in sent.hypothesis_edits:
                j = selection.type_index.get(e.error_type)
                if j is None:
                    if unknown == "error":
                        raise UnknownTypeError(
                            f"sentence {k}: type {e.error_type!r} from {hyp.system_id!r} "
                            "is not in the selection")
                    dropped += 1
                elif selection.x[row, j]:
                    out[k].append(CandidateEdit(e, row))
    if dropped:
        log.info("dropped %d edits with error types unknown to the selection", dropped)
    for cands in out:
        cands.sort(key=lambda c: edit_sort_key(c.edit) + (c.source_system,))
    return out


def _dedupe(candidates: Sequence[CandidateEdit]) -> list[CandidateEdit]:
    seen = {}
    for c in sorted(candidates, key=lambda c: (c.source_system,) + edit_sort_key(c.edit)):
        ident = (c.edit.start, c.edit.end, c.edit.error_type, c.edit.replacement)
        seen.setdefault(ident, c)
    return sorted(seen.values(), key=lambda c: edit_sort_key(c.edit) + (c.source_system,))


def conflict_clusters(candidates: Sequence[CandidateEdit],
                      location: str = "overlap") -> list[list[CandidateEdit]]:
    """Connected components of the conflict graph, in source order."""
    parent = list(range(len(candidates)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in combinations(range(len(candidates)), 2):
        a, b = candidates[i].edit, candidates[j].edit
        if location == "exact_span":
            hit = (a.start, a.end) == (b.start, b.end)
        else:
            hit = edits_conflict(a, b)
        if hit:
            parent[find(i)] = find(j)
    groups: dict[int, list[CandidateEdit]] = {}
    for i, c in enumerate(candidates):
        groups.setdefault(find(i), []).append(c)
    return sorted(groups.values(), key=lambda g: edit_sort_key(g[0].edit))


def resolve_conflicts(candidates: Sequence[CandidateEdit], policy: ConflictPolicy = ConflictPolicy(),
                      sentence_index: int = 0) -> list[Edit]:
    """Reduce one sentence's candidates to a non-conflicting edit list."""
    edits, _ = _resolve(candidates, policy, sentence_index)
    return edits


def _resolve(candidates, policy, sentence_index):
    unique = _dedupe(candidates)
    clusters = conflict_clusters(unique, policy.location)
    rng = None
    kept, n_conflicts = [], 0
    for cluster in clusters:
        if len(cluster) == 1:
            kept.append(cluster[0].edit)
            continue
        n_conflicts += 1
        if policy.mode == "skip_all":
            continue
        if policy.mode == "lowest_system_index":
            choice = min(cluster, key=lambda c: (c.source_system,) + edit_sort_key(c.edit))
        else:
            if rng is None:
                rng = policy.rng(sentence_index)
            choice = cluster[int(rng.integers(len(cluster)))]
        kept.append(choice.edit)
    if policy.location == "exact_span":
        # exact-span clustering can leave overlapping survivors; keep the leftmost
        kept.sort(key=edit_sort_key)
        pruned = []
        for e in kept:
            if not any(edits_conflict(e, p) for p in pruned):
                pruned.append(e)
        kept = pruned
    return sorted(kept, key=edit_sort_key), n_conflicts


@dataclass(frozen=True)
class Combination:
    corpus: CorpusEdits
    corrected: list[list[str]]
    conflicts: int
    candidates: int

    def __iter__(self):
        # allows ``corpus, corrected = combine_corpus(...)``-style unpacking
        return iter((self.corpus, self.corrected))

    def text(self) -> str:
        return "".join(" ".join(tokens) + "\n" for tokens in self.corrected)


def combine_corpus(hypotheses: Sequence[CorpusEdits], selection: SelectionMatrix,
                   policy: ConflictPolicy = ConflictPolicy(), unknown: str = "drop",
                   system_id: str = "combined") -> Combination:
    if not hypotheses:
        raise ValueError("need at least one hypothesis corpus")
    per_sentence = select_candidates(hypotheses, selection, unknown)
    sentences, corrected = [], []
    conflicts = candidates = 0
    for k, (src, cands) in enumerate(zip(hypotheses[0], per_sentence)):
        edits, n = _resolve(cands, policy, k)
        conflicts += n
        candidates += len(cands)
        edits = [Edit(e.start, e.end, e.error_type, e.replacement, 0) for e in edits]
        sentences.append(SentenceAnnotation(src.source_tokens, tuple(edits), (0,)))
        corrected.append(apply_edits(src.source_tokens, edits))
    return Combination(CorpusEdits(tuple(sentences), system_id), corrected, conflicts, candidates)
