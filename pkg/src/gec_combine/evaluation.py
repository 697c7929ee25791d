"""Edit-level scoring and the per-sentence split-half comparison."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field

from .counting import score_sentence
from .m2 import CorpusEdits, check_aligned
from .metrics import f_beta_from_counts, f_beta_from_pr, precision, recall

__all__ = ["EvalReport", "AnalysisReport", "evaluate", "split_half_analysis",
           "f_beta_from_pr", "f_beta_from_counts", "sentence_scores"]


@dataclass(frozen=True)
class TypeScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f: float


@dataclass(frozen=True)
class SentenceScore:
    index: int
    tp: int
    fp: int
    fn: int
    f: float


def _score(tp, fp, fn, alpha):
    return TypeScore(tp, fp, fn, precision(tp, fp), recall(tp, fn),
                     f_beta_from_counts(tp, fp, fn, alpha))


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_alpha: float
    alpha: float = 0.5
    per_type: dict[str, TypeScore] = field(default_factory=dict)
    per_sentence: list[SentenceScore] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def format_table(self, per_type: bool = False) -> str:
        f_name = f"F{self.alpha:g}"
        header = f"{'TP':>6} {'FP':>6} {'FN':>6} {'Prec':>8} {'Rec':>8} {f_name:>8}"
        row = (f"{self.tp:>6} {self.fp:>6} {self.fn:>6} {self.precision:>8.4f} "
               f"{self.recall:>8.4f} {self.f_alpha:>8.4f}")
        lines = []
        if per_type:
            width = max([len("Category")] + [len(t) for t in self.per_type])
            lines.append(f"{'Category':<{width}} {header}")
            for t, s in sorted(self.per_type.items()):
                lines.append(f"{t:<{width}} {s.tp:>6} {s.fp:>6} {s.fn:>6} "
                             f"{s.precision:>8.4f} {s.recall:>8.4f} {s.f:>8.4f}")
            lines.append("")
        lines += [header, row]
        return "\n".join(lines) + "\n"


def sentence_scores(hypothesis: CorpusEdits, reference: CorpusEdits, alpha: float = 0.5,
                    annotator: int | None = None) -> list[SentenceScore]:
    check_aligned([reference, hypothesis])
    out = []
    for k, (h, r) in enumerate(zip(hypothesis, reference)):
        _, result = score_sentence(h.hypothesis_edits, r, alpha, annotator)
        tp, fp, fn = result.counts
        out.append(SentenceScore(k, tp, fp, fn, f_beta_from_counts(tp, fp, fn, alpha)))
    return out


def evaluate(hypothesis: CorpusEdits, reference: CorpusEdits, alpha: float = 0.5,
             annotator: int | None = None) -> EvalReport:
    """Score ``hypothesis`` against ``reference`` at corpus, type and sentence level.

    Matching and annotator choice are identical to the training-time
    counts in :mod:`gec_combine.counting`.
    """
    check_aligned([reference, hypothesis])
    by_type = {k: Counter() for k in ("tp", "fp", "fn")}
    per_sentence = []
    for k, (h, r) in enumerate(zip(hypothesis, reference)):
        _, result = score_sentence(h.hypothesis_edits, r, alpha, annotator)
        for _, ref in result.matched:
            by_type["tp"][ref.error_type] += 1
        for e in result.false_positives:
            by_type["fp"][e.error_type] += 1
        for e in result.false_negatives:
            by_type["fn"][e.error_type] += 1
        tp, fp, fn = result.counts
        per_sentence.append(SentenceScore(k, tp, fp, fn, f_beta_from_counts(tp, fp, fn, alpha)))
    types = set().union(*by_type.values())
    per_type = {t: _score(by_type["tp"][t], by_type["fp"][t], by_type["fn"][t], alpha)
                for t in sorted(types)}
    tp, fp, fn = (sum(c.values()) for c in (by_type["tp"], by_type["fp"], by_type["fn"]))
    return EvalReport(tp, fp, fn, precision(tp, fp), recall(tp, fn),
                      f_beta_from_counts(tp, fp, fn, alpha), alpha, per_type, per_sentence)


@dataclass(frozen=True)
class AnalysisReport:
    """Per-sentence comparison of a combined system with two components.

    Sentences fall in class "same" when both components get the same
    sentence F, otherwise "diff".  In "same", the combination counts as
    improved when it ties or beats the components; in "diff", when it beats
    their mean.  ``deltas`` compares aggregate F over the improved subset
    both micro-averaged (F of pooled counts) and macro-averaged (mean
    sentence F).
    """

    total: int
    class_same: int
    class_diff: int
    improved_or_equal_in_same: int
    improved_in_diff: int
    deltas: dict
    alpha: float = 0.5
    labels: tuple[str, str] = ("a", "b")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def format_text(self) -> str:
        a, b = self.labels
        rows = [
            ("test sentences", self.total),
            (f"same F for {a} and {b}", self.class_same),
            ("  combined same or higher", self.improved_or_equal_in_same),
            ("different F", self.class_diff),
            ("  combined above component mean", self.improved_in_diff),
        ]
        width = max(len(label) for label, _ in rows) + 2
        lines = [f"{label + ':':<{width}}{value}" for label, value in rows]
        for cls in ("same", "diff"):
            d = self.deltas[cls]
            for avg in ("micro", "macro"):
                s = d[avg]
                lines.append(f"{cls:>4} {avg}: combined {s['combined']:.4f} vs baseline "
                             f"{s['baseline']:.4f} (delta {s['delta']:+.4f}, n={d['subset_size']})")
        return "\n".join(lines) + "\n"


def _aggregate(scores, subset, alpha):
    if not subset:
        return {"micro": 0.0, "macro": 0.0}
    tp = sum(scores[k].tp for k in subset)
    fp = sum(scores[k].fp for k in subset)
    fn = sum(scores[k].fn for k in subset)
    return {"micro": f_beta_from_counts(tp, fp, fn, alpha),
            "macro": sum(scores[k].f for k in subset) / len(subset)}


def split_half_analysis(system_a: CorpusEdits, system_b: CorpusEdits, reference: CorpusEdits,
                        combined: CorpusEdits, alpha: float = 0.5,
                        annotator: int | None = None) -> AnalysisReport:
    check_aligned([reference, system_a, system_b, combined])
    sa = sentence_scores(system_a, reference, alpha, annotator)
    sb = sentence_scores(system_b, reference, alpha, annotator)
    sc = sentence_scores(combined, reference, alpha, annotator)
    same = [k for k in range(len(reference)) if sa[k].f == sb[k].f]
    diff = [k for k in range(len(reference)) if sa[k].f != sb[k].f]
    better_same = [k for k in same if sc[k].f >= sa[k].f]
    better_diff = [k for k in diff if sc[k].f > (sa[k].f + sb[k].f) / 2]

    deltas = {}
    for name, subset in (("same", better_same), ("diff", better_diff)):
        ga, gb, gc = (_aggregate(s, subset, alpha) for s in (sa, sb, sc))
        entry = {"subset_size": len(subset)}
        for avg in ("micro", "macro"):
            baseline = (ga[avg] + gb[avg]) / 2
            entry[avg] = {"combined": gc[avg], "system_a": ga[avg], "system_b": gb[avg],
                          "baseline": baseline, "delta": gc[avg] - baseline}
        deltas[name] = entry
    return AnalysisReport(len(reference), len(same), len(diff), len(better_same),
                          len(better_diff), deltas, alpha,
                          (system_a.system_id or "a", system_b.system_id or "b"))
