"""
Held-out evaluation and per-sentence analysis
=============================================

We simulate two correction systems with complementary strengths on a
synthetic corpus: each system catches some error types reliably and others
poorly, and over-corrects a few.  The first half of the corpus trains the
selection; the second half measures whether the combination helps, overall
and sentence by sentence.
"""
import numpy as np

from gec_combine import (ConflictPolicy, CorpusEdits, Edit, SentenceAnnotation, build_count_matrix,
                         combine_corpus, evaluate, solve, split_half_analysis)

TYPES = ["M:DET", "R:PREP", "R:VERB:TENSE", "R:NOUN:NUM", "R:SPELL", "U:PUNCT", "R:VERB:SVA"]
rng = np.random.default_rng(42)

# per-type probability of fixing a reference error, and rate of spurious edits
strength = {
    "sys_a": dict(zip(TYPES, [0.8, 0.3, 0.7, 0.4, 0.9, 0.2, 0.6])),
    "sys_b": dict(zip(TYPES, [0.4, 0.7, 0.3, 0.8, 0.6, 0.5, 0.6])),
}
noise = {
    "sys_a": dict(zip(TYPES, [0.05, 0.20, 0.02, 0.10, 0.02, 0.25, 0.05])),
    "sys_b": dict(zip(TYPES, [0.15, 0.03, 0.10, 0.02, 0.05, 0.02, 0.05])),
}


def make_corpus(n_sentences):
    gold, hyps = [], {name: [] for name in strength}
    for _ in range(n_sentences):
        tokens = tuple(f"w{k}" for k in range(int(rng.integers(6, 15))))
        positions = rng.choice(len(tokens), size=int(rng.integers(0, 4)), replace=False)
        ref = [Edit(int(p), int(p) + 1, str(rng.choice(TYPES)), f"fix{p}") for p in sorted(positions)]
        gold.append(SentenceAnnotation(tokens, tuple(ref)))
        free = [k for k in range(len(tokens)) if k not in positions]
        for name in strength:
            edits = [e for e in ref if rng.random() < strength[name][e.error_type]]
            for t in TYPES:
                if free and rng.random() < noise[name][t]:
                    k = int(rng.choice(free))
                    edits.append(Edit(k, k + 1, t, f"{name}{k}"))
            hyps[name].append(SentenceAnnotation(tokens, tuple(edits)))
    return CorpusEdits(gold, "gold"), [CorpusEdits(v, k) for k, v in hyps.items()]


reference, systems = make_corpus(2000)
half = len(reference) // 2
train = [s[:half] for s in systems]
test = [s[half:] for s in systems]

result = solve(build_count_matrix(train, reference[:half]))
print(f"training F0.5 of the selection: {result.objective:.4f}")
for t, name in result.selection.assignment().items():
    print(f"  {t:<14} {name}")

combined = combine_corpus(test, result.selection, ConflictPolicy("random", seed=1)).corpus
print("\nheld-out scores")
for hyp in (*test, combined):
    r = evaluate(hyp, reference[half:])
    print(f"  {hyp.system_id:<9} P={r.precision:.4f} R={r.recall:.4f} F0.5={r.f_alpha:.4f}")

report = split_half_analysis(test[0], test[1], reference[half:], combined)
print()
print(report.format_text())
