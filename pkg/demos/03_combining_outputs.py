"""
Combining system outputs
========================

With a selection in hand, each system keeps only the edits of the error
types it was chosen for.  Two kept edits may still target the same place
in a sentence when the systems disagree about the error type; one edit per
such conflict is kept.
"""
from collections import Counter
from pathlib import Path

from gec_combine import (ConflictPolicy, build_count_matrix, combine_corpus, evaluate, read_m2,
                         serialize_m2, solve)

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

reference = read_m2(DATA / "ref.m2")
systems = [read_m2(DATA / "sys_a.m2"), read_m2(DATA / "sys_b.m2")]
selection = solve(build_count_matrix(systems, reference)).selection
print(selection.assignment())

# In "I like apple ." sys_a fixes the noun number and sys_b inserts an
# article over the same token, under a type assigned to sys_b.  Both edits
# survive the type filter and collide.
for mode in ("lowest_system_index", "skip_all"):
    comb = combine_corpus(systems, selection, ConflictPolicy(mode))
    print(f"\n{mode}: {comb.conflicts} conflict(s)")
    print(comb.text(), end="")

# The default picks uniformly at random, reproducibly for a given seed.
outcomes = Counter()
for seed in range(200):
    comb = combine_corpus(systems, selection, ConflictPolicy("random", seed))
    outcomes[" ".join(comb.corrected[2])] += 1
print("\nrandom choice over 200 seeds:", dict(outcomes))

comb = combine_corpus(systems, selection, ConflictPolicy("random", seed=0))
print("\ncombined M2:\n" + serialize_m2(comb.corpus))
print(evaluate(comb.corpus, reference).format_table())
