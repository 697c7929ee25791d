"""
Reading M2 files and scoring a system
=====================================

Each block of an M2 file is a tokenized source sentence followed by its
typed edits.  Here we load a small reference file and two system outputs,
apply the edits, and score each system against the references.
"""
from pathlib import Path

from gec_combine import apply_edits, evaluate, read_m2

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

reference = read_m2(DATA / "ref.m2")
systems = [read_m2(DATA / "sys_a.m2"), read_m2(DATA / "sys_b.m2")]

# The third reference sentence has two annotators with different corrections.
third = reference[2]
print("source:    ", third.source)
for ann in third.annotators:
    print(f"annotator {ann}:", " ".join(apply_edits(third.source_tokens, third.edits_for(ann))))

# What each system produced
for hyp in systems:
    print(f"\n{hyp.system_id}:")
    for sent in hyp:
        print("   ", " ".join(apply_edits(sent.source_tokens, sent.edits)))

# Edit-level scores.  A hypothesis edit is a true positive when its span and
# replacement match a reference edit; each sentence is scored against
# whichever annotator suits the system best.
for hyp in systems:
    report = evaluate(hyp, reference, alpha=0.5)
    print(f"\n== {hyp.system_id}")
    print(report.format_table(per_type=True))
