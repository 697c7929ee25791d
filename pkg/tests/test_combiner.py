from collections import Counter

import pytest

from gec_combine.combiner import (CandidateEdit, ConflictPolicy, combine_corpus, conflict_clusters,
                                  resolve_conflicts, select_candidates)
from gec_combine.counting import build_count_matrix
from gec_combine.errors import AlignmentError, UnknownTypeError
from gec_combine.m2 import CorpusEdits, Edit, SentenceAnnotation, apply_edits, serialize_m2
from gec_combine.solver import SelectionMatrix, solve

LOWEST = ConflictPolicy("lowest_system_index")


def selection_for(assignment, systems=("sys_a", "sys_b")):
    return SelectionMatrix.from_assignment(assignment, systems)


@pytest.fixture
def learned(sys_a, sys_b, reference):
    return solve(build_count_matrix([sys_a, sys_b], reference)).selection


def test_single_system_selection_keeps_that_system(sys_a, sys_b, learned):
    sel = SelectionMatrix.single_system(0, learned.system_ids, learned.type_index)
    per_sentence = select_candidates([sys_a, sys_b], sel)
    assert [[c.edit for c in cands] for cands in per_sentence] == [list(s.edits) for s in sys_a]
    assert all(c.source_system == 0 for cands in per_sentence for c in cands)


def test_filter_by_type():
    tokens = ("a", "b", "c")
    s0 = CorpusEdits([SentenceAnnotation(tokens, (Edit(0, 1, "A", "x"), Edit(2, 3, "B", "y")))], "s0")
    s1 = CorpusEdits([SentenceAnnotation(tokens, (Edit(1, 2, "B", "z"),))], "s1")
    sel = selection_for({"A": "s0", "B": "s1"}, ("s0", "s1"))
    (cands,) = select_candidates([s0, s1], sel)
    assert cands == [CandidateEdit(Edit(0, 1, "A", "x"), 0), CandidateEdit(Edit(1, 2, "B", "z"), 1)]


def test_fixture_candidates_by_hand(sys_a, sys_b, learned):
    # M:DET and TENSE from sys_b, everything else from sys_a
    got = [sorted((c.source_system, c.edit.start, c.edit.end, c.edit.replacement) for c in cands)
           for cands in select_candidates([sys_a, sys_b], learned)]
    assert got == [
        [(0, 1, 2, "is"), (1, 2, 2, "a")],
        [(1, 1, 2, "went"), (1, 3, 3, "the")],
        [(0, 2, 3, "apples"), (1, 2, 3, "an apple")],
        [],
    ]


def test_hypothesis_order_does_not_matter(sys_a, sys_b, learned):
    ab = combine_corpus([sys_a, sys_b], learned, LOWEST)
    ba = combine_corpus([sys_b, sys_a], learned, LOWEST)
    assert ab.corrected == ba.corrected


def test_unknown_types(sys_a, sys_b):
    sel = selection_for({"M:DET": "sys_a"})
    cands = select_candidates([sys_a, sys_b], sel)
    assert all(c.edit.error_type == "M:DET" for cs in cands for c in cs)
    with pytest.raises(UnknownTypeError):
        select_candidates([sys_a, sys_b], sel, unknown="error")


def test_unlabelled_system_rejected(sys_a, learned):
    with pytest.raises(AlignmentError):
        select_candidates([sys_a.relabel("other")], learned)


def test_clusters_are_transitive():
    chain = [CandidateEdit(Edit(0, 2, "A", "x"), 0), CandidateEdit(Edit(1, 3, "B", "y"), 1),
             CandidateEdit(Edit(2, 4, "C", "z"), 0), CandidateEdit(Edit(5, 6, "D", "w"), 1)]
    clusters = conflict_clusters(chain)
    assert [len(c) for c in clusters] == [3, 1]


def test_no_conflicts_is_dedup():
    e1, e2 = Edit(0, 1, "A", "x"), Edit(2, 3, "B", "y")
    cands = [CandidateEdit(e1, 0), CandidateEdit(e1, 1), CandidateEdit(e2, 1)]
    for mode in ("random", "lowest_system_index", "skip_all"):
        assert resolve_conflicts(cands, ConflictPolicy(mode)) == [e1, e2]


def test_lowest_system_index_rule():
    cands = [CandidateEdit(Edit(1, 3, "A", "x"), 2), CandidateEdit(Edit(2, 4, "B", "y"), 1),
             CandidateEdit(Edit(0, 2, "C", "z"), 1)]
    assert resolve_conflicts(cands, LOWEST) == [Edit(0, 2, "C", "z")]


def test_skip_all_drops_cluster():
    cands = [CandidateEdit(Edit(1, 3, "A", "x"), 0), CandidateEdit(Edit(2, 4, "B", "y"), 1),
             CandidateEdit(Edit(5, 6, "C", "z"), 1)]
    assert resolve_conflicts(cands, ConflictPolicy("skip_all")) == [Edit(5, 6, "C", "z")]


def test_random_choice_is_uniform_over_seeds():
    a, b = Edit(2, 2, "M:DET", "the"), Edit(2, 2, "M:DET", "a")
    cands = [CandidateEdit(a, 0), CandidateEdit(b, 1)]
    picks = Counter(resolve_conflicts(cands, ConflictPolicy("random", seed))[0] for seed in range(1000))
    assert set(picks) == {a, b}
    assert all(400 <= n <= 600 for n in picks.values())


def test_random_choice_depends_on_sentence_not_order():
    cands = [CandidateEdit(Edit(0, 1, "A", "x"), 0), CandidateEdit(Edit(0, 1, "B", "y"), 1)]
    policy = ConflictPolicy("random", 7)
    picks = [resolve_conflicts(cands, policy, k) for k in range(50)]
    assert picks == [resolve_conflicts(list(reversed(cands)), policy, k) for k in range(50)]
    assert len({p[0] for p in picks}) == 2


def test_exact_span_location_rule():
    cands = [CandidateEdit(Edit(1, 3, "A", "x"), 0), CandidateEdit(Edit(2, 4, "B", "y"), 1)]
    kept = resolve_conflicts(cands, ConflictPolicy("lowest_system_index", location="exact_span"))
    assert kept == [Edit(1, 3, "A", "x")]


def test_fixture_pipeline_exact_text(sys_a, sys_b, learned):
    comb = combine_corpus([sys_a, sys_b], learned, LOWEST)
    assert [" ".join(t) for t in comb.corrected] == [
        "This is a bad sentence .",
        "He went to the school yesterday .",
        "I like apples .",
        "Good .",
    ]
    assert comb.conflicts == 1 and comb.candidates == 6
    corpus, corrected = comb
    assert corrected == comb.corrected
    assert all(e.annotator == 0 for s in corpus for e in s.edits)


def test_single_system_identity(sys_a, sys_b, learned):
    for i, hyp in enumerate((sys_a, sys_b)):
        sel = SelectionMatrix.single_system(i, learned.system_ids, learned.type_index)
        comb = combine_corpus([sys_a, sys_b], sel, ConflictPolicy("random", 3))
        assert comb.corrected == [apply_edits(s.source_tokens, s.edits) for s in hyp]


def test_empty_hypotheses_give_source(reference):
    empty = [CorpusEdits([SentenceAnnotation(s.source_tokens) for s in reference], name)
             for name in ("x", "y")]
    sel = SelectionMatrix.from_assignment({"M:DET": "x"}, ("x", "y"))
    comb = combine_corpus(empty, sel)
    assert comb.corrected == [list(s.source_tokens) for s in reference]


def test_invariants_on_fixture(sys_a, sys_b, learned):
    systems = [sys_a, sys_b]
    for seed in range(20):
        comb = combine_corpus(systems, learned, ConflictPolicy("random", seed))
        for k, sent in enumerate(comb.corpus):
            for e in sent.edits:
                origins = [i for i, s in enumerate(systems)
                           if any(o.key == e.key and o.error_type == e.error_type for o in s[k].edits)]
                assert origins, "edit was synthesized"
                assert any(learned.selects(i, e.error_type) for i in origins)
            apply_edits(sent.source_tokens, sent.edits)


def test_deterministic_output(sys_a, sys_b, learned):
    outs = {serialize_m2(combine_corpus([sys_a, sys_b], learned, ConflictPolicy("random", 11)).corpus)
            for _ in range(3)}
    assert len(outs) == 1


def test_policy_validation():
    with pytest.raises(ValueError):
        ConflictPolicy("first")
    with pytest.raises(ValueError):
        ConflictPolicy(seed=-1)
    with pytest.raises(ValueError):
        ConflictPolicy(seed=2 ** 64)
