import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gec_combine.counting import CountMatrix, ErrorTypeIndex, build_count_matrix
from gec_combine.errors import CapacityError, ConstraintViolationError, NonConvergenceError
from gec_combine.metrics import f_beta_from_counts
from gec_combine.solver import (ABSTAIN, SelectionMatrix, SolverConfig, f_alpha_objective,
                                solve, solve_dinkelbach, solve_exhaustive, with_abstain)

from conftest import random_counts


def exact_f(tp, fp, fn, alpha=0.5):
    a2 = Fraction(alpha) ** 2
    return Fraction(0) if tp == 0 else (1 + a2) * tp / ((1 + a2) * tp + fp + a2 * fn)


def enumerate_optimum(counts, alpha=0.5):
    """Plain itertools enumeration; returns (best exact F, first assignment reaching it)."""
    m, n = counts.shape
    best = None
    for choice in product(range(m), repeat=n):
        cols = range(n)
        tp = sum(int(counts.tp[i, j]) for i, j in zip(choice, cols))
        fp = sum(int(counts.fp[i, j]) for i, j in zip(choice, cols))
        fn = sum(int(counts.fn[i, j]) for i, j in zip(choice, cols))
        f = exact_f(tp, fp, fn, alpha)
        if best is None or f > best[0]:
            best = (f, choice)
    return best


def single_system_objectives(counts, alpha=0.5):
    return [f_alpha_objective(counts, SelectionMatrix.single_system(i, counts.system_ids, counts.type_index), alpha)
            for i in range(counts.shape[0])]


def two_by_one():
    return CountMatrix([[2], [1]], [[0], [0]], [[1], [2]], ("s0", "s1"), ErrorTypeIndex(("T",)))


def test_objective_hand_arithmetic():
    counts = CountMatrix([[3]], [[1]], [[2]], ("s",), ErrorTypeIndex(("T",)))
    assert f_alpha_objective(counts, [[1]], 0.5) == pytest.approx(3.75 / 5.25, abs=1e-15)
    assert f_alpha_objective(counts, [[1]], 0.5) == pytest.approx(0.714286, abs=5e-7)


def test_objective_edge_cases():
    perfect = CountMatrix([[4]], [[0]], [[0]], ("s",), ErrorTypeIndex(("T",)))
    assert f_alpha_objective(perfect, [[1]]) == 1.0
    no_tp = CountMatrix([[0]], [[3]], [[5]], ("s",), ErrorTypeIndex(("T",)))
    assert f_alpha_objective(no_tp, [[1]]) == 0.0
    empty = CountMatrix([[0]], [[0]], [[0]], ("s",), ErrorTypeIndex(("T",)))
    assert f_alpha_objective(empty, [[1]]) == 0.0


@pytest.mark.parametrize("x", [[[1], [1]], [[0], [0]], [[2], [0]], [[0.5], [0.5]]])
def test_objective_rejects_infeasible(x):
    with pytest.raises(ConstraintViolationError):
        f_alpha_objective(two_by_one(), x)


def test_selection_matrix_validates():
    with pytest.raises(ConstraintViolationError):
        SelectionMatrix([[1, 1], [1, 0]], ("a", "b"), ErrorTypeIndex(("x", "y")))
    with pytest.raises(ConstraintViolationError):
        SelectionMatrix([[1, 0]], ("a", "b"), ErrorTypeIndex(("x", "y")))


def test_selection_json_roundtrip():
    sel = SelectionMatrix.from_choices([1, 0, 1], ("a", "b"), ErrorTypeIndex(("x", "y", "z")))
    assert sel.assignment() == {"x": "b", "y": "a", "z": "b"}
    assert SelectionMatrix.from_json(sel.to_json()) == sel
    counts = CountMatrix(np.arange(6).reshape(2, 3), np.ones((2, 3)), np.zeros((2, 3)),
                         ("a", "b"), ErrorTypeIndex(("x", "y", "z")))
    assert sel.to_tsv(counts).splitlines() == [
        "type\tchosen_system\ttp\tfp\tfn", "x\tb\t3\t1\t0", "y\ta\t1\t1\t0", "z\tb\t5\t1\t0"]


def test_selection_from_json_rejects_unknown_system():
    with pytest.raises(ConstraintViolationError):
        SelectionMatrix.from_json('{"system_ids": ["a"], "types": ["x"], "assignment": {"x": "b"}}')


def test_single_system_forced():
    counts = CountMatrix([[1, 0, 3]], [[2, 1, 0]], [[0, 4, 1]], ("only",), ErrorTypeIndex(("a", "b", "c")))
    for solver in (solve_exhaustive, solve_dinkelbach):
        result = solver(counts)
        assert result.selection.choices == (0, 0, 0)
        assert result.objective == f_beta_from_counts(4, 3, 5, 0.5)
    assert solve_dinkelbach(counts).iterations <= 2


def test_two_by_one_instance():
    counts = two_by_one()
    ex, dk = solve_exhaustive(counts), solve_dinkelbach(counts)
    assert ex.selection.choices == dk.selection.choices == (0,)
    assert ex.objective == dk.objective == pytest.approx(2.5 / 2.75, abs=1e-15)
    assert round(ex.objective, 6) == 0.909091


def test_fixture_optimum(sys_a, sys_b, reference):
    counts = build_count_matrix([sys_a, sys_b], reference)
    best, choice = enumerate_optimum(counts)
    for solver in (solve_exhaustive, solve_dinkelbach):
        result = solver(counts)
        assert result.selection.choices == choice
        assert Fraction(result.objective) == pytest.approx(best, abs=1e-15)
    # M:DET and TENSE from sys_b, the rest from sys_a
    assert solve(counts).selection.assignment() == {
        "M:DET": "sys_b", "R:ADJ": "sys_a", "R:NOUN:NUM": "sys_a",
        "R:VERB:SVA": "sys_a", "R:VERB:TENSE": "sys_b"}
    assert solve(counts).totals == (5, 1, 0)


def test_exhaustive_against_itertools(rng):
    for _ in range(40):
        counts = random_counts(rng, int(rng.integers(2, 4)), int(rng.integers(1, 6)), high=4)
        best, choice = enumerate_optimum(counts)
        result = solve_exhaustive(counts, chunk_size=7)
        assert result.selection.choices == choice
        assert exact_f(*result.totals) == best


def test_dinkelbach_matches_exhaustive_sweep(rng):
    for _ in range(200):
        m, n = int(rng.integers(2, 5)), int(rng.integers(2, 9))
        counts = random_counts(rng, m, n)
        ex, dk = solve_exhaustive(counts), solve_dinkelbach(counts)
        assert abs(ex.objective - dk.objective) <= 1e-12
        assert exact_f(*ex.totals) == exact_f(*dk.totals)


def test_dominance_and_monotone_lambda(rng):
    for _ in range(100):
        counts = random_counts(rng, int(rng.integers(2, 5)), int(rng.integers(1, 10)))
        result = solve_dinkelbach(counts)
        assert all(result.objective >= f for f in single_system_objectives(counts))
        lams = result.lambdas
        assert all(a < b for a, b in zip(lams, lams[1:]))
        assert all(0 <= lam <= 1 for lam in lams)


def test_exact_ties_pick_lowest_systems():
    # every system identical: the all-zeros choice vector is lexicographically smallest
    counts = CountMatrix(np.full((3, 4), 2), np.ones((3, 4)), np.ones((3, 4)),
                         ("a", "b", "c"), ErrorTypeIndex(tuple("wxyz")))
    assert solve_exhaustive(counts).selection.choices == (0, 0, 0, 0)
    assert solve_dinkelbach(counts).selection.choices == (0, 0, 0, 0)


def test_degenerate_counts():
    zero = CountMatrix(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((2, 3)),
                       ("a", "b"), ErrorTypeIndex(("x", "y", "z")))
    for solver in (solve_exhaustive, solve_dinkelbach):
        result = solver(zero)
        assert result.degenerate and result.objective == 0.0
        assert result.selection.choices == (0, 0, 0)


def test_no_true_positives_anywhere():
    counts = CountMatrix(np.zeros((2, 2)), [[1, 2], [0, 3]], [[4, 0], [1, 1]],
                         ("a", "b"), ErrorTypeIndex(("x", "y")))
    ex, dk = solve_exhaustive(counts), solve_dinkelbach(counts)
    assert ex.objective == dk.objective == 0.0
    assert ex.selection.choices == dk.selection.choices == (0, 0)
    assert not dk.degenerate


def test_capacity_error_and_fallback(rng):
    counts = random_counts(rng, 3, 16)
    config = SolverConfig(backend="exhaustive", enumeration_cap=1000)
    with pytest.raises(CapacityError, match="dinkelbach"):
        solve_exhaustive(counts, config)
    result = solve(counts, config)
    assert result.backend_used == "dinkelbach"


def test_dispatch(rng):
    counts = random_counts(rng, 2, 3)
    assert solve(counts, SolverConfig(backend="exhaustive")).backend_used == "exhaustive"
    assert solve(counts, SolverConfig(backend="dinkelbach")).backend_used == "dinkelbach"


def test_nonconvergence_reports_lambda(rng):
    for _ in range(50):
        counts = random_counts(rng, 4, 8)
        if solve_dinkelbach(counts).iterations > 1:
            break
    with pytest.raises(NonConvergenceError) as info:
        solve_dinkelbach(counts, SolverConfig(max_iterations=1))
    assert 0 <= info.value.last_lambda <= 1


def test_config_validation():
    for bad in ({"alpha": -1}, {"dinkelbach_tolerance": -1e-3}, {"max_iterations": 0},
                {"backend": "lingo"}, {"argmax_tie_break": "random"}):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_realistic_size_is_fast(rng):
    counts = random_counts(rng, 3, 55, high=200)
    start = time.perf_counter()
    result = solve(counts)
    assert time.perf_counter() - start < 1.0
    assert all(result.objective >= f for f in single_system_objectives(counts))


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5, 1.0, 2.0])
def test_other_alphas(rng, alpha):
    config = SolverConfig(alpha=alpha)
    for _ in range(20):
        counts = random_counts(rng, 3, 4)
        best, _ = enumerate_optimum(counts, alpha)
        dk = solve_dinkelbach(counts, config)
        assert exact_f(*dk.totals, alpha) == best
        assert solve_exhaustive(counts, config).objective == pytest.approx(dk.objective, abs=1e-12)


def test_abstain_option():
    # every system is harmful on type y
    counts = CountMatrix([[3, 0], [2, 0]], [[0, 5], [1, 4]], [[1, 2], [2, 2]],
                         ("a", "b"), ErrorTypeIndex(("x", "y")))
    plain = solve(counts)
    relaxed = solve(counts, SolverConfig(allow_abstain=True))
    assert relaxed.selection.system_ids == ("a", "b", ABSTAIN)
    assert relaxed.selection.assignment() == {"x": "a", "y": ABSTAIN}
    assert relaxed.objective > plain.objective
    augmented = with_abstain(counts)
    assert augmented.fn[2].tolist() == [4, 2]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 5), st.integers(2, 7), st.integers(0, 2 ** 32 - 1))
def test_scale_invariance(m, n, factor, seed):
    counts = random_counts(np.random.default_rng(seed), m, n)
    scaled = CountMatrix(counts.tp * factor, counts.fp * factor, counts.fn * factor,
                         counts.system_ids, counts.type_index)
    a, b = solve_dinkelbach(counts), solve_dinkelbach(scaled)
    assert a.selection == b.selection
    assert a.objective == pytest.approx(b.objective, abs=1e-12)
