"""Exact maximization of corpus F-alpha over per-type system selections.

Each error type is assigned exactly one system.  Given the count matrix,
the F-alpha of a selection is a ratio of two linear functions of the 0/1
selection variables, so the problem is a linear-fractional 0-1 program.
Two exact solvers are provided:

* :func:`solve_exhaustive` enumerates all ``M ** N`` assignments.  It is
  the reference oracle for small instances.
* :func:`solve_dinkelbach` runs Dinkelbach's parametric method.  For a
  fixed ratio ``lam`` the subproblem ``max A(x) - lam * B(x)`` separates
  over error types, so each iteration is one argmax per column.

Both work in exact rational arithmetic: ``alpha`` is converted to the
fraction ``p / q`` it represents, and ``q**2`` is multiplied through so
every comparison is between Python integers.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .counting import CountMatrix, ErrorTypeIndex, counts_for_selection
from .metrics import f_beta_from_counts
from .errors import CapacityError, ConstraintViolationError, NonConvergenceError

log = logging.getLogger(__name__)

ABSTAIN = "<abstain>"
BACKENDS = ("exhaustive", "dinkelbach")


def check_feasible(x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2:
        raise ConstraintViolationError(f"selection must be 2-D, got shape {x.shape}")
    if not np.isin(x, (0, 1)).all():
        raise ConstraintViolationError("selection entries must be 0 or 1")
    sums = x.sum(axis=0)
    bad = np.flatnonzero(sums != 1)
    if bad.size:
        raise ConstraintViolationError(
            f"error type column {int(bad[0])} selects {int(sums[bad[0]])} systems, expected 1")
    return x


@dataclass(frozen=True, eq=False)
class SelectionMatrix:
    """Binary ``x[i, j]`` with exactly one selected system per error type."""

    x: np.ndarray
    system_ids: tuple[str, ...]
    type_index: ErrorTypeIndex

    def __post_init__(self):
        x = np.array(self.x, dtype=np.int8)
        if x.shape != (len(self.system_ids), len(self.type_index)):
            raise ConstraintViolationError(
                f"selection shape {x.shape} does not match "
                f"{len(self.system_ids)} systems x {len(self.type_index)} types")
        check_feasible(x)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "system_ids", tuple(self.system_ids))

    @classmethod
    def from_choices(cls, choices: Sequence[int], system_ids, type_index) -> "SelectionMatrix":
        x = np.zeros((len(system_ids), len(type_index)), dtype=np.int8)
        x[np.asarray(choices, dtype=np.intp), np.arange(len(type_index))] = 1
        return cls(x, tuple(system_ids), type_index)

    @classmethod
    def single_system(cls, i: int, system_ids, type_index) -> "SelectionMatrix":
        return cls.from_choices([i] * len(type_index), system_ids, type_index)

    @classmethod
    def from_assignment(cls, assignment: Mapping[str, str], system_ids) -> "SelectionMatrix":
        system_ids = tuple(system_ids)
        rows = {s: i for i, s in enumerate(system_ids)}
        index = ErrorTypeIndex(tuple(assignment))
        try:
            choices = [rows[assignment[t]] for t in index.types]
        except KeyError as exc:
            raise ConstraintViolationError(f"assignment names unknown system {exc}") from None
        return cls.from_choices(choices, system_ids, index)

    @property
    def types(self) -> tuple[str, ...]:
        return self.type_index.types

    @property
    def choices(self) -> tuple[int, ...]:
        """Selected system row for each error-type column."""
        return tuple(int(i) for i in self.x.argmax(axis=0))

    def assignment(self) -> dict[str, str]:
        return {t: self.system_ids[i] for t, i in zip(self.types, self.choices)}

    def selects(self, system: int, error_type: str) -> bool:
        j = self.type_index.get(error_type)
        return j is not None and bool(self.x[system, j])

    def __eq__(self, other):
        if not isinstance(other, SelectionMatrix):
            return NotImplemented
        return (self.system_ids == other.system_ids and self.types == other.types
                and np.array_equal(self.x, other.x))

    def to_dict(self) -> dict:
        return {"system_ids": list(self.system_ids), "types": list(self.types),
                "assignment": self.assignment()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "SelectionMatrix":
        assignment = data["assignment"]
        if sorted(assignment) != sorted(data.get("types", assignment)):
            raise ConstraintViolationError("assignment does not cover every listed type")
        return cls.from_assignment(assignment, data["system_ids"])

    @classmethod
    def from_json(cls, text: str) -> "SelectionMatrix":
        return cls.from_dict(json.loads(text))

    def to_tsv(self, counts: CountMatrix | None = None) -> str:
        lines = ["type\tchosen_system\ttp\tfp\tfn"]
        for j, (t, i) in enumerate(zip(self.types, self.choices)):
            if counts is None:
                lines.append(f"{t}\t{self.system_ids[i]}\t\t\t")
            else:
                lines.append(f"{t}\t{self.system_ids[i]}\t{counts.tp[i, j]}"
                             f"\t{counts.fp[i, j]}\t{counts.fn[i, j]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.5
    backend: str = "dinkelbach"
    dinkelbach_tolerance: float = 0.0
    max_iterations: int = 100
    enumeration_cap: int = 10 ** 7
    argmax_tie_break: str = "lowest_system_index"
    # Adds a virtual system that proposes nothing; off by default because
    # it relaxes the one-real-system-per-type constraint.
    allow_abstain: bool = False

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be >= 0")
        if not self.dinkelbach_tolerance >= 0:
            raise ValueError("dinkelbach_tolerance must be >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {BACKENDS}")
        if self.argmax_tie_break != "lowest_system_index":
            raise ValueError("only lowest_system_index tie-breaking is supported")


@dataclass(frozen=True)
class SolveResult:
    selection: SelectionMatrix
    objective: float
    iterations: int
    backend_used: str
    totals: tuple[int, int, int]
    degenerate: bool = False
    lambdas: tuple[float, ...] = field(default=())

    def summary(self) -> dict:
        tp, fp, fn = self.totals
        return {"objective": self.objective, "iterations": self.iterations,
                "backend": self.backend_used, "degenerate": self.degenerate,
                "tp": tp, "fp": fp, "fn": fn, "lambdas": list(self.lambdas),
                "assignment": self.selection.assignment()}


def _objective_from_totals(tp: int, fp: int, fn: int, alpha: float) -> float:
    # unlike the per-sentence scorer, an empty selection is worth nothing here
    return f_beta_from_counts(tp, fp, fn, alpha) if tp else 0.0


def f_alpha_objective(counts: CountMatrix, x, alpha: float = 0.5) -> float:
    """Corpus F-alpha of selection ``x``; 0.0 when it selects no true positives."""
    check_feasible(getattr(x, "x", x))
    return _objective_from_totals(*counts_for_selection(counts, x), alpha)


def with_abstain(counts: CountMatrix) -> CountMatrix:
    """Append a virtual system row that makes no edits.

    Abstaining on a type leaves all its reference edits uncorrected; the
    row's FN uses the largest reference total seen across systems.
    """
    ref_totals = (counts.tp + counts.fn).max(axis=0)
    zeros = np.zeros_like(ref_totals)
    return CountMatrix(np.vstack([counts.tp, zeros]), np.vstack([counts.fp, zeros]),
                       np.vstack([counts.fn, ref_totals]),
                       counts.system_ids + (ABSTAIN,), counts.type_index)


def _scaled_terms(counts: CountMatrix, alpha: float):
    """Integer arrays ``A`` and ``B`` with F(x) = sum(A * x) / sum(B * x)."""
    p, q = Fraction(alpha).as_integer_ratio()
    w, qq, pp = q * q + p * p, q * q, p * p
    tp = counts.tp.astype(object)
    a = tp * w
    b = a + counts.fp.astype(object) * qq + counts.fn.astype(object) * pp
    return a, b, qq


def _ratio(a: int, b: int) -> Fraction:
    return Fraction(a, b) if b else Fraction(0)


def _result(counts, choices, config, backend, iterations, lambdas=(), degenerate=False):
    selection = SelectionMatrix.from_choices(choices, counts.system_ids, counts.type_index)
    check_feasible(selection.x)
    totals = counts_for_selection(counts, selection)
    return SolveResult(selection, _objective_from_totals(*totals, config.alpha), iterations,
                       backend, totals, degenerate, tuple(lambdas))


def _is_degenerate(counts: CountMatrix) -> bool:
    return not (counts.tp.any() or counts.fp.any() or counts.fn.any())


def solve_exhaustive(counts: CountMatrix, config: SolverConfig = SolverConfig(),
                     chunk_size: int = 1 << 16) -> SolveResult:
    """Enumerate every assignment of systems to error types.

    Ties go to the lexicographically smallest vector of chosen system
    indices (first error type most significant).
    """
    m, n = counts.shape
    total = m ** n
    if total > config.enumeration_cap:
        raise CapacityError(
            f"{m} systems ** {n} types = {total} assignments exceeds the enumeration cap "
            f"of {config.enumeration_cap}; use the dinkelbach backend")
    if _is_degenerate(counts) or n == 0:
        return _result(counts, [0] * n, config, "exhaustive", 1, degenerate=True)

    a2 = config.alpha ** 2
    w = 1 + a2
    place = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    cols = np.arange(n)
    best = -1.0
    slack = 1e-9
    # (tp, fp, fn) totals -> smallest enumeration index reaching them
    near_best: dict[tuple[int, int, int], int] = {}
    for lo in range(0, total, chunk_size):
        k = np.arange(lo, min(lo + chunk_size, total), dtype=np.int64)
        digits = (k[:, None] // place) % m
        tp = counts.tp[digits, cols].sum(axis=1)
        fp = counts.fp[digits, cols].sum(axis=1)
        fn = counts.fn[digits, cols].sum(axis=1)
        num = w * tp
        denom = num + fp + a2 * fn
        f = np.divide(num, denom, out=np.zeros(len(k)), where=num > 0)
        chunk_best = f.max()
        if chunk_best > best:
            best = chunk_best
            near_best = {t: i for t, i in near_best.items()
                         if _objective_from_totals(*t, config.alpha) >= best - slack}
        keep = np.flatnonzero(f >= best - slack)
        triples = np.stack([tp[keep], fp[keep], fn[keep]], axis=1)
        uniq, first = np.unique(triples, axis=0, return_index=True)
        for t, i in zip(map(tuple, uniq.tolist()), first):
            near_best.setdefault(t, int(k[keep[i]]))

    p, q = Fraction(config.alpha).as_integer_ratio()
    w_int = q * q + p * p
    exact = {t: _ratio(w_int * t[0], w_int * t[0] + q * q * t[1] + p * p * t[2])
             for t in near_best}
    top = max(exact.values())
    k_best = min(near_best[t] for t, v in exact.items() if v == top)
    choices = [(k_best // m ** (n - 1 - j)) % m for j in range(n)]
    return _result(counts, choices, config, "exhaustive", total)


def solve_dinkelbach(counts: CountMatrix, config: SolverConfig = SolverConfig()) -> SolveResult:
    """Dinkelbach iteration, started from the best single-system selection."""
    m, n = counts.shape
    if _is_degenerate(counts) or n == 0:
        log.warning("all counts are zero; returning the trivial selection")
        return _result(counts, [0] * n, config, "dinkelbach", 0, degenerate=True)

    a, b, qq = _scaled_terms(counts, config.alpha)
    rows_a, rows_b = a.sum(axis=1), b.sum(axis=1)
    start = max(range(m), key=lambda i: (_ratio(rows_a[i], rows_b[i]), -i))
    choices = np.full(n, start)
    lam = _ratio(rows_a[start], rows_b[start])
    lambdas = [float(lam)]
    tol = Fraction(config.dinkelbach_tolerance)
    cols = np.arange(n)

    for iteration in range(1, config.max_iterations + 1):
        values = a * lam.denominator - b * lam.numerator
        new = np.array([max(range(m), key=lambda i: (values[i, j], -i)) for j in range(n)])
        inner = Fraction(int(values[new, cols].sum()), lam.denominator * qq)
        new_lam = _ratio(int(a[new, cols].sum()), int(b[new, cols].sum()))
        if inner <= tol:
            if new_lam == lam:
                choices = new
            return _result(counts, choices, config, "dinkelbach", iteration, lambdas)
        choices, lam = new, new_lam
        lambdas.append(float(lam))
    raise NonConvergenceError(
        f"Dinkelbach did not converge in {config.max_iterations} iterations "
        f"(last ratio {float(lam):.12g})", float(lam))


def solve(counts: CountMatrix, config: SolverConfig = SolverConfig()) -> SolveResult:
    """Solve with the configured backend.

    The exhaustive backend falls back to Dinkelbach when the instance is
    above the enumeration cap.
    """
    if config.allow_abstain:
        counts = with_abstain(counts)
    if config.backend == "exhaustive":
        m, n = counts.shape
        if m ** n <= config.enumeration_cap:
            return solve_exhaustive(counts, config)
        log.info("%d ** %d assignments exceed the cap; falling back to dinkelbach", m, n)
    return solve_dinkelbach(counts, config)
