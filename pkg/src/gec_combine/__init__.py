"""Combine grammatical error correction systems by choosing one system per error type.

The selection is learned by maximizing corpus F-alpha exactly over all
one-system-per-type assignments, then applied at inference time to merge
the systems' edits.
"""
from .combiner import CandidateEdit, ConflictPolicy, combine_corpus, resolve_conflicts, select_candidates
from .counting import CountMatrix, ErrorTypeIndex, build_count_matrix, counts_for_selection, match_edits
from .errors import (AlignmentError, CapacityError, ConstraintViolationError, GecCombineError,
                     M2ParseError, NonConvergenceError, OverlapError, SolverError, UnknownTypeError)
from .evaluation import AnalysisReport, EvalReport, evaluate, split_half_analysis
from .m2 import CorpusEdits, Edit, SentenceAnnotation, apply_edits, edits_conflict, parse_m2, read_m2, serialize_m2
from .metrics import f_beta_from_counts, f_beta_from_pr
from .solver import (SelectionMatrix, SolveResult, SolverConfig, f_alpha_objective, solve,
                     solve_dinkelbach, solve_exhaustive)

__version__ = "0.1.0"
