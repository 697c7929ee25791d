"""Command-line entry point: ``gec-combine {optimize,apply,score,analyze,pipeline}``.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 solver error.
Set ``GEC_COMBINE_LOG`` (e.g. ``INFO`` or ``DEBUG``) for more logging.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .combiner import Combination, ConflictPolicy, combine_corpus
from .counting import build_count_matrix
from .errors import GecCombineError, SolverError
from .evaluation import evaluate, split_half_analysis
from .m2 import read_m2, serialize_m2
from .solver import SelectionMatrix, SolverConfig, solve, with_abstain

log = logging.getLogger("gec_combine")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3
CONFLICT_FLAGS = {"random": "random", "lowest": "lowest_system_index", "skip": "skip_all"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _system_labels(paths) -> list[str]:
    stems = [Path(p).stem for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    return [str(p) for p in paths]


def _load_systems(paths):
    if not paths:
        raise UsageError("--systems needs at least one file")
    return [read_m2(p, label) for p, label in zip(paths, _system_labels(paths))]


def _require(args, *names):
    for name in names:
        if getattr(args, name) in (None, []):
            raise UsageError(f"--{name.replace('_', '-')} is required for '{args.command}'")


def _solver_config(args) -> SolverConfig:
    return SolverConfig(alpha=args.alpha, backend=args.backend,
                        allow_abstain=args.allow_abstain)


def _policy(args) -> ConflictPolicy:
    return ConflictPolicy(CONFLICT_FLAGS[args.conflict], args.seed)


def _optimize(systems, reference, args, out_dir: Path):
    counts = build_count_matrix(systems, reference, args.alpha, args.annotator)
    result = solve(counts, _solver_config(args))
    selection = result.selection
    atomic_write(out_dir / "selection.json", selection.to_json())
    tsv_counts = counts
    if len(selection.system_ids) != len(counts.system_ids):
        tsv_counts = with_abstain(counts)
    atomic_write(out_dir / "selection.tsv", selection.to_tsv(tsv_counts))
    atomic_write(out_dir / "counts.json", counts.to_json())
    atomic_write(out_dir / "counts.tsv", counts.to_tsv())
    summary = {"alpha": args.alpha, "systems": list(counts.system_ids),
               "n_types": len(counts.types), "n_sentences": len(reference), **result.summary()}
    atomic_write(out_dir / "solve.json", _dump(summary))
    print(f"training F{args.alpha:g} = {result.objective:.4f} "
          f"(TP={result.totals[0]} FP={result.totals[1]} FN={result.totals[2]}, "
          f"{result.backend_used}, {result.iterations} iterations)")
    for t, s in selection.assignment().items():
        print(f"  {t}\t{s}")
    return selection, result


def _write_combination(comb: Combination, out_dir: Path, manifest: dict) -> None:
    atomic_write(out_dir / "combined.m2", serialize_m2(comb.corpus))
    atomic_write(out_dir / "combined.txt", comb.text())
    atomic_write(out_dir / "manifest.json", _dump(manifest))


def _manifest(args, paths, systems, selection_hash, comb: Combination) -> dict:
    policy = _policy(args)
    return {"selection_sha256": selection_hash, "systems": [s.system_id for s in systems],
            "system_files": [str(p) for p in paths],
            "policy": policy.mode, "seed": policy.seed, "n_sentences": len(comb.corpus),
            "candidate_edits": comb.candidates, "conflicts_resolved": comb.conflicts,
            "unknown_types": args.unknown_types}


def cmd_optimize(args) -> int:
    _require(args, "systems", "ref")
    systems, reference = _load_systems(args.systems), read_m2(args.ref)
    _optimize(systems, reference, args, Path(args.out_dir))
    return EXIT_OK


def cmd_apply(args) -> int:
    _require(args, "systems", "selection")
    raw = Path(args.selection).read_bytes()
    selection = SelectionMatrix.from_json(raw.decode("utf-8"))
    systems = _load_systems(args.systems)
    comb = combine_corpus(systems, selection, _policy(args), args.unknown_types)
    manifest = _manifest(args, args.systems, systems, hashlib.sha256(raw).hexdigest(), comb)
    _write_combination(comb, Path(args.out_dir), manifest)
    print(f"combined {len(comb.corpus)} sentences, {comb.candidates} candidate edits, "
          f"{comb.conflicts} conflicts resolved ({manifest['policy']}, seed {manifest['seed']})")
    return EXIT_OK


def cmd_score(args) -> int:
    _require(args, "systems", "ref")
    reference = read_m2(args.ref)
    reports = {}
    for hyp in _load_systems(args.systems):
        report = evaluate(hyp, reference, args.alpha, args.annotator)
        reports[hyp.system_id] = report.to_dict()
        print(f"== {hyp.system_id}")
        print(report.format_table(per_type=args.per_type))
    if args.out_dir:
        atomic_write(Path(args.out_dir) / "score.json", _dump(reports))
    return EXIT_OK


def cmd_analyze(args) -> int:
    _require(args, "systems", "ref")
    if len(args.systems) != 2:
        raise UsageError("analyze compares exactly two systems")
    systems, reference = _load_systems(args.systems), read_m2(args.ref)
    n = len(reference)
    if n < 2:
        raise UsageError("corpus too small to split (need at least 2 sentences)")
    half = n // 2
    out_dir = Path(args.out_dir)
    train = [s[:half] for s in systems]
    test = [s[half:] for s in systems]
    selection, _ = _optimize(train, reference[:half], args, out_dir)
    comb = combine_corpus(test, selection, _policy(args), args.unknown_types)
    sel_hash = hashlib.sha256(selection.to_json().encode("utf-8")).hexdigest()
    _write_combination(comb, out_dir, _manifest(args, args.systems, systems, sel_hash, comb))
    report = split_half_analysis(test[0], test[1], reference[half:], comb.corpus,
                                 args.alpha, args.annotator)
    scores = {h.system_id: evaluate(h, reference[half:], args.alpha, args.annotator).to_dict()
              for h in (*test, comb.corpus)}
    atomic_write(out_dir / "analysis.json",
                 _dump({"split": args.split, "train_sentences": half,
                        "test_sentences": n - half, "analysis": report.to_dict(),
                        "test_scores": {k: {m: v[m] for m in ("tp", "fp", "fn", "precision",
                                                              "recall", "f_alpha")}
                                        for k, v in scores.items()}}))
    print(report.format_text(), end="")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    _require(args, "systems", "ref")
    systems, reference = _load_systems(args.systems), read_m2(args.ref)
    out_dir = Path(args.out_dir)
    selection, _ = _optimize(systems, reference, args, out_dir)
    test_paths = args.test_systems or args.systems
    test_ref = read_m2(args.test_ref) if args.test_ref else reference
    test = [read_m2(p, label) for p, label in zip(test_paths, _system_labels(test_paths))]
    comb = combine_corpus(test, selection, _policy(args), args.unknown_types)
    sel_hash = hashlib.sha256(selection.to_json().encode("utf-8")).hexdigest()
    _write_combination(comb, out_dir, _manifest(args, test_paths, test, sel_hash, comb))
    report = evaluate(comb.corpus, test_ref, args.alpha, args.annotator)
    atomic_write(out_dir / "score.json", report.to_json())
    print(report.format_table(), end="")
    return EXIT_OK


COMMANDS = {"optimize": cmd_optimize, "apply": cmd_apply, "score": cmd_score,
            "analyze": cmd_analyze, "pipeline": cmd_pipeline}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gec-combine",
                     description="Combine GEC system outputs by choosing one system per error type.")
    common = _Parser(add_help=False)
    common.add_argument("--systems", nargs="+", metavar="M2", help="component system M2 files")
    common.add_argument("--ref", metavar="M2", help="reference M2 file")
    common.add_argument("--selection", metavar="JSON", help="selection matrix from 'optimize'")
    common.add_argument("--alpha", type=float, default=0.5, help="F-score weight (default 0.5)")
    common.add_argument("--backend", choices=("exhaustive", "dinkelbach"), default="dinkelbach")
    common.add_argument("--conflict", choices=tuple(CONFLICT_FLAGS), default="random",
                        help="how to settle edits from different systems at one location")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=".", metavar="DIR")
    common.add_argument("--annotator", type=int, default=None,
                        help="score against this annotator only (default: best per sentence)")
    common.add_argument("--unknown-types", choices=("drop", "error"), default="drop")
    common.add_argument("--allow-abstain", action="store_true",
                        help="let the solver leave an error type uncorrected")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("optimize", parents=[common], help="learn a selection matrix")
    sub.add_parser("apply", parents=[common], help="combine systems with a selection matrix")
    score = sub.add_parser("score", parents=[common], help="score each system against --ref")
    score.add_argument("--per-type", action="store_true")
    score.set_defaults(out_dir=None)  # only write score.json when asked
    analyze = sub.add_parser("analyze", parents=[common],
                             help="optimize on the first half, compare per sentence on the second")
    analyze.add_argument("--split", choices=("first-half-train",), default="first-half-train")
    pipe = sub.add_parser("pipeline", parents=[common], help="optimize, apply and score")
    pipe.add_argument("--test-systems", nargs="+", metavar="M2")
    pipe.add_argument("--test-ref", metavar="M2")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("GEC_COMBINE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.alpha >= 0:
        parser.error("--alpha must be non-negative")
    if not 0 <= args.seed < 2 ** 64:
        parser.error("--seed must fit in an unsigned 64-bit integer")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gec-combine: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"gec-combine: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (GecCombineError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"gec-combine: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
