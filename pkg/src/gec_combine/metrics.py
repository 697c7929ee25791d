"""Precision, recall and F-alpha from edit counts.

Empty sets follow the usual edit-scorer convention: precision is 1.0 when
nothing was proposed and recall is 1.0 when nothing needed correcting, so
a sentence with no reference edits and no hypothesis edits scores F = 1.
"""
from __future__ import annotations

from fractions import Fraction


def precision(tp: int, fp: int) -> float:
    return tp / (tp + fp) if tp + fp else 1.0


def recall(tp: int, fn: int) -> float:
    return tp / (tp + fn) if tp + fn else 1.0


def f_beta_from_pr(p: float, r: float, alpha: float = 0.5) -> float:
    a2 = alpha * alpha
    denom = a2 * p + r
    if denom == 0:
        return 0.0
    return (1 + a2) * p * r / denom


def f_beta_from_counts(tp: int, fp: int, fn: int, alpha: float = 0.5) -> float:
    """F-alpha computed directly from counts.

    Agrees with ``f_beta_from_pr(precision(tp, fp), recall(tp, fn), alpha)``
    but avoids the extra rounding of going through P and R.
    """
    if tp == fp == fn == 0:
        return 1.0
    a2 = alpha * alpha
    num = (1 + a2) * tp
    if num == 0:
        return 0.0
    return num / (num + fp + a2 * fn)


def f_beta_exact(tp: int, fp: int, fn: int, alpha: float = 0.5) -> Fraction:
    """Same as :func:`f_beta_from_counts`, as an exact rational."""
    if tp == fp == fn == 0:
        return Fraction(1)
    a2 = Fraction(alpha) ** 2
    num = (1 + a2) * tp
    if num == 0:
        return Fraction(0)
    return num / (num + fp + a2 * fn)
