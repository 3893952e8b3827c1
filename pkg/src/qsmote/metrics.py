"""Confusion-matrix metrics, rank-based AUC, F1 improvement percentages,
and the exact Wilcoxon signed-rank test.

Convention: the minority class is the positive class everywhere. Metrics
with a zero denominator report 0.0; `zero_division_flags` lists which ones
did so that grids never abort.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError

EXACT_ENUMERATION_CAP = 20


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise InvalidInputError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionMatrix:
    """Count the four cells; inputs are {0,1} arrays with 1 = positive."""
    yt = np.asarray(y_true, dtype=int)
    yp = np.asarray(y_pred, dtype=int)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise InvalidInputError("y_true and y_pred must be 1-D and equal length")
    return ConfusionMatrix(
        tp=int(np.sum((yt == 1) & (yp == 1))),
        fp=int(np.sum((yt == 0) & (yp == 1))),
        tn=int(np.sum((yt == 0) & (yp == 0))),
        fn=int(np.sum((yt == 1) & (yp == 0))),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def precision(c: ConfusionMatrix) -> float:
    return _ratio(c.tp, c.tp + c.fp)


def recall(c: ConfusionMatrix) -> float:
    return _ratio(c.tp, c.tp + c.fn)


def accuracy(c: ConfusionMatrix) -> float:
    return _ratio(c.tp + c.tn, c.total)


def specificity(c: ConfusionMatrix) -> float:
    return _ratio(c.tn, c.tn + c.fp)


def f1(c: ConfusionMatrix) -> float:
    p, r = precision(c), recall(c)
    return _ratio(2.0 * p * r, p + r)


def f1_from_pr(p: float, r: float) -> float:
    """Harmonic mean of an already-computed precision/recall pair."""
    return _ratio(2.0 * p * r, p + r)


def g_mean(c: ConfusionMatrix) -> float:
    return math.sqrt(recall(c) * specificity(c))


def zero_division_flags(c: ConfusionMatrix) -> tuple[str, ...]:
    """Names of metrics whose denominator was zero (reported as 0.0)."""
    flags = []
    if c.tp + c.fp == 0:
        flags.append("precision")
    if c.tp + c.fn == 0:
        flags.append("recall")
    if c.tn + c.fp == 0:
        flags.append("specificity")
    if precision(c) + recall(c) == 0:
        flags.append("f1")
    if c.total == 0:
        flags.append("accuracy")
    return tuple(flags)


def auc_roc(y_true: Sequence[int], scores: Sequence[float]) -> float:
    """Probability that a random positive outscores a random negative.

    Rank (Mann-Whitney) formulation with average ranks, so ties count one
    half; equal to the trapezoidal area under the ROC curve.
    """
    yt = np.asarray(y_true, dtype=int)
    sc = np.asarray(scores, dtype=float)
    if yt.shape != sc.shape or yt.ndim != 1:
        raise InvalidInputError("labels and scores must be 1-D and equal length")
    n_pos = int(np.sum(yt == 1))
    n_neg = int(np.sum(yt == 0))
    if n_pos == 0 or n_neg == 0:
        raise InvalidInputError("both classes must be present for auc")
    ranks = average_ranks(sc)
    rank_sum_pos = float(ranks[yt == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def improvement_pct(f1_technique: float, f1_original: float) -> Optional[float]:
    """Percentage F1 gain over a baseline; None when the baseline is zero."""
    if f1_original == 0:
        return None
    return (f1_technique - f1_original) / f1_original * 100.0


def average_ranks(values: np.ndarray) -> np.ndarray:
    """Ascending 1-based ranks with ties sharing their average rank."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class WilcoxonResult:
    n_pairs: int  # pairs retained after dropping zero differences
    differences: np.ndarray  # all input differences a - b
    retained: np.ndarray  # indices of the nonzero differences
    ranks: np.ndarray  # average ranks of |d| over retained pairs
    signed_ranks: np.ndarray
    w_plus: float
    w_minus: float
    w: float
    p_exact: Optional[float]  # None above the enumeration cap
    z_approx: float
    p_approx: float
    effect_size_r: float
    n_zeros_dropped: int
    undefined: bool = False  # all differences were zero


def _undefined_result(diffs: np.ndarray) -> WilcoxonResult:
    empty = np.empty(0)
    return WilcoxonResult(
        n_pairs=0,
        differences=diffs,
        retained=np.empty(0, dtype=int),
        ranks=empty,
        signed_ranks=empty,
        w_plus=0.0,
        w_minus=0.0,
        w=0.0,
        p_exact=None,
        z_approx=float("nan"),
        p_approx=float("nan"),
        effect_size_r=float("nan"),
        n_zeros_dropped=int(diffs.size),
        undefined=True,
    )


def _exact_two_sided_p(ranks: np.ndarray, w_obs: float) -> float:
    """Enumerate every sign assignment over the observed rank multiset.

    Ranks are multiples of 0.5, so doubling makes the sums exact integers.
    The two-sided p is P(W+ <= w_obs) doubled and capped at 1.
    """
    scaled = np.rint(2.0 * ranks).astype(np.int64)
    sums = np.zeros(1, dtype=np.int64)
    for r in scaled:
        sums = np.concatenate([sums, sums + r])
    threshold = int(round(2.0 * w_obs))
    count = int(np.sum(sums <= threshold))
    return min(1.0, 2.0 * count / sums.size)


def wilcoxon_signed_rank(
    a: Sequence[float], b: Sequence[float], exact_cap: int = EXACT_ENUMERATION_CAP
) -> WilcoxonResult:
    """Two-sided paired signed-rank test with exact enumeration.

    Zero differences are dropped and counted. |d| values are ranked
    ascending with average ranks for ties. The exact p enumerates all 2^n
    sign assignments over the observed rank values when n <= exact_cap. The
    normal approximation uses the tie-corrected variance
    n(n+1)(2n+1)/24 - sum(t^3 - t)/48 and the effect size is |z|/sqrt(n).
    """
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.shape != bv.shape or av.ndim != 1 or av.size < 1:
        raise InvalidInputError("inputs must be 1-D, equal length, and non-empty")
    diffs = av - bv
    retained = np.flatnonzero(diffs != 0.0)
    if retained.size == 0:
        return _undefined_result(diffs)
    d = diffs[retained]
    n = d.size
    ranks = average_ranks(np.abs(d))
    signed = np.sign(d) * ranks
    w_plus = float(signed[signed > 0].sum())
    w_minus = float(abs(signed[signed < 0].sum()))
    w = min(w_plus, w_minus)

    p_exact = _exact_two_sided_p(ranks, w) if n <= exact_cap else None

    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    variance -= float(np.sum(tie_counts.astype(float) ** 3 - tie_counts)) / 48.0
    sigma = math.sqrt(variance) if variance > 0 else float("nan")
    z = (w_plus - mean) / sigma if variance > 0 else float("nan")
    p_approx = math.erfc(abs(z) / math.sqrt(2.0)) if variance > 0 else float("nan")
    r = abs(z) / math.sqrt(n) if variance > 0 else float("nan")

    return WilcoxonResult(
        n_pairs=n,
        differences=diffs,
        retained=retained,
        ranks=ranks,
        signed_ranks=signed,
        w_plus=w_plus,
        w_minus=w_minus,
        w=w,
        p_exact=p_exact,
        z_approx=z,
        p_approx=p_approx,
        effect_size_r=r,
        n_zeros_dropped=int(diffs.size - n),
        undefined=False,
    )


def format_wilcoxon_report(
    result: WilcoxonResult,
    name_a: str = "a",
    name_b: str = "b",
    a: Optional[Sequence[float]] = None,
    b: Optional[Sequence[float]] = None,
) -> str:
    """Three-table text report: paired differences, ranks, and the summary."""
    lines = [f"Paired differences ({name_a} - {name_b})"]
    lines.append(f"pair {name_a} {name_b} difference")
    for i, diff in enumerate(result.differences):
        cols = [str(i + 1)]
        cols.append(f"{a[i]:.6g}" if a is not None else "-")
        cols.append(f"{b[i]:.6g}" if b is not None else "-")
        cols.append(f"{diff:.6g}")
        lines.append(" ".join(cols))
    if result.undefined:
        lines.append("")
        lines.append("All paired differences are zero; the test is undefined.")
        lines.append(f"zeros dropped: {result.n_zeros_dropped}")
        return "\n".join(lines)

    lines.append("")
    lines.append("Ranks of |difference| (ascending, ties share the average rank)")
    lines.append("pair difference rank")
    order = np.argsort(np.abs(result.differences[result.retained]), kind="stable")
    for pos in order:
        pair = result.retained[pos] + 1
        lines.append(
            f"{pair} {result.differences[result.retained[pos]]:.6g} {result.ranks[pos]:.3f}"
        )

    lines.append("")
    lines.append("Summary")
    lines.append(f"n_pairs {result.n_pairs}")
    lines.append(f"zeros_dropped {result.n_zeros_dropped}")
    lines.append(f"w_plus {result.w_plus:g}")
    lines.append(f"w_minus {result.w_minus:g}")
    lines.append(f"w {result.w:g}")
    lines.append(f"z_tie_corrected {result.z_approx:.6f}")
    if result.p_exact is not None:
        lines.append(f"p_exact_two_sided {result.p_exact:.9f}")
    else:
        lines.append("p_exact_two_sided not-computed (n above enumeration cap)")
    lines.append(f"p_normal_two_sided {result.p_approx:.6g}")
    lines.append(f"effect_size_r {result.effect_size_r:.6f}")
    return "\n".join(lines)
