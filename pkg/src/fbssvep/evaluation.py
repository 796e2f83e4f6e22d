"""Accuracy, macro F1 and paired Wilcoxon signed-rank comparison."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

REPORT_FORMAT = "fbssvep-report/1"


class DegenerateDataError(ValueError):
    """All paired differences are zero; the test statistic is undefined."""


def accuracy(preds, labels) -> float:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape or preds.size == 0:
        raise ValueError("predictions and labels must be equal-length and nonempty")
    return float((preds == labels).mean())


def macro_f1(preds, labels, n_classes: int) -> float:
    """Unweighted mean of per-class F1; absent classes contribute 0."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape or preds.size == 0:
        raise ValueError("predictions and labels must be equal-length and nonempty")
    scores = []
    for c in range(n_classes):
        tp = np.sum((preds == c) & (labels == c))
        fp = np.sum((preds == c) & (labels != c))
        fn = np.sum((preds != c) & (labels == c))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def _rank_abs(values: np.ndarray) -> np.ndarray:
    """Ranks of |values| with average ranks on ties."""
    v = np.abs(values)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_p(ranks: np.ndarray, w_low: float) -> float:
    """Two-sided p from the exact null of W+ over all sign assignments.

    Requires integer (tie-free) ranks. Counts stay exact in float64 up to
    n = 25 (2**25 << 2**53).
    """
    n = len(ranks)
    total = n * (n + 1) // 2
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in sorted(int(r) for r in ranks):
        counts[r:] += counts[:-r].copy()  # copy: the slices overlap
    low = counts[: int(w_low) + 1].sum()
    return min(1.0, 2.0 * low / 2.0 ** n)


def wilcoxon_signed_rank(a, b, method: str = "auto") -> tuple[float, float]:
    """Paired two-sided Wilcoxon signed-rank test; returns (W, p).

    Zero differences are dropped; ranks of |d| use average ranks on ties;
    W = min(W+, W-). The exact null distribution is used for n <= 25
    without ties, otherwise a normal approximation with tie and continuity
    corrections.
    """
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        raise DegenerateDataError("all paired differences are zero")
    if n < 5:
        raise ValueError(f"need >= 5 nonzero differences, got {n}")
    ranks = _rank_abs(d)
    w_plus = ranks[d > 0].sum()
    w_minus = ranks[d < 0].sum()
    w = min(w_plus, w_minus)
    has_ties = len(np.unique(np.abs(d))) != n

    if method == "auto":
        method = "exact" if (n <= 25 and not has_ties) else "approx"
    if method == "exact":
        if has_ties:
            raise ValueError("exact method is undefined with tied |differences|")
        return w, _exact_p(ranks, w)
    if method != "approx":
        raise ValueError(f"method must be auto, exact or approx, got {method!r}")

    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var -= (tie_counts ** 3 - tie_counts).sum() / 48.0
    z = (w - mean + 0.5) / math.sqrt(var)  # w <= mean; shift 0.5 toward it
    p = min(1.0, math.erfc(-z / math.sqrt(2.0)))
    return w, p


def compare_methods(results: dict[str, np.ndarray], method: str = "auto"):
    """Pairwise two-sided Wilcoxon p-values between methods.

    Every method must supply accuracies for the same ordered subject list.
    Returns (names, matrix) with None on the diagonal and NaN where a pair
    is degenerate (identical accuracies everywhere).
    """
    names = list(results)
    lengths = {len(v) for v in results.values()}
    if len(lengths) != 1:
        raise ValueError("methods must cover the same subjects")
    matrix = [[None] * len(names) for _ in names]
    for i, mi in enumerate(names):
        for j, mj in enumerate(names):
            if i == j:
                continue
            try:
                _, p = wilcoxon_signed_rank(results[mi], results[mj], method=method)
            except DegenerateDataError:
                p = float("nan")
            matrix[i][j] = p
    return names, matrix


@dataclass
class EvalReport:
    """Per-subject test metrics for one method."""

    method: str
    subjects: list[str]
    accuracy_pct: list[float]
    f1: list[float]

    def to_dict(self) -> dict:
        return dict(
            format=REPORT_FORMAT,
            method=self.method,
            subjects=self.subjects,
            accuracy_pct=self.accuracy_pct,
            macro_f1=self.f1,
            mean_accuracy=float(np.mean(self.accuracy_pct)),
            accuracy_std=float(np.std(self.accuracy_pct)),
            mean_f1=float(np.mean(self.f1)),
            f1_std=float(np.std(self.f1)),
        )

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        if d.get("format") != REPORT_FORMAT:
            raise ValueError(f"unknown report format {d.get('format')!r}")
        return cls(d["method"], d["subjects"], d["accuracy_pct"], d["macro_f1"])


def render_summary_table(reports: list[EvalReport]) -> str:
    """Plain-text table: one row per subject plus mean/std and F1 rows."""
    subjects = reports[0].subjects
    header = ["Subjects"] + [r.method for r in reports]
    rows = [header]
    for k, sid in enumerate(subjects):
        rows.append([sid] + [f"{r.accuracy_pct[k]:.1f}" for r in reports])
    rows.append(["Mean Accuracy"] + [f"{np.mean(r.accuracy_pct):.1f}" for r in reports])
    rows.append(["Accuracy Std"] + [f"{np.std(r.accuracy_pct):.1f}" for r in reports])
    rows.append(["Mean F1-Score"] + [f"{np.mean(r.f1):.3f}" for r in reports])
    rows.append(["F1-Score Std"] + [f"{np.std(r.f1):.3f}" for r in reports])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in rows)


def render_p_matrix(names: list[str], matrix) -> str:
    width = max(len(n) for n in names) + 2
    lines = [" " * width + "".join(n.ljust(12) for n in names)]
    for i, name in enumerate(names):
        cells = []
        for j in range(len(names)):
            v = matrix[i][j]
            if v is None:
                cells.append("-".ljust(12))
            elif isinstance(v, float) and math.isnan(v):
                cells.append("degenerate".ljust(12))
            else:
                cells.append(f"{v:.2e}".ljust(12))
        lines.append(name.ljust(width) + "".join(cells))
    return "\n".join(lines)
