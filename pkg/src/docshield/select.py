"""Chi-squared feature scoring and top-k column selection.

The statistic treats the summed feature mass per class as the observed
contingency counts, the standard construction when features are
nonnegative reals (TF-IDF weights) rather than 0/1 indicators. For each
column, expected mass per class is the column total apportioned by class
frequency; the score sums (observed - expected)^2 / expected over
classes. Columns that never fire score zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .sparse import CsrMatrix

__all__ = ["Chi2Selector", "chi2_scores", "select_k_best", "apply_selection", "fit_selector"]


@dataclass(frozen=True)
class Chi2Selector:
    """Result of scoring all columns and keeping the best k."""

    scores: np.ndarray
    selected: tuple
    k_requested: int

    @property
    def k_eff(self) -> int:
        return len(self.selected)


def chi2_scores(X: CsrMatrix, y: Sequence) -> np.ndarray:
    if len(y) != X.n_rows:
        raise InputError(f"got {len(y)} labels for {X.n_rows} matrix rows")
    if (np.asarray(X.values) < 0).any():
        raise InputError("chi-squared scoring requires nonnegative feature values")
    classes = sorted(set(y))
    if len(classes) < 2:
        detail = f"only {classes[0]!r}" if classes else "an empty label list"
        raise InputError(f"chi-squared scoring needs at least two classes, got {detail}")
    class_index = {c: k for k, c in enumerate(classes)}
    n = X.n_rows
    n_classes = len(classes)

    # observed[c, j] = sum of column j over rows of class c
    observed = np.zeros((n_classes, X.n_cols), dtype=np.float64)
    class_sizes = np.zeros(n_classes, dtype=np.float64)
    for i in range(n):
        k = class_index[y[i]]
        class_sizes[k] += 1
        cols, vals = X.row(i)
        observed[k, cols] += vals

    totals = observed.sum(axis=0)
    expected = np.outer(class_sizes / n, totals)
    scores = np.zeros(X.n_cols, dtype=np.float64)
    fired = totals > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        contrib = (observed - expected) ** 2 / expected
    scores[fired] = contrib[:, fired].sum(axis=0)
    return scores


def select_k_best(scores: np.ndarray, k: int) -> tuple:
    """Indices of the k highest scores, sorted ascending.

    Ties go to the lower column index; k past the column count keeps
    everything.
    """
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    v = scores.shape[0]
    k_eff = min(k, v)
    # stable sort on negated scores: equal scores keep index order
    order = np.argsort(-scores, kind="stable")
    return tuple(sorted(int(j) for j in order[:k_eff]))


def fit_selector(X: CsrMatrix, y: Sequence, k: int) -> Chi2Selector:
    scores = chi2_scores(X, y)
    return Chi2Selector(scores=scores, selected=select_k_best(scores, k), k_requested=k)


def apply_selection(X: CsrMatrix, selector: Chi2Selector) -> CsrMatrix:
    """Project the matrix onto the selected columns, reindexed to 0..k_eff-1."""
    if X.n_cols != selector.scores.shape[0]:
        raise InputError(
            f"matrix has {X.n_cols} columns but the selector was fitted "
            f"for {selector.scores.shape[0]}"
        )
    remap = {old: new for new, old in enumerate(selector.selected)}
    rows = []
    for i in range(X.n_rows):
        cols, vals = X.row(i)
        entries = [
            (remap[int(c)], float(v))
            for c, v in zip(cols, vals)
            if int(c) in remap
        ]
        rows.append(entries)
    return CsrMatrix.from_rows(n_cols=selector.k_eff, rows=rows, dtype=np.float64)
