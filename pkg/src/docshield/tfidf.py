"""Term-frequency / inverse-document-frequency weighting.

tf is the within-document relative frequency (count over row sum) and idf
is ln(N / df) by default. The log base is a deliberate choice: a different
base rescales every idf by the same constant, and row normalization mostly
absorbs that, but fixing natural log makes expected values exact. Rows are
scaled to unit Euclidean length afterwards; empty documents stay all-zero
and are left for the classifier's prior to handle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .sparse import CsrMatrix

__all__ = ["TfIdfModel", "compute_tf", "fit_idf", "transform"]

log = logging.getLogger(__name__)

RAW_MODE = "raw"
SMOOTHED_MODE = "smoothed"
_MODES = (RAW_MODE, SMOOTHED_MODE)
_NORMS = ("l2", "none")


@dataclass(frozen=True)
class TfIdfModel:
    """Per-column idf weights fitted on a training count matrix."""

    idf: np.ndarray
    n_train_docs: int
    smoothing_mode: str = RAW_MODE
    norm: str = "l2"

    def __post_init__(self) -> None:
        if self.smoothing_mode not in _MODES:
            raise InputError(
                f"smoothing_mode must be one of {_MODES}, got {self.smoothing_mode!r}"
            )
        if self.norm not in _NORMS:
            raise InputError(f"norm must be one of {_NORMS}, got {self.norm!r}")


def compute_tf(counts: CsrMatrix) -> CsrMatrix:
    """Divide each stored count by its row sum. Empty rows stay empty."""
    values = np.array(counts.values, dtype=np.float64, copy=True)
    for i in range(counts.n_rows):
        lo, hi = counts.row_offsets[i], counts.row_offsets[i + 1]
        if hi > lo:
            values[lo:hi] /= values[lo:hi].sum()
    return CsrMatrix(
        n_rows=counts.n_rows,
        n_cols=counts.n_cols,
        row_offsets=np.array(counts.row_offsets, copy=True),
        col_indices=np.array(counts.col_indices, copy=True),
        values=values,
    )


def _smoothed_idf(n: int, df: np.ndarray) -> np.ndarray:
    return np.log((1.0 + n) / (1.0 + df)) + 1.0


def fit_idf(
    counts: CsrMatrix,
    smoothing_mode: str = RAW_MODE,
    norm: str = "l2",
) -> TfIdfModel:
    """Compute per-column document frequencies and turn them into idf.

    A df of zero cannot happen when the vocabulary came from the same
    corpus; with an externally supplied vocabulary it can, and those
    columns get the smoothed value instead of a division by zero, with a
    warning.
    """
    if counts.n_rows < 1:
        raise InputError("cannot fit idf on an empty count matrix")
    n = counts.n_rows
    # Each row stores a column at most once and never stores zeros, so the
    # per-column entry count is exactly the document frequency.
    df = np.bincount(counts.col_indices, minlength=counts.n_cols)
    if smoothing_mode == SMOOTHED_MODE:
        idf = _smoothed_idf(n, df)
    else:
        idf = np.zeros(counts.n_cols, dtype=np.float64)
        present = df > 0
        idf[present] = np.log(n / df[present])
        absent = ~present
        if absent.any():
            log.warning(
                "%d vocabulary columns never occur in the training counts; "
                "using smoothed idf for them",
                int(absent.sum()),
            )
            idf[absent] = _smoothed_idf(n, df[absent])
    return TfIdfModel(idf=idf, n_train_docs=n, smoothing_mode=smoothing_mode, norm=norm)


def transform(counts: CsrMatrix, model: TfIdfModel) -> CsrMatrix:
    """Weight counts by tf × idf and normalize each nonzero row.

    Entries that become exactly zero (idf 0) are dropped from storage so
    the no-stored-zeros invariant survives. Rows that end up all zero are
    kept as empty rows.
    """
    if counts.n_cols != model.idf.shape[0]:
        raise InputError(
            f"count matrix has {counts.n_cols} columns but the tf-idf model "
            f"was fitted for {model.idf.shape[0]}"
        )
    tf = compute_tf(counts)
    rows = []
    for i in range(tf.n_rows):
        cols, vals = tf.row(i)
        weighted = vals * model.idf[cols]
        keep = weighted != 0.0
        cols, weighted = cols[keep], weighted[keep]
        if model.norm == "l2" and weighted.size:
            weighted = weighted / math.sqrt(float(np.dot(weighted, weighted)))
        rows.append(list(zip(cols.tolist(), weighted.tolist())))
    return CsrMatrix.from_rows(n_cols=counts.n_cols, rows=rows, dtype=np.float64)
