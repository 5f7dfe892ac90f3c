"""Compressed sparse row matrices sized for desk-scale corpora."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, InternalError


@dataclass
class CsrMatrix:
    """Documents-by-features matrix storing only nonzero entries.

    ``row_offsets`` has length ``n_rows + 1``; the entries of row ``i`` live
    at positions ``row_offsets[i]:row_offsets[i + 1]`` of ``col_indices`` and
    ``values``, with column indices strictly increasing inside each row.
    Explicit zeros are never stored.
    """

    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    @classmethod
    def from_rows(
        cls,
        n_cols: int,
        rows: Sequence[Sequence[tuple[int, float]]],
        dtype=np.float64,
    ) -> "CsrMatrix":
        """Build a matrix from per-row lists of (column, value) entries.

        Entries must already be sorted by strictly increasing column within
        each row, and values must be nonzero.
        """
        offsets = np.zeros(len(rows) + 1, dtype=np.int64)
        cols: list[int] = []
        vals: list = []
        for i, entries in enumerate(rows):
            for c, v in entries:
                cols.append(c)
                vals.append(v)
            offsets[i + 1] = len(cols)
        matrix = cls(
            n_rows=len(rows),
            n_cols=n_cols,
            row_offsets=offsets,
            col_indices=np.asarray(cols, dtype=np.int64),
            values=np.asarray(vals, dtype=dtype),
        )
        matrix.validate()
        return matrix

    @classmethod
    def from_dense(cls, dense, dtype=None) -> "CsrMatrix":
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise InputError("dense input must be two-dimensional")
        if dtype is None:
            dtype = np.int64 if np.issubdtype(arr.dtype, np.integer) else np.float64
        rows = []
        for i in range(arr.shape[0]):
            nz = np.nonzero(arr[i])[0]
            rows.append(list(zip(nz.tolist(), arr[i, nz].tolist())))
        return cls.from_rows(arr.shape[1], rows, dtype=dtype)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Return (column indices, values) views of one row."""
        if not 0 <= i < self.n_rows:
            raise InternalError(
                f"row {i} out of range for matrix with {self.n_rows} rows"
            )
        lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[lo:hi], self.values[lo:hi]

    def row_sum(self, i: int):
        """Sum of the stored values in row ``i`` (zero for an empty row)."""
        _, vals = self.row(i)
        if vals.size == 0:
            return self.values.dtype.type(0)
        return vals.sum()

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def empty_rows(self) -> list[int]:
        """Indices of rows with no stored entries."""
        return np.nonzero(self.row_nnz() == 0)[0].tolist()

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=self.values.dtype)
        for i in range(self.n_rows):
            cols, vals = self.row(i)
            out[i, cols] = vals
        return out

    def to_dense_rows(self, rows: Sequence[int]) -> np.ndarray:
        """Densify a subset of rows as float64, preserving the given order."""
        out = np.zeros((len(rows), self.n_cols), dtype=np.float64)
        for k, i in enumerate(rows):
            cols, vals = self.row(i)
            out[k, cols] = vals
        return out

    def equals(self, other: "CsrMatrix") -> bool:
        return (
            self.shape == other.shape
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )

    def validate(self) -> None:
        """Check the structural invariants; raise InternalError on violation."""
        if self.row_offsets.shape != (self.n_rows + 1,):
            raise InternalError("row_offsets length must be n_rows + 1")
        if self.row_offsets[0] != 0:
            raise InternalError("row_offsets must start at 0")
        if np.any(np.diff(self.row_offsets) < 0):
            raise InternalError("row_offsets must be nondecreasing")
        if self.row_offsets[-1] != len(self.col_indices) or len(self.col_indices) != len(self.values):
            raise InternalError("row_offsets end must equal the stored entry count")
        if self.nnz:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.n_cols:
                raise InternalError("column index out of range")
            if np.any(self.values == 0):
                raise InternalError("explicit zero values are not allowed")
        for i in range(self.n_rows):
            cols, _ = self.row(i)
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise InternalError(f"column indices not strictly increasing in row {i}")
