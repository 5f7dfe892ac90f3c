import numpy as np
import pytest

from docshield.errors import InternalError
from docshield.sparse import CsrMatrix


def random_dense(rng, n_rows, n_cols, density=0.3):
    dense = np.zeros((n_rows, n_cols))
    mask = rng.rand(n_rows, n_cols) < density
    dense[mask] = rng.randint(1, 9, size=mask.sum()).astype(float)
    return dense


class TestConstruction:
    def test_from_rows(self):
        m = CsrMatrix.from_rows(n_cols=4, rows=[[(0, 2.0), (3, 1.0)], [], [(1, 5.0)]])
        assert m.shape == (3, 4)
        assert m.nnz == 3
        assert m.to_dense().tolist() == [
            [2.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 5.0, 0.0, 0.0],
        ]

    def test_from_dense_round_trip(self):
        rng = np.random.RandomState(0)
        for _ in range(100):
            dense = random_dense(rng, rng.randint(1, 7), rng.randint(1, 9))
            m = CsrMatrix.from_dense(dense)
            m.validate()
            assert np.array_equal(m.to_dense(), dense)

    def test_zero_values_never_stored(self):
        m = CsrMatrix.from_dense(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert m.nnz == 1
        assert not (np.asarray(m.values) == 0).any()


class TestAccessors:
    def setup_method(self):
        self.m = CsrMatrix.from_dense(
            np.array([[2.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 7.0, 0.0]])
        )

    def test_row(self):
        cols, vals = self.m.row(0)
        assert cols.tolist() == [0, 2]
        assert vals.tolist() == [2.0, 1.0]

    def test_row_sum(self):
        assert self.m.row_sum(0) == 3.0
        assert self.m.row_sum(1) == 0.0
        with pytest.raises(InternalError):
            self.m.row_sum(3)

    def test_row_sum_matches_dense_oracle(self):
        rng = np.random.RandomState(2)
        for _ in range(100):
            dense = random_dense(rng, rng.randint(1, 6), rng.randint(1, 10))
            m = CsrMatrix.from_dense(dense)
            for i in range(dense.shape[0]):
                assert m.row_sum(i) == pytest.approx(dense[i].sum())

    def test_empty_rows(self):
        assert self.m.empty_rows() == [1]

    def test_to_dense_rows_subset(self):
        sub = self.m.to_dense_rows([2, 0])
        assert sub.tolist() == [[0.0, 7.0, 0.0], [2.0, 0.0, 1.0]]


class TestValidation:
    def test_decreasing_columns_rejected(self):
        m = CsrMatrix(
            n_rows=1, n_cols=3,
            row_offsets=np.array([0, 2]),
            col_indices=np.array([2, 0]),
            values=np.array([1.0, 1.0]),
        )
        with pytest.raises(InternalError, match="increasing"):
            m.validate()

    def test_stored_zero_rejected(self):
        m = CsrMatrix(
            n_rows=1, n_cols=2,
            row_offsets=np.array([0, 1]),
            col_indices=np.array([0]),
            values=np.array([0.0]),
        )
        with pytest.raises(InternalError, match="zero"):
            m.validate()

    def test_column_out_of_range_rejected(self):
        m = CsrMatrix(
            n_rows=1, n_cols=2,
            row_offsets=np.array([0, 1]),
            col_indices=np.array([5]),
            values=np.array([1.0]),
        )
        with pytest.raises(InternalError, match="range"):
            m.validate()

    def test_bad_offsets_rejected(self):
        m = CsrMatrix(
            n_rows=2, n_cols=2,
            row_offsets=np.array([0, 2, 1]),
            col_indices=np.array([0, 1]),
            values=np.array([1.0, 1.0]),
        )
        with pytest.raises(InternalError):
            m.validate()
