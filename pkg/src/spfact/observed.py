"""Partially observed matrices: the masking operator and its adjoint.

An ObservedMatrix is a shape (m, n) plus a set of (row, col, value)
triplets, stored sorted by (row, col) with a CSR-style row pointer so
row-wise sweeps cost O(|Z| d). The masking operator P restricts a dense
matrix to the observed index set; adjoint_embed is its adjoint, scattering
observed values back into a dense zero matrix.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class ObservedMatrix:
    """Immutable sparse set of observed entries of an m x n matrix."""

    __slots__ = ("m", "n", "row", "col", "val", "row_ptr")

    def __init__(self, m, n, row, col, val):
        m = int(m)
        n = int(n)
        if m < 1 or n < 1:
            raise ValueError("shape must be positive")
        row = np.asarray(row, dtype=np.int64).ravel()
        col = np.asarray(col, dtype=np.int64).ravel()
        val = np.asarray(val, dtype=float).ravel()
        if not (row.size == col.size == val.size):
            raise ValueError("row, col, val must have equal lengths")
        if row.size:
            if row.min() < 0 or row.max() >= m:
                raise ValueError("row index out of range")
            if col.min() < 0 or col.max() >= n:
                raise ValueError("column index out of range")
            if not np.isfinite(val).all():
                raise ValueError("observed values contain NaN or Inf")
            order = np.lexsort((col, row))
            row = row[order]
            col = col[order]
            val = val[order]
            dup = (np.diff(row) == 0) & (np.diff(col) == 0)
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(
                    f"duplicate observation at (row={row[k]}, col={col[k]})"
                )
        row_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(row, minlength=m), out=row_ptr[1:])
        for a in (row, col, val, row_ptr):
            a.setflags(write=False)
        self.m = m
        self.n = n
        self.row = row
        self.col = col
        self.val = val
        self.row_ptr = row_ptr

    @classmethod
    def _from_sorted(cls, m, n, row, col, val, row_ptr):
        # Fast path for derived observation sets that reuse an existing
        # (already sorted, already validated) index pattern.
        obj = object.__new__(cls)
        val = np.asarray(val, dtype=float)
        val.setflags(write=False)
        obj.m = m
        obj.n = n
        obj.row = row
        obj.col = col
        obj.val = val
        obj.row_ptr = row_ptr
        return obj

    @classmethod
    def from_dense(cls, X):
        """Fully observed view of a dense matrix."""
        X = np.asarray(X, dtype=float)
        m, n = X.shape
        row, col = np.divmod(np.arange(m * n, dtype=np.int64), n)
        return cls(m, n, row, col, X.ravel())

    @property
    def shape(self):
        return (self.m, self.n)

    @property
    def nnz(self):
        return self.val.size

    def with_values(self, val):
        """Same observation pattern, new values."""
        val = np.asarray(val, dtype=float).ravel()
        if val.size != self.val.size:
            raise ValueError("value count does not match the pattern")
        if not np.isfinite(val).all():
            raise ValueError("observed values contain NaN or Inf")
        return ObservedMatrix._from_sorted(
            self.m, self.n, self.row, self.col, val.copy(), self.row_ptr
        )

    def to_csr(self):
        """Zero-copy scipy CSR view of the observed entries."""
        return sp.csr_matrix(
            (self.val, self.col, self.row_ptr), shape=(self.m, self.n), copy=False
        )


@dataclass(frozen=True)
class MaskSplit:
    """Disjoint train/test observation sets over one matrix shape."""

    train: ObservedMatrix
    test: ObservedMatrix

    def __post_init__(self):
        if self.train.shape != self.test.shape:
            raise ValueError("train and test shapes disagree")
        lin_tr = self.train.row * self.train.n + self.train.col
        lin_te = self.test.row * self.test.n + self.test.col
        if np.intersect1d(lin_tr, lin_te).size:
            raise ValueError("train and test index sets overlap")


def _check_shapes(Y, F):
    if F.shape != Y.shape:
        raise ValueError(f"factor shape {F.shape} does not match data shape {Y.shape}")


def predicted_values(Y, F):
    """Values of U V^T at the observed positions of Y, in O(|Z| d)."""
    _check_shapes(Y, F)
    if Y.nnz == 0:
        return np.zeros(0)
    return np.einsum("ij,ij->i", F.U[Y.row], F.V[Y.col])


def masked_residual(Y, F):
    """P(Y - U V^T): the residual triplets on the observed set."""
    return Y.with_values(Y.val - predicted_values(Y, F))


def adjoint_embed(R):
    """Dense m x n matrix carrying R's values on its pattern, zero elsewhere."""
    out = np.zeros((R.m, R.n))
    out[R.row, R.col] = R.val
    return out


def loss_value(Y, F):
    """Half squared residual on the observed set, 0.5 |P(Y - U V^T)|_F^2."""
    r = Y.val - predicted_values(Y, F)
    return 0.5 * float(r @ r)
