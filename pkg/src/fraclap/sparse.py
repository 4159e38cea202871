"""CSR sparse matrices, matvec/transpose primitives, Matrix Market I/O.

Storage is CSR with strictly increasing column indices inside each row;
indices are int64, values float64. Matrices are immutable after
construction and safe to share between threads.
"""

import numpy as np

from fraclap._backend import kernels
from fraclap.errors import ParseError


class SparseMatrix:
    """Compressed sparse row matrix.

    Attributes
    ----------
    n_rows, n_cols : int
    row_ptr : int64 array, length n_rows + 1
    col_idx : int64 array, length nnz, sorted within each row
    values : float64 array, length nnz, all finite
    """

    __slots__ = ("n_rows", "n_cols", "row_ptr", "col_idx", "values")

    def __init__(self, n_rows, n_cols, row_ptr, col_idx, values):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        if len(self.row_ptr) != self.n_rows + 1:
            raise ValueError("row_ptr length must be n_rows + 1")
        if len(self.col_idx) != len(self.values):
            raise ValueError("col_idx and values length mismatch")
        if self.row_ptr[0] != 0 or self.row_ptr[-1] != len(self.values):
            raise ValueError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(self.row_ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("stored values must be finite")
        if len(self.col_idx):
            if self.col_idx.min() < 0 or self.col_idx.max() >= self.n_cols:
                raise ValueError("column index out of range")
            # strictly increasing inside each row; row starts may decrease
            diffs = np.diff(self.col_idx)
            starts = self.row_ptr[1:-1]
            starts = starts[(starts > 0) & (starts < len(self.col_idx))]
            interior = np.ones(len(diffs), dtype=bool)
            interior[starts - 1] = False
            if np.any(diffs[interior] <= 0):
                raise ValueError("column indices must be strictly increasing per row")

    @property
    def nnz(self):
        return len(self.values)

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def row(self, i):
        """(col_idx, values) view of row i."""
        s, e = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_idx[s:e], self.values[s:e]

    def to_dense(self):
        dense = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.row_ptr))
        dense[rows, self.col_idx] = self.values
        return dense

    def __repr__(self):
        return f"SparseMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


def from_coo(n_rows, n_cols, rows, cols, vals, drop_zeros=True):
    """Build a SparseMatrix from triplets; duplicates are summed.

    Summation of duplicates happens in ascending (row, col, input-position)
    order. Explicit zeros surviving the merge are dropped unless
    drop_zeros=False.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if rows.size:
        if rows.min() < 0 or rows.max() >= n_rows:
            raise ValueError("row index out of range")
        if cols.min() < 0 or cols.max() >= n_cols:
            raise ValueError("column index out of range")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size:
        keys = rows * n_cols + cols
        first = np.ones(len(keys), dtype=bool)
        first[1:] = keys[1:] != keys[:-1]
        starts = np.flatnonzero(first)
        merged = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
        vals = merged
        if drop_zeros:
            keep = vals != 0.0
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
    row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.add.at(row_ptr, rows + 1, 1)
    np.cumsum(row_ptr, out=row_ptr)
    return SparseMatrix(n_rows, n_cols, row_ptr, cols, vals)


def identity(n):
    idx = np.arange(n, dtype=np.int64)
    return SparseMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def spmv(A, x, transpose=False):
    """Sparse matrix-vector product A x (or A^T x).

    Accumulation order is deterministic: ascending column index within each
    row, rows in ascending order.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if not transpose:
        if len(x) != A.n_cols:
            raise ValueError(f"dimension mismatch: {A.shape} @ {len(x)}")
        return kernels.csr_matvec(A.row_ptr, A.col_idx, A.values, x)
    if len(x) != A.n_rows:
        raise ValueError(f"dimension mismatch: {A.shape}^T @ {len(x)}")
    return kernels.csr_matvec_t(A.row_ptr, A.col_idx, A.values, x, A.n_cols)


def transpose(A):
    """CSR transpose via a stable counting sort on column indices, O(nnz)."""
    rows = np.repeat(np.arange(A.n_rows, dtype=np.int64), np.diff(A.row_ptr))
    order = np.argsort(A.col_idx, kind="stable")
    row_ptr = np.zeros(A.n_cols + 1, dtype=np.int64)
    np.add.at(row_ptr, A.col_idx + 1, 1)
    np.cumsum(row_ptr, out=row_ptr)
    return SparseMatrix(A.n_cols, A.n_rows, row_ptr, rows[order], A.values[order])


def matrices_equal(A, B):
    """Exact structural and numerical equality."""
    return (
        A.shape == B.shape
        and np.array_equal(A.row_ptr, B.row_ptr)
        and np.array_equal(A.col_idx, B.col_idx)
        and np.array_equal(A.values, B.values)
    )


_MM_FIELDS = {"real", "integer", "pattern"}
_MM_SYMMETRIES = {"general", "symmetric"}


def load_matrix_market(path):
    """Read a Matrix Market coordinate file into a SparseMatrix.

    Supports real/integer/pattern fields and general/symmetric storage.
    Symmetric storage is expanded to both triangles, pattern entries get
    value 1.0, duplicate coordinates are summed, and explicit zeros are
    dropped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        banner = fh.readline()
        parts = banner.strip().split()
        if len(parts) != 5 or parts[0].lower() != "%%matrixmarket":
            raise ParseError(f"{path}: bad Matrix Market banner: {banner.strip()!r}")
        obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
        if obj != "matrix" or fmt != "coordinate":
            raise ParseError(f"{path}: only 'matrix coordinate' files are supported")
        if field == "complex":
            raise ParseError(f"{path}: complex field is not supported")
        if field not in _MM_FIELDS:
            raise ParseError(f"{path}: unsupported field {field!r}")
        if symmetry not in _MM_SYMMETRIES:
            raise ParseError(f"{path}: unsupported symmetry {symmetry!r}")

        size_line = None
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            raise ParseError(f"{path}: missing size line")
        toks = size_line.split()
        if len(toks) != 3:
            raise ParseError(f"{path}: bad size line: {size_line!r}")
        try:
            n_rows, n_cols, nnz_decl = (int(t) for t in toks)
        except ValueError as exc:
            raise ParseError(f"{path}: bad size line: {size_line!r}") from exc
        if n_rows < 0 or n_cols < 0 or nnz_decl < 0:
            raise ParseError(f"{path}: negative dimensions")

        want_value = field != "pattern"
        rows = np.empty(nnz_decl, dtype=np.int64)
        cols = np.empty(nnz_decl, dtype=np.int64)
        vals = np.ones(nnz_decl)
        count = 0
        for line in fh:
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            toks = stripped.split()
            if len(toks) != (3 if want_value else 2):
                raise ParseError(f"{path}: malformed entry line: {stripped!r}")
            try:
                i = int(toks[0])
                j = int(toks[1])
                v = float(toks[2]) if want_value else 1.0
            except ValueError as exc:
                raise ParseError(f"{path}: malformed entry line: {stripped!r}") from exc
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise ParseError(f"{path}: index ({i},{j}) out of declared bounds")
            if count >= nnz_decl:
                raise ParseError(f"{path}: more entries than declared ({nnz_decl})")
            rows[count] = i - 1
            cols[count] = j - 1
            vals[count] = v
            count += 1
        if count != nnz_decl:
            raise ParseError(f"{path}: {count} entries, {nnz_decl} declared")

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
        )
        vals = np.concatenate([vals, vals[off]])
    return from_coo(n_rows, n_cols, rows, cols, vals)


def save_matrix_market(A, path):
    """Write a SparseMatrix as 'matrix coordinate real general', 1-based."""
    rows = np.repeat(np.arange(A.n_rows), np.diff(A.row_ptr))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
        for i, j, v in zip(rows, A.col_idx, A.values):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
