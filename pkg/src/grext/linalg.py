"""Exact linear algebra over a prime field F_p.

Matrices are stored dense (numpy int64) up to 512 columns and as sparse
dict-rows beyond that; both backends produce the identical reduced row
echelon form, so all derived quantities (rank profiles, kernels, canonical
solutions) are representation-independent.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

DENSE_MAX_COLS = 512

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all 64-bit integers."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class DimensionMismatch(ValueError):
    pass


class FpMatrix:
    """Immutable exact matrix over F_p."""

    __slots__ = ("p", "rows", "cols", "_dense", "_sparse", "_rref_cache")

    def __init__(self, p: int, rows: int, cols: int, dense=None, sparse=None):
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        if p >= 1 << 31:
            raise ValueError("modulus must fit in a machine word")
        if rows < 0 or cols < 0:
            raise ValueError("negative matrix dimensions")
        self.p = p
        self.rows = rows
        self.cols = cols
        self._dense = dense
        self._sparse = sparse
        self._rref_cache = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "FpMatrix":
        if cols <= DENSE_MAX_COLS:
            return cls(p, rows, cols, dense=np.zeros((rows, cols), dtype=np.int64))
        return cls(p, rows, cols, sparse=[{} for _ in range(rows)])

    @classmethod
    def identity(cls, p: int, n: int) -> "FpMatrix":
        if n <= DENSE_MAX_COLS:
            return cls(p, n, n, dense=np.eye(n, dtype=np.int64))
        return cls(p, n, n, sparse=[{i: 1} for i in range(n)])

    @classmethod
    def from_rows(cls, p: int, data: Iterable[Iterable[int]], cols: Optional[int] = None) -> "FpMatrix":
        rows = [list(r) for r in data]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DimensionMismatch("ragged rows")
        if cols <= DENSE_MAX_COLS:
            arr = np.array(rows, dtype=np.int64).reshape(len(rows), cols) % p
            return cls(p, len(rows), cols, dense=arr)
        sp = [{j: v % p for j, v in enumerate(r) if v % p} for r in rows]
        return cls(p, len(rows), cols, sparse=sp)

    @classmethod
    def from_entries(cls, p: int, rows: int, cols: int,
                     entries: Iterable[tuple[int, int, int]]) -> "FpMatrix":
        m = cls.zeros(p, rows, cols)
        if m._dense is not None:
            for i, j, v in entries:
                m._dense[i, j] = (m._dense[i, j] + v) % p
        else:
            for i, j, v in entries:
                row = m._sparse[i]
                nv = (row.get(j, 0) + v) % p
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
        return m

    @classmethod
    def from_columns(cls, p: int, columns: Sequence[Sequence[int]], rows: Optional[int] = None) -> "FpMatrix":
        cols = list(columns)
        if rows is None:
            rows = len(cols[0]) if cols else 0
        return cls.from_rows(p, [[c[i] for c in cols] for i in range(rows)], cols=len(cols))

    # -- accessors ----------------------------------------------------

    def entry(self, i: int, j: int) -> int:
        if self._dense is not None:
            return int(self._dense[i, j])
        return self._sparse[i].get(j, 0)

    def row(self, i: int) -> tuple[int, ...]:
        if self._dense is not None:
            return tuple(int(v) for v in self._dense[i])
        r = self._sparse[i]
        return tuple(r.get(j, 0) for j in range(self.cols))

    def column(self, j: int) -> tuple[int, ...]:
        if self._dense is not None:
            return tuple(int(v) for v in self._dense[:, j])
        return tuple(r.get(j, 0) for r in self._sparse)

    def to_lists(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def nnz(self) -> int:
        if self._dense is not None:
            return int(np.count_nonzero(self._dense))
        return sum(len(r) for r in self._sparse)

    def is_zero(self) -> bool:
        return self.nnz() == 0

    def _sparse_rows(self) -> list[dict]:
        if self._sparse is not None:
            return [dict(r) for r in self._sparse]
        out = []
        for i in range(self.rows):
            nz = np.nonzero(self._dense[i])[0]
            out.append({int(j): int(self._dense[i, j]) for j in nz})
        return out

    def _as_dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        arr = np.zeros((self.rows, self.cols), dtype=np.int64)
        for i, r in enumerate(self._sparse):
            for j, v in r.items():
                arr[i, j] = v
        return arr

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpMatrix):
            return NotImplemented
        if (self.p, self.rows, self.cols) != (other.p, other.rows, other.cols):
            return False
        if self._dense is not None and other._dense is not None:
            return bool(np.array_equal(self._dense % self.p, other._dense % self.p))
        return self._sparse_rows() == other._sparse_rows()

    def __hash__(self):
        raise TypeError("FpMatrix is not hashable")

    def __repr__(self):
        return f"FpMatrix(p={self.p}, {self.rows}x{self.cols}, nnz={self.nnz()})"

    # -- arithmetic ---------------------------------------------------

    def _check_same_field(self, other: "FpMatrix"):
        if self.p != other.p:
            raise DimensionMismatch("mixed moduli")

    def __add__(self, other: "FpMatrix") -> "FpMatrix":
        self._check_same_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("shape mismatch in add")
        if self._dense is not None and other._dense is not None:
            return FpMatrix(self.p, self.rows, self.cols,
                            dense=(self._dense + other._dense) % self.p)
        a, b = self._sparse_rows(), other._sparse_rows()
        out = []
        for ra, rb in zip(a, b):
            r = dict(ra)
            for j, v in rb.items():
                nv = (r.get(j, 0) + v) % self.p
                if nv:
                    r[j] = nv
                else:
                    r.pop(j, None)
            out.append(r)
        return FpMatrix(self.p, self.rows, self.cols, sparse=out)

    def __sub__(self, other: "FpMatrix") -> "FpMatrix":
        return self + other.scale(-1)

    def scale(self, c: int) -> "FpMatrix":
        c %= self.p
        if self._dense is not None:
            return FpMatrix(self.p, self.rows, self.cols, dense=(self._dense * c) % self.p)
        out = [{j: (v * c) % self.p for j, v in r.items() if (v * c) % self.p}
               for r in self._sparse]
        return FpMatrix(self.p, self.rows, self.cols, sparse=out)

    def __matmul__(self, other: "FpMatrix") -> "FpMatrix":
        self._check_same_field(other)
        if self.cols != other.rows:
            raise DimensionMismatch("inner dimension mismatch")
        if self._dense is not None and other._dense is not None and self.cols <= 2048:
            prod = (self._dense @ other._dense) % self.p
            if other.cols <= DENSE_MAX_COLS:
                return FpMatrix(self.p, self.rows, other.cols, dense=prod)
            return FpMatrix.from_rows(self.p, prod.tolist(), cols=other.cols)
        a = self._sparse_rows()
        b = other._sparse_rows()
        out = []
        for ra in a:
            acc: dict[int, int] = {}
            for k, v in ra.items():
                for j, w in b[k].items():
                    acc[j] = (acc.get(j, 0) + v * w) % self.p
            out.append({j: v for j, v in acc.items() if v})
        m = FpMatrix(self.p, self.rows, other.cols, sparse=out)
        if other.cols <= DENSE_MAX_COLS:
            return FpMatrix(self.p, self.rows, other.cols, dense=m._as_dense())
        return m

    def mat_vec(self, vec: Sequence[int]) -> tuple[int, ...]:
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length mismatch")
        if self._dense is not None:
            v = np.array(list(vec), dtype=np.int64) % self.p
            return tuple(int(x) for x in (self._dense @ v) % self.p)
        out = []
        for r in self._sparse:
            s = 0
            for j, c in r.items():
                s += c * vec[j]
            out.append(s % self.p)
        return tuple(out)

    def transpose(self) -> "FpMatrix":
        if self._dense is not None and self.rows <= DENSE_MAX_COLS:
            return FpMatrix(self.p, self.cols, self.rows, dense=self._dense.T.copy())
        cols: list[dict] = [{} for _ in range(self.cols)]
        for i, r in enumerate(self._sparse_rows()):
            for j, v in r.items():
                cols[j][i] = v
        m = FpMatrix(self.p, self.cols, self.rows, sparse=cols)
        if self.rows <= DENSE_MAX_COLS:
            return FpMatrix(self.p, self.cols, self.rows, dense=m._as_dense())
        return m

    def hstack(self, other: "FpMatrix") -> "FpMatrix":
        self._check_same_field(other)
        if self.rows != other.rows:
            raise DimensionMismatch("row mismatch in hstack")
        total = self.cols + other.cols
        if total <= DENSE_MAX_COLS and self._dense is not None and other._dense is not None:
            return FpMatrix(self.p, self.rows, total,
                            dense=np.hstack([self._dense, other._dense]))
        a, b = self._sparse_rows(), other._sparse_rows()
        out = []
        for ra, rb in zip(a, b):
            r = dict(ra)
            for j, v in rb.items():
                r[j + self.cols] = v
            out.append(r)
        m = FpMatrix(self.p, self.rows, total, sparse=out)
        if total <= DENSE_MAX_COLS:
            return FpMatrix(self.p, self.rows, total, dense=m._as_dense())
        return m

    def vstack(self, other: "FpMatrix") -> "FpMatrix":
        self._check_same_field(other)
        if self.cols != other.cols:
            raise DimensionMismatch("column mismatch in vstack")
        if self._dense is not None and other._dense is not None:
            return FpMatrix(self.p, self.rows + other.rows, self.cols,
                            dense=np.vstack([self._dense, other._dense]))
        return FpMatrix(self.p, self.rows + other.rows, self.cols,
                        sparse=self._sparse_rows() + other._sparse_rows())

    def take_rows(self, indices: Sequence[int]) -> "FpMatrix":
        if self._dense is not None:
            return FpMatrix(self.p, len(indices), self.cols,
                            dense=self._dense[list(indices)].copy())
        rows = self._sparse_rows()
        return FpMatrix(self.p, len(indices), self.cols,
                        sparse=[dict(rows[i]) for i in indices])

    def take_cols(self, indices: Sequence[int]) -> "FpMatrix":
        remap = {int(j): k for k, j in enumerate(indices)}
        if self._dense is not None and len(indices) <= DENSE_MAX_COLS:
            return FpMatrix(self.p, self.rows, len(indices),
                            dense=self._dense[:, list(indices)].copy())
        out = []
        for r in self._sparse_rows():
            out.append({remap[j]: v for j, v in r.items() if j in remap})
        m = FpMatrix(self.p, self.rows, len(indices), sparse=out)
        if len(indices) <= DENSE_MAX_COLS:
            return FpMatrix(self.p, self.rows, len(indices), dense=m._as_dense())
        return m

    # -- elimination core ----------------------------------------------

    def _rref(self) -> tuple["FpMatrix", list[int]]:
        """Reduced row echelon form (unique) and its pivot columns."""
        if self._rref_cache is not None:
            return self._rref_cache
        if self._dense is not None:
            result = self._rref_dense()
        else:
            result = self._rref_sparse()
        self._rref_cache = result
        return result

    def _rref_dense(self) -> tuple["FpMatrix", list[int]]:
        p = self.p
        a = self._dense % p
        a = a.copy()
        m, n = a.shape
        pivots: list[int] = []
        r = 0
        for c in range(n):
            if r == m:
                break
            nz = np.nonzero(a[r:, c])[0]
            if nz.size == 0:
                continue
            piv = r + int(nz[0])
            if piv != r:
                a[[r, piv]] = a[[piv, r]]
            inv = pow(int(a[r, c]), p - 2, p)
            a[r] = (a[r] * inv) % p
            col = a[:, c].copy()
            col[r] = 0
            mask = np.nonzero(col)[0]
            if mask.size:
                a[mask] = (a[mask] - np.outer(col[mask], a[r])) % p
            pivots.append(c)
            r += 1
        mat = FpMatrix(p, m, n, dense=a) if n <= DENSE_MAX_COLS else \
            FpMatrix.from_rows(p, a.tolist(), cols=n)
        return mat, pivots

    def _rref_sparse(self) -> tuple["FpMatrix", list[int]]:
        p = self.p
        pivrows: dict[int, dict] = {}
        for raw in self._sparse_rows():
            cur = dict(raw)
            while cur:
                c = min(cur)
                if c in pivrows:
                    coef = cur[c]
                    for jj, vv in pivrows[c].items():
                        nv = (cur.get(jj, 0) - coef * vv) % p
                        if nv:
                            cur[jj] = nv
                        else:
                            cur.pop(jj, None)
                else:
                    inv = pow(cur[c], p - 2, p)
                    cur = {jj: (vv * inv) % p for jj, vv in cur.items()}
                    pivrows[c] = cur
                    break
        # back-substitution: fully reduce pivot rows against later pivots
        pivots = sorted(pivrows)
        for idx in range(len(pivots) - 1, -1, -1):
            c = pivots[idx]
            row = pivrows[c]
            for c2 in [j for j in row if j != c and j in pivrows]:
                coef = row.get(c2, 0)
                if not coef:
                    continue
                for jj, vv in pivrows[c2].items():
                    nv = (row.get(jj, 0) - coef * vv) % p
                    if nv:
                        row[jj] = nv
                    else:
                        row.pop(jj, None)
        rows = [dict(pivrows[c]) for c in pivots]
        rows += [{} for _ in range(self.rows - len(rows))]
        mat = FpMatrix(p, self.rows, self.cols, sparse=rows)
        if self.cols <= DENSE_MAX_COLS:
            mat = FpMatrix(p, self.rows, self.cols, dense=mat._as_dense())
        return mat, pivots

    # -- derived operations --------------------------------------------

    def rank(self) -> int:
        return len(self._rref()[1])

    def rank_profile(self) -> tuple[int, list[int]]:
        """Rank and the strictly increasing list of pivot columns."""
        _, pivots = self._rref()
        return len(pivots), list(pivots)

    def rref(self) -> tuple["FpMatrix", list[int]]:
        m, piv = self._rref()
        return m, list(piv)

    def kernel_basis(self) -> list[tuple[int, ...]]:
        """Canonical basis of the right null space (one vector per free column)."""
        red, pivots = self._rref()
        pivset = set(pivots)
        free = [c for c in range(self.cols) if c not in pivset]
        red_rows = red._sparse_rows()[: len(pivots)]
        basis = []
        for f in free:
            v = [0] * self.cols
            v[f] = 1
            for r_idx, c in enumerate(pivots):
                coef = red_rows[r_idx].get(f, 0)
                if coef:
                    v[c] = (-coef) % self.p
            basis.append(tuple(v))
        return basis

    def kernel_matrix(self) -> "FpMatrix":
        """Kernel basis vectors as the columns of a matrix."""
        return FpMatrix.from_columns(self.p, self.kernel_basis(), rows=self.cols)

    def solve(self, rhs: Sequence[int]) -> Optional[tuple[int, ...]]:
        """Canonical solution of self @ x = rhs (free variables zero), or None."""
        sols = self.solve_batch([list(rhs)])
        return sols[0]

    def solve_batch(self, rhs_list: Sequence[Sequence[int]]) -> list[Optional[tuple[int, ...]]]:
        """Solve self @ x = rhs for several right-hand sides at once.

        One elimination of [self | rhs_0 | ... ] serves every system. A rhs
        column is inconsistent exactly when some RREF row is zero on the main
        block but nonzero on that column.
        """
        for rhs in rhs_list:
            if len(rhs) != self.rows:
                raise DimensionMismatch("rhs length mismatch")
        k = len(rhs_list)
        if k == 0:
            return []
        rhs_mat = FpMatrix.from_columns(self.p, [list(r) for r in rhs_list], rows=self.rows)
        aug = self.hstack(rhs_mat)
        red, pivots = aug._rref()
        red_rows = red._sparse_rows()
        main_piv = [c for c in pivots if c < self.cols]
        rank_main = len(main_piv)
        result: list[Optional[tuple[int, ...]]] = []
        for t in range(k):
            col = self.cols + t
            consistent = all(
                red_rows[r_idx].get(col, 0) == 0
                for r_idx in range(rank_main, len(pivots))
            )
            if not consistent:
                result.append(None)
                continue
            x = [0] * self.cols
            for r_idx, c in enumerate(main_piv):
                x[c] = red_rows[r_idx].get(col, 0)
            result.append(tuple(x))
        return result

    def column_space_basis(self) -> "FpMatrix":
        """Canonical (RREF of the transpose) basis of the column space, as columns."""
        red, pivots = self.transpose()._rref()
        rows = red._sparse_rows()[: len(pivots)]
        vecs = [tuple(r.get(j, 0) for j in range(self.rows)) for r in rows]
        return FpMatrix.from_columns(self.p, vecs, rows=self.rows)


class IncrementalSpan:
    """Grow a subspace one vector at a time with O(nnz * rank) insertions.

    Keeps reduced pivot rows; `add` reports whether the vector enlarged the
    span. Vectors are column vectors of fixed length over F_p.
    """

    def __init__(self, p: int, length: int):
        self.p = p
        self.length = length
        self._pivots: dict[int, dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def reduce(self, vec: Sequence[int]) -> dict[int, int]:
        p = self.p
        cur = {i: v % p for i, v in enumerate(vec) if v % p}
        while cur:
            c = min(cur)
            if c not in self._pivots:
                break
            coef = cur[c]
            for jj, vv in self._pivots[c].items():
                nv = (cur.get(jj, 0) - coef * vv) % p
                if nv:
                    cur[jj] = nv
                else:
                    cur.pop(jj, None)
        return cur

    def contains(self, vec: Sequence[int]) -> bool:
        return not self.reduce(vec)

    def add(self, vec: Sequence[int]) -> bool:
        cur = self.reduce(vec)
        if not cur:
            return False
        c = min(cur)
        inv = pow(cur[c], self.p - 2, self.p)
        self._pivots[c] = {j: (v * inv) % self.p for j, v in cur.items()}
        return True


# -- subspace arithmetic (subspaces given by generator columns) ---------


def span_dim(gen: FpMatrix) -> int:
    return gen.rank()


def subspace_sum(a: FpMatrix, b: FpMatrix) -> FpMatrix:
    """Generators of span(a) + span(b)."""
    return a.hstack(b)


def subspace_intersection(a: FpMatrix, b: FpMatrix) -> FpMatrix:
    """Canonical generators of span(a) ∩ span(b), as columns."""
    if a.rows != b.rows or a.p != b.p:
        raise DimensionMismatch("ambient mismatch")
    if a.cols == 0 or b.cols == 0:
        return FpMatrix.zeros(a.p, a.rows, 0)
    stacked = a.hstack(b.scale(-1))
    vecs = [a.mat_vec(v[: a.cols]) for v in stacked.kernel_basis()]
    m = FpMatrix.from_columns(a.p, vecs, rows=a.rows)
    return m.column_space_basis()


def in_span(gen: FpMatrix, vec: Sequence[int]) -> bool:
    return gen.solve(vec) is not None


def coordinates_in(gen: FpMatrix, vec: Sequence[int]) -> Optional[tuple[int, ...]]:
    """Coordinates of vec in the generator columns (canonical), or None."""
    return gen.solve(vec)
