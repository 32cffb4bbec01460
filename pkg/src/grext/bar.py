"""Bar resolution machinery: differentials, Ext, restriction, gr comparison.

Cochains Hom_A(B_nA, M) are stored on the reduced basis: B_nA is free on the
first tensor factor, so a cochain is determined by its values on tuples
1 ⊗ a_1 ⊗ ... ⊗ a_n. The cochain space has the tuple-pair basis (t, u) with
t an n-tuple of algebra basis indices and u a module basis index, giving
dimension (dim A)^n * dim M.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .algebra import (
    AlgebraMorphism,
    FilteredAlgebra,
    FilteredModule,
    associated_graded,
    graded_module_of,
    restrict_module,
)
from .linalg import FpMatrix, IncrementalSpan

DEFAULT_DIM_CAP = 1_000_000


class ResourceCapExceeded(Exception):
    pass


class TruncationExceeded(Exception):
    pass


def _tuple_weight(a: FilteredAlgebra, t: Sequence[int]) -> int:
    return sum(a.weights[i] for i in t)


def _tuple_index(D: int, t: Sequence[int]) -> int:
    idx = 0
    for x in t:
        idx = idx * D + x
    return idx


def bar_differential(a: FilteredAlgebra, n: int, n_max: int = 8) -> FpMatrix:
    """Matrix of d_n: B_nA -> B_{n-1}A on the full tuple basis A^(n+1) -> A^n."""
    if n < 1:
        raise ValueError("bar differential needs n >= 1")
    if n > n_max:
        raise TruncationExceeded(f"degree {n} exceeds truncation bound {n_max}")
    D = a.dim
    rows, cols = D ** n, D ** (n + 1)
    sign_last = -1 if n % 2 else 1
    entries = []
    for t in itertools.product(range(D), repeat=n + 1):
        col = _tuple_index(D, t)
        eps = a.aug[t[n]]
        if eps:
            entries.append((_tuple_index(D, t[:n]), col, sign_last * eps))
        for i in range(n):
            sign = -1 if i % 2 else 1
            for k, c in a.mul_basis(t[i], t[i + 1]):
                merged = t[:i] + (k,) + t[i + 2:]
                entries.append((_tuple_index(D, merged), col, sign * c))
    return FpMatrix.from_entries(a.p, rows, cols, entries)


def cochain_dim(a: FilteredAlgebra, m: FilteredModule, n: int) -> int:
    return (a.dim ** n) * m.dim


def cochain_weights(a: FilteredAlgebra, m: FilteredModule, n: int) -> list[int]:
    """Filtration weight of each reduced cochain coordinate: w_M(u) - w(t)."""
    D = a.dim
    out = []
    for t in itertools.product(range(D), repeat=n):
        wt = _tuple_weight(a, t)
        for u in range(m.dim):
            out.append(m.weights[u] - wt)
    return out


def coboundary(a: FilteredAlgebra, m: FilteredModule, n: int,
               cap: int = DEFAULT_DIM_CAP) -> FpMatrix:
    """Matrix of the reduced-cochain differential C^n -> C^(n+1)."""
    D, dM = a.dim, m.dim
    if (D ** (n + 1)) * dM > cap:
        raise ResourceCapExceeded(
            f"cochain space of dimension {(D ** (n + 1)) * dM} exceeds cap {cap}")
    rows = (D ** (n + 1)) * dM
    cols = (D ** n) * dM
    entries = []
    sign_last = -1 if (n + 1) % 2 else 1
    for t in itertools.product(range(D), repeat=n + 1):
        base_row = _tuple_index(D, t) * dM
        # a_1 * phi(a_2..a_{n+1})
        tail_col = _tuple_index(D, t[1:]) * dM
        for u in range(dM):
            for k, c in m.act_basis(t[0], u):
                entries.append((base_row + k, tail_col + u, c))
        # inner contractions
        for i in range(n):
            sign = -1 if (i + 1) % 2 else 1
            for k, c in a.mul_basis(t[i], t[i + 1]):
                merged = t[:i] + (k,) + t[i + 2:]
                col = _tuple_index(D, merged) * dM
                for u in range(dM):
                    entries.append((base_row + u, col + u, sign * c))
        # epsilon tail
        eps = a.aug[t[n]]
        if eps:
            col = _tuple_index(D, t[:n]) * dM
            for u in range(dM):
                entries.append((base_row + u, col + u, sign_last * eps))
    return FpMatrix.from_entries(a.p, rows, cols, entries)


class CohomologyDecoder:
    """Canonical class coordinates at one cochain degree.

    Representatives are the cocycle-basis columns that grow the rank over the
    coboundary image; decode() solves against [representatives | boundaries].
    """

    def __init__(self, p: int, cocycles: FpMatrix, boundaries: FpMatrix):
        self.p = p
        self.cocycles = cocycles
        self.boundaries = boundaries
        span = IncrementalSpan(p, cocycles.rows)
        for j in range(boundaries.cols):
            span.add(boundaries.column(j))
        reps: list[tuple[int, ...]] = []
        for j in range(cocycles.cols):
            col = cocycles.column(j)
            if span.add(col):
                reps.append(col)
        self.representatives = FpMatrix.from_columns(p, reps, rows=cocycles.rows)
        self.dim = len(reps)
        self._solver = self.representatives.hstack(boundaries)

    def decode(self, vec: Sequence[int]) -> tuple[int, ...]:
        x = self._solver.solve(vec)
        if x is None:
            raise ValueError("vector is not a cocycle class in this cohomology")
        return tuple(x[: self.dim])

    def decode_batch(self, vecs: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
        sols = self._solver.solve_batch(vecs)
        out = []
        for x in sols:
            if x is None:
                raise ValueError("vector is not a cocycle class in this cohomology")
            out.append(tuple(x[: self.dim]))
        return out


@dataclass
class ExtDegree:
    n: int
    dim: int
    cocycles: FpMatrix
    boundaries: FpMatrix
    decoder: CohomologyDecoder = field(repr=False)


@dataclass
class ExtResult:
    algebra: FilteredAlgebra
    module: FilteredModule
    degrees: list[ExtDegree]

    def dims(self) -> list[int]:
        return [d.dim for d in self.degrees]

    def degree(self, n: int) -> ExtDegree:
        return self.degrees[n]


def ext_via_bar(a: FilteredAlgebra, m: FilteredModule, n_max: int,
                cap: int = DEFAULT_DIM_CAP) -> ExtResult:
    """Ext^n_A(k, M) for 0 <= n < n_max via the reduced bar cochain complex.

    Degree n uses cochains through degree n+1, so n_max is the largest
    cochain degree built and the top reported Ext degree is n_max - 1.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if (a.dim ** n_max) * m.dim > cap:
        raise ResourceCapExceeded(
            f"(dim A)^{n_max} * dim M = {(a.dim ** n_max) * m.dim} exceeds cap {cap}")
    deltas = [coboundary(a, m, n, cap=cap) for n in range(n_max)]
    degrees = []
    for n in range(n_max):
        kernel = deltas[n].kernel_matrix()
        if n == 0:
            boundaries = FpMatrix.zeros(a.p, cochain_dim(a, m, 0), 0)
        else:
            boundaries = deltas[n - 1].column_space_basis()
        decoder = CohomologyDecoder(a.p, kernel, boundaries)
        degrees.append(ExtDegree(n, decoder.dim, kernel, boundaries, decoder))
    return ExtResult(a, m, degrees)


def restriction_cochain_map(f: AlgebraMorphism, m: FilteredModule, n: int) -> FpMatrix:
    """Cochain-level restriction C^n(A, M) -> C^n(A', M|_{A'}) along f: A' -> A."""
    A, Ap = f.target, f.source
    D, Dp, dM = A.dim, Ap.dim, m.dim
    cols_of_f = [f.matrix.column(j) for j in range(Dp)]
    sparse_cols = [[(k, v) for k, v in enumerate(col) if v] for col in cols_of_f]
    entries = []
    for tp in itertools.product(range(Dp), repeat=n):
        row_base = _tuple_index(Dp, tp) * dM
        # expand the product of images slot by slot
        partial: list[tuple[tuple[int, ...], int]] = [((), 1)]
        for slot in tp:
            nxt = []
            for prefix, coef in partial:
                for k, v in sparse_cols[slot]:
                    nxt.append((prefix + (k,), (coef * v) % A.p))
            partial = nxt
        for t, coef in partial:
            if not coef:
                continue
            col_base = _tuple_index(D, t) * dM
            for u in range(dM):
                entries.append((row_base + u, col_base + u, coef))
    return FpMatrix.from_entries(A.p, (Dp ** n) * dM, (D ** n) * dM, entries)


def restriction_map(f: AlgebraMorphism, m: FilteredModule, n: int,
                    cap: int = DEFAULT_DIM_CAP,
                    source_ext: Optional[ExtResult] = None,
                    target_ext: Optional[ExtResult] = None) -> FpMatrix:
    """Matrix of Ext^n_A(k, M) -> Ext^n_{A'}(k, M) induced by f: A' -> A.

    Rows are class coordinates on the A' side, columns the canonical class
    representatives on the A side.
    """
    f.validate()
    A, Ap = f.target, f.source
    m_restricted = restrict_module(f, m)
    ext_A = source_ext if source_ext is not None else ext_via_bar(A, m, n + 1, cap=cap)
    ext_Ap = target_ext if target_ext is not None else ext_via_bar(Ap, m_restricted, n + 1, cap=cap)
    R = restriction_cochain_map(f, m, n)
    deg_A = ext_A.degree(n)
    deg_Ap = ext_Ap.degree(n)
    reps = deg_A.decoder.representatives
    images = [R.mat_vec(reps.column(j)) for j in range(reps.cols)]
    coords = deg_Ap.decoder.decode_batch(images) if images else []
    return FpMatrix.from_columns(A.p, coords, rows=deg_Ap.dim) if coords else \
        FpMatrix.zeros(A.p, deg_Ap.dim, 0)


# -- gr comparison reports -------------------------------------------------


def gr_bar_compare(a: FilteredAlgebra, n: int, i: int) -> dict:
    """Check dim gr^i B_nA against the graded-side composition count, and that
    the weight-graded piece of d_n agrees with the bar differential of gr A."""
    gr = associated_graded(a)
    D = a.dim
    tuples = list(itertools.product(range(D), repeat=n + 1))
    filtered_dim = sum(1 for t in tuples if _tuple_weight(a, t) == i)
    per_degree = {}
    for w in gr.weights:
        per_degree[w] = per_degree.get(w, 0) + 1
    graded_dim = 0
    degrees_list = sorted(per_degree)
    for combo in itertools.product(degrees_list, repeat=n + 1):
        if sum(combo) == i:
            prod = 1
            for c in combo:
                prod *= per_degree[c]
            graded_dim += prod
    dims_equal = filtered_dim == graded_dim

    intertwines = True
    if n >= 1:
        d_fil = bar_differential(a, n)
        d_gr = bar_differential(gr, n)
        src_tuples = [t for t in tuples if _tuple_weight(a, t) == i]
        tgt_weights = {}
        for t in itertools.product(range(D), repeat=n):
            tgt_weights[_tuple_index(D, t)] = _tuple_weight(a, t)
        for t in src_tuples:
            col = _tuple_index(D, t)
            v_fil = d_fil.column(col)
            v_gr = d_gr.column(col)
            for row, (x, y) in enumerate(zip(v_fil, v_gr)):
                w_row = tgt_weights[row]
                if w_row < i and x:
                    intertwines = False   # filtration would be violated
                if w_row == i and x != y:
                    intertwines = False
                if w_row > i and y:
                    intertwines = False   # graded side must be weight-exact
    return {
        "n": n,
        "i": i,
        "filtered_dim": filtered_dim,
        "graded_dim": graded_dim,
        "dims_equal": dims_equal,
        "differentials_intertwine": intertwines,
        "pass": dims_equal and intertwines,
    }


def gr_hom_compare(a: FilteredAlgebra, m: FilteredModule, n: int, s: int) -> dict:
    """Check dim gr^s Hom_A(B_nA, M) = dim Hom^s_{grA}(gr B_nA, gr M)."""
    weights = cochain_weights(a, m, n)
    filtered_dim = sum(1 for w in weights if w == s)
    gr_a = associated_graded(a)
    gr_m = graded_module_of(m, gr_a)
    graded_dim = 0
    D = gr_a.dim
    for t in itertools.product(range(D), repeat=n):
        wt = _tuple_weight(gr_a, t)
        graded_dim += sum(1 for u in range(gr_m.dim) if gr_m.weights[u] == wt + s)
    return {
        "n": n,
        "s": s,
        "filtered_dim": filtered_dim,
        "graded_dim": graded_dim,
        "pass": filtered_dim == graded_dim,
    }
