"""Minimal graded free resolutions, Koszul detection, bigraded Ext, Kunneth.

Resolutions over a connected graded algebra are built degree by degree: at
each homological step the kernel of the previous differential is computed in
every internal degree up to d_max, and new generators are the canonical
complement of the submodule generated by lower-degree kernel elements.
Truncation is tracked honestly: a step is `complete` only when the window
provably contains every generator, and `terminated` means the tail is zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

from .algebra import (
    GradedAlgebra,
    GradedModule,
    tensor_graded,
    tensor_graded_modules,
    trivial_module,
    truncated_polynomial_algebra,
)
from .bar import coboundary, cochain_weights, ext_via_bar
from .linalg import FpMatrix, IncrementalSpan


class BoundExceeded(Exception):
    """Requested data lies beyond the computed (n_max, d_max) window."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InconclusiveTruncation(Exception):
    pass


AlgebraElement = tuple[int, ...]   # coordinate vector in the algebra basis


@dataclass
class FreeStep:
    """One free module P_n with the differential T_n into the previous step."""

    generator_degrees: list[int]
    entries: list[list[AlgebraElement]]   # rows: previous gens, cols: this step's gens
    complete: bool


@dataclass
class MinimalResolution:
    algebra: GradedAlgebra
    steps: list[FreeStep]
    n_max: int
    d_max: int
    terminated: bool
    certificate: dict = field(default_factory=dict)

    def betti(self, n: int) -> int:
        if n < len(self.steps):
            return len(self.steps[n].generator_degrees)
        if self.terminated:
            return 0
        raise BoundExceeded(f"homological degree {n} beyond computed bound", partial=self)

    def generator_degrees(self, n: int) -> list[int]:
        if n < len(self.steps):
            return list(self.steps[n].generator_degrees)
        if self.terminated:
            return []
        raise BoundExceeded(f"homological degree {n} beyond computed bound", partial=self)

    def computed_steps(self) -> int:
        return len(self.steps)


def _degree_basis(g: GradedAlgebra, gen_degrees: Sequence[int], e: int) -> list[tuple[int, int]]:
    """Basis of the degree-e piece of the free module with the given generators."""
    out = []
    for k, dk in enumerate(gen_degrees):
        for b in g.indices_in_degree(e - dk):
            out.append((k, b))
    return out


def _free_map_matrix(g: GradedAlgebra, tgt_degrees: Sequence[int],
                     src_degrees: Sequence[int],
                     entries: list[list[AlgebraElement]], e: int) -> FpMatrix:
    """Degree-e piece of a degree-0 map of free modules given by `entries`."""
    src_basis = _degree_basis(g, src_degrees, e)
    tgt_basis = _degree_basis(g, tgt_degrees, e)
    tgt_index = {pair: t for t, pair in enumerate(tgt_basis)}
    mat_entries = []
    for c, (k, b) in enumerate(src_basis):
        for r, dk_t in enumerate(tgt_degrees):
            elem = entries[r][k]
            for i, coef in enumerate(elem):
                if not coef:
                    continue
                for bb, c2 in g.mul_basis(i, b):
                    t = tgt_index.get((r, bb))
                    if t is None:
                        continue
                    mat_entries.append((t, c, coef * c2))
    return FpMatrix.from_entries(g.p, len(tgt_basis), len(src_basis), mat_entries)


def minimal_resolution(g: GradedAlgebra, n_max: int, d_max: int) -> MinimalResolution:
    """Minimal free resolution of k over a connected graded algebra.

    Generator selection is lowest-degree-first, then echelon order, which
    makes the output canonical. Entries of every differential lie in the
    augmentation ideal by construction.
    """
    if not g.is_connected():
        raise ValueError("minimal resolutions need a connected graded algebra")
    top = g.max_weight()
    steps = [FreeStep([0], [], True)]
    terminated = False
    # kernel of the augmentation P_0 = g -> k, degree by degree
    prev_degrees = [0]
    kernels: dict[int, FpMatrix] = {}
    for e in range(0, d_max + 1):
        basis = _degree_basis(g, prev_degrees, e)
        if e == 0:
            mat = FpMatrix.from_rows(g.p, [[g.aug[b] for (_k, b) in basis]])
        else:
            mat = FpMatrix.zeros(g.p, 1, len(basis))
        kernels[e] = mat.kernel_matrix()

    for n in range(1, n_max + 1):
        prev_degrees = steps[-1].generator_degrees
        gen_vectors: list[tuple[int, tuple[int, ...]]] = []   # (degree, coords in that degree)
        span_by_degree: dict[int, IncrementalSpan] = {}
        new_gen_count = 0
        min_deg = min(prev_degrees) if prev_degrees else 0
        for e in range(min_deg, d_max + 1):
            basis = _degree_basis(g, prev_degrees, e)
            if not basis:
                continue
            ker = kernels.get(e)
            if ker is None or ker.cols == 0:
                continue
            span = IncrementalSpan(g.p, len(basis))
            # submodule generated by lower-degree kernel elements, in degree e
            basis_index = {pair: t for t, pair in enumerate(basis)}
            for e2 in range(min_deg, e):
                ker2 = kernels.get(e2)
                if ker2 is None or ker2.cols == 0:
                    continue
                basis2 = _degree_basis(g, prev_degrees, e2)
                for j in range(ker2.cols):
                    v = ker2.column(j)
                    for i_alg in g.indices_in_degree(e - e2):
                        img = [0] * len(basis)
                        for t2, coord in enumerate(v):
                            if not coord:
                                continue
                            k_gen, b = basis2[t2]
                            for bb, c2 in g.mul_basis(i_alg, b):
                                t = basis_index.get((k_gen, bb))
                                if t is not None:
                                    img[t] = (img[t] + coord * c2) % g.p
                        if any(img):
                            span.add(img)
            for j in range(ker.cols):
                v = ker.column(j)
                if span.add(v):
                    gen_vectors.append((e, v))
                    new_gen_count += 1
        # assemble T_n entries from the chosen generator vectors
        gen_degrees = [deg for deg, _v in gen_vectors]
        entries: list[list[AlgebraElement]] = [
            [tuple([0] * g.dim) for _ in gen_vectors] for _ in prev_degrees]
        for c, (e, v) in enumerate(gen_vectors):
            basis = _degree_basis(g, prev_degrees, e)
            per_row: dict[int, list[int]] = {}
            for t, coord in enumerate(v):
                if not coord:
                    continue
                k_gen, b = basis[t]
                row = per_row.setdefault(k_gen, [0] * g.dim)
                row[b] = coord
            for k_gen, vec in per_row.items():
                entries[k_gen][c] = tuple(vec)
        # completeness: the window surely contains every generator when it
        # covers maxdeg(P_{n-1}) + maxdeg(g)
        prev_max = max(prev_degrees) if prev_degrees else 0
        complete = d_max >= prev_max + top
        steps.append(FreeStep(gen_degrees, entries, complete))
        if new_gen_count == 0:
            if complete:
                terminated = True
            break
        # kernel of T_n, degree by degree, for the next step
        kernels = {}
        for e in range(min(gen_degrees), d_max + 1):
            mat = _free_map_matrix(g, prev_degrees, gen_degrees, entries, e)
            kernels[e] = mat.kernel_matrix()
    res = MinimalResolution(g, steps, n_max, d_max, terminated)
    _check_minimality(res)
    return res


def _check_minimality(res: MinimalResolution):
    g = res.algebra
    for n, step in enumerate(res.steps):
        if n == 0:
            continue
        for row in step.entries:
            for elem in row:
                for i, coef in enumerate(elem):
                    if coef and g.weights[i] == 0:
                        raise AssertionError(
                            "differential entry escapes the augmentation ideal")


def verify_complex(res: MinimalResolution) -> bool:
    """T_{n-1} T_n = 0 for all computed consecutive steps."""
    g = res.algebra
    for n in range(2, len(res.steps)):
        a_step = res.steps[n - 1]
        b_step = res.steps[n]
        prev_degrees = res.steps[n - 2].generator_degrees
        for r in range(len(prev_degrees)):
            for c in range(len(b_step.generator_degrees)):
                acc = [0] * g.dim
                for m in range(len(a_step.generator_degrees)):
                    left = a_step.entries[r][m]
                    right = b_step.entries[m][c]
                    prod = g.multiply(left, right)
                    acc = [(x + y) % g.p for x, y in zip(acc, prod)]
                if any(acc):
                    return False
    return True


# -- Koszul detection ------------------------------------------------------


def is_koszul(res: MinimalResolution) -> bool:
    """True iff every computed generator sits in degree = homological index.

    Raises InconclusiveTruncation when a positive verdict would rely on
    degrees hidden by the d_max window.
    """
    for n, step in enumerate(res.steps):
        for d in step.generator_degrees:
            if d != n:
                return False
    incomplete = [n for n, step in enumerate(res.steps) if not step.complete]
    if incomplete and not res.certificate.get("exactness_verified_through"):
        raise InconclusiveTruncation(
            f"steps {incomplete} may hide generators beyond internal degree {res.d_max}")
    return True


def koszul_verdict(res: MinimalResolution) -> dict:
    try:
        value = is_koszul(res)
        return {"koszul": value, "conclusive": True}
    except InconclusiveTruncation as exc:
        return {"koszul": None, "conclusive": False, "reason": str(exc)}


# -- bigraded Ext ----------------------------------------------------------


@dataclass
class BigradedExt:
    """Dimensions of Ext^{i,j}: i the internal grade, i+j the homological degree."""

    table: dict[tuple[int, int], int]
    n_max: int

    def dim(self, i: int, j: int) -> int:
        return self.table.get((i, j), 0)

    def total(self, n: int) -> int:
        return sum(d for (i, j), d in self.table.items() if i + j == n)

    def support(self) -> list[tuple[int, int]]:
        return sorted(self.table)


def graded_ext(res: MinimalResolution, m: GradedModule) -> BigradedExt:
    """Ext^{i,j}(k, m) read off the minimal resolution: no differentials needed."""
    table: dict[tuple[int, int], int] = {}
    for n, step in enumerate(res.steps):
        for delta in step.generator_degrees:
            for w in m.weights:
                i = w - delta
                j = n - i
                table[(i, j)] = table.get((i, j), 0) + 1
    return BigradedExt(table, len(res.steps) - 1)


# -- the exact Koszul complex oracle ---------------------------------------


def koszul_complex(p: int, d: int, d_max: int) -> MinimalResolution:
    """The length-d Koszul resolution of k over the symmetric algebra on d
    degree-one variables, realized over the nilpotent truncation at d_max.

    Exactness is verified in every internal degree <= d_max, where the
    truncation agrees with the symmetric algebra; the complex terminates at
    homological degree d, which is what proves Betti numbers vanish beyond.
    """
    g = truncated_polynomial_algebra(p, d, d_max)
    var_index = []
    for t in range(d):
        expo = tuple(1 if s == t else 0 for s in range(d))
        lbl_matches = [i for i, w in enumerate(g.weights)
                       if w == 1 and g.basis[i] == (f"x{t}")]
        var_index.append(lbl_matches[0])
    subsets = {n: list(itertools.combinations(range(d), n)) for n in range(d + 1)}
    steps = [FreeStep([0], [], True)]
    for n in range(1, d + 1):
        prev = subsets[n - 1]
        cur = subsets[n]
        prev_pos = {s: t for t, s in enumerate(prev)}
        entries: list[list[AlgebraElement]] = [
            [tuple([0] * g.dim) for _ in cur] for _ in prev]
        for c, S in enumerate(cur):
            for pos, var in enumerate(S):
                rest = tuple(x for x in S if x != var)
                sign = (-1) ** pos % p
                vec = [0] * g.dim
                vec[var_index[var]] = sign
                entries[prev_pos[rest]][c] = tuple(vec)
        steps.append(FreeStep([n] * len(cur), entries, True))
    res = MinimalResolution(g, steps, d, d_max, terminated=True)
    if not verify_complex(res):
        raise AssertionError("Koszul complex fails d^2 = 0")
    _check_minimality(res)
    exact_through = _verify_exactness(res)
    res.certificate = {
        "d_squared_zero": True,
        "minimal": True,
        "exactness_verified_through": exact_through,
        "length": d,
    }
    return res


def _verify_exactness(res: MinimalResolution) -> int:
    """Verify the resolution is exact in each internal degree <= d_max."""
    g = res.algebra
    for e in range(0, res.d_max + 1):
        mats = []
        for n in range(1, len(res.steps)):
            prev_degrees = res.steps[n - 1].generator_degrees
            mats.append(_free_map_matrix(g, prev_degrees, res.steps[n].generator_degrees,
                                         res.steps[n].entries, e))
        # augmentation at the end: (P_0)_e -> k_e
        basis0 = _degree_basis(g, [0], e)
        aug_row = FpMatrix.from_rows(
            g.p, [[g.aug[b] for (_k, b) in basis0]]) if e == 0 else \
            FpMatrix.zeros(g.p, 1, len(basis0))
        if e == 0:
            if aug_row.rank() != 1:
                raise AssertionError("augmentation misses k in degree 0")
        ker0 = aug_row.kernel_matrix()
        im1_rank = mats[0].rank() if mats else 0
        if ker0.cols != im1_rank:
            raise AssertionError(f"resolution not exact at P_0 in degree {e}")
        for idx in range(len(mats)):
            ker = mats[idx].kernel_matrix()
            im_next = mats[idx + 1].rank() if idx + 1 < len(mats) else 0
            if ker.cols != im_next:
                raise AssertionError(
                    f"resolution not exact at P_{idx + 1} in degree {e}")
    return res.d_max


def koszul_dual_check(p: int, d: int, n_max: int, d_max: Optional[int] = None) -> dict:
    """dim Ext^n_{S(V)}(k,k) = C(d,n) for n <= n_max, zero beyond d.

    The minres side reads the verified Koszul complex; the independent route
    is the weight-strand bar computation on the nilpotent truncation, compared
    in the internal degrees where truncation and symmetric algebra agree.
    """
    if d < 1:
        raise ValueError("need at least one variable")
    window = d_max if d_max is not None else max(n_max, d) + 1
    res = koszul_complex(p, d, window)
    k = trivial_module(res.algebra, graded=True)
    ext = graded_ext(res, k)
    dims = [ext.total(n) if n <= d else res.betti(n) for n in range(n_max + 1)]
    expected = [comb(d, n) for n in range(n_max + 1)]
    cross = None
    if d <= 2:
        bar_n = min(n_max, 2)
        strands = ext_via_bar_weighted(res.algebra, k, bar_n + 1)
        cross = all(strands.get((-n, 2 * n), 0) == comb(d, n) for n in range(bar_n + 1))
    return {
        "d": d,
        "dims": dims,
        "expected": expected,
        "proven_zero_beyond": d,
        "terminated": res.terminated,
        "exactness_verified_through": res.certificate["exactness_verified_through"],
        "bar_cross_check": cross,
        "pass": dims == expected and res.terminated and (cross is not False),
    }


def ext_via_bar_weighted(g: GradedAlgebra, m: GradedModule, n_max: int,
                         cap: int = 1_000_000) -> dict[tuple[int, int], int]:
    """Bigraded Ext of a graded algebra via weight strands of the bar complex.

    The reduced cochain differential of a graded algebra preserves the
    cochain weight w_M(u) - w(t) exactly, so each strand computes its own
    cohomology; the strand of weight s in degree n contributes to
    Ext^{i,j} with i = s, j = n - s.
    """
    deltas = [coboundary(g, m, n, cap=cap) for n in range(n_max)]
    weights = [cochain_weights(g, m, n) for n in range(n_max + 1)]
    table: dict[tuple[int, int], int] = {}
    for n in range(n_max):
        for s in sorted(set(weights[n])):
            cols = [t for t, w in enumerate(weights[n]) if w == s]
            rows = [t for t, w in enumerate(weights[n + 1]) if w == s]
            dmat = deltas[n].take_cols(cols).take_rows(rows) if cols else None
            if dmat is None:
                continue
            ker_dim = len(cols) - dmat.rank()
            if n == 0:
                img_rank = 0
            else:
                prev_cols = [t for t, w in enumerate(weights[n - 1]) if w == s]
                if prev_cols:
                    pmat = deltas[n - 1].take_cols(prev_cols).take_rows(cols)
                    img_rank = pmat.rank()
                else:
                    img_rank = 0
            dim = ker_dim - img_rank
            if dim:
                table[(s, n - s)] = dim
    return table


# -- Kunneth ---------------------------------------------------------------


def kunneth_check(gA: GradedAlgebra, gB: GradedAlgebra,
                  mA: GradedModule, mB: GradedModule, n_max: int,
                  cap: int = 1_000_000) -> dict:
    """dim Ext^n over gA (x) gB equals the convolution of the factor dims."""
    t = tensor_graded(gA, gB)
    mt = tensor_graded_modules(t, mA, mB)
    lhs = ext_via_bar(t, mt, n_max + 1, cap=cap).dims()
    ext_a = ext_via_bar(gA, mA, n_max + 1, cap=cap).dims()
    ext_b = ext_via_bar(gB, mB, n_max + 1, cap=cap).dims()
    rhs = [sum(ext_a[x] * ext_b[n - x] for x in range(n + 1)) for n in range(n_max + 1)]
    return {
        "tensor_dims": lhs,
        "convolution_dims": rhs,
        "pass": lhs == rhs,
    }
