"""Finite-dimensional filtered augmented algebras over F_p and their modules.

Every filtration here is adapted: each Fil^i is spanned by basis vectors, so
a single weight per basis element carries the whole structure. Constructors
that receive a non-adapted filtration (subspace spans) echelonize it into an
adapted basis first; the descending echelon pass makes the output canonical.
"""

from __future__ import annotations

import itertools
import json
from typing import Optional, Sequence

from .linalg import FpMatrix, is_prime, subspace_intersection

Component = tuple[int, int]          # (basis index, coefficient)
Components = tuple[Component, ...]


class AxiomViolation(Exception):
    """A structural axiom failed; `which` names the first violated family."""

    def __init__(self, which: str, detail: str = ""):
        self.which = which
        super().__init__(f"{which}: {detail}" if detail else which)


class NotAPGroup(ValueError):
    pass


def _normalize_components(p: int, comps) -> Components:
    acc: dict[int, int] = {}
    for k, c in comps:
        acc[k] = (acc.get(k, 0) + c) % p
    return tuple(sorted((k, c) for k, c in acc.items() if c))


class FilteredAlgebra:
    """Basis-presented augmented algebra with an adapted decreasing filtration.

    Fil^i = span{ b_j : weights[j] >= i }.
    """

    def __init__(self, p: int, basis: Sequence[str], unit: int,
                 mul: dict[tuple[int, int], Components],
                 aug: Sequence[int], weights: Sequence[int],
                 check: bool = True):
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p
        self.basis = tuple(basis)
        self.unit = unit
        self.mul = {ij: _normalize_components(p, comps) for ij, comps in mul.items()
                    if _normalize_components(p, comps)}
        self.aug = tuple(v % p for v in aug)
        self.weights = tuple(int(w) for w in weights)
        if check:
            self.validate()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def mul_basis(self, i: int, j: int) -> Components:
        return self.mul.get((i, j), ())

    def multiply(self, u: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
        out = [0] * self.dim
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b:
                    continue
                for k, c in self.mul_basis(i, j):
                    out[k] = (out[k] + a * b * c) % self.p
        return tuple(out)

    def unit_vector(self) -> tuple[int, ...]:
        v = [0] * self.dim
        v[self.unit] = 1
        return tuple(v)

    def augment(self, u: Sequence[int]) -> int:
        return sum(a * e for a, e in zip(u, self.aug)) % self.p

    def vector_weight(self, u: Sequence[int]) -> Optional[int]:
        """Largest i with u in Fil^i, or None for the zero vector."""
        ws = [self.weights[i] for i, a in enumerate(u) if a % self.p]
        return min(ws) if ws else None

    def fil_indices(self, level: int) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w >= level]

    def max_weight(self) -> int:
        return max(self.weights) if self.weights else 0

    def left_mult_matrix(self, u: Sequence[int]) -> FpMatrix:
        """Matrix of x -> u*x on the basis."""
        entries = []
        for j in range(self.dim):
            for i, a in enumerate(u):
                if not a:
                    continue
                for k, c in self.mul_basis(i, j):
                    entries.append((k, j, a * c))
        return FpMatrix.from_entries(self.p, self.dim, self.dim, entries)

    # -- validation -----------------------------------------------------

    def validate(self):
        d = self.dim
        if not (0 <= self.unit < d):
            raise ValueError("unit index out of range")
        if len(self.aug) != d or len(self.weights) != d:
            raise ValueError("field lengths disagree with basis size")
        if any(w < 0 for w in self.weights):
            raise ValueError("filtration weights must be nonnegative")
        e = self.unit
        for i in range(d):
            if self.mul_basis(e, i) != ((i, 1),) or self.mul_basis(i, e) != ((i, 1),):
                raise AxiomViolation("associativity", f"unit law fails at basis {i}")
        for i in range(d):
            for j in range(d):
                left = self.mul_basis(i, j)
                for k in range(d):
                    lhs: dict[int, int] = {}
                    for l, c in left:
                        for m, c2 in self.mul_basis(l, k):
                            lhs[m] = (lhs.get(m, 0) + c * c2) % self.p
                    rhs: dict[int, int] = {}
                    for l, c in self.mul_basis(j, k):
                        for m, c2 in self.mul_basis(i, l):
                            rhs[m] = (rhs.get(m, 0) + c * c2) % self.p
                    lhs = {m: c for m, c in lhs.items() if c}
                    rhs = {m: c for m, c in rhs.items() if c}
                    if lhs != rhs:
                        raise AxiomViolation(
                            "associativity", f"(b{i}*b{j})*b{k} != b{i}*(b{j}*b{k})")
        if self.weights[e] != 0:
            raise AxiomViolation("filtration-multiplicativity", "unit must have weight 0")
        for (i, j), comps in self.mul.items():
            need = self.weights[i] + self.weights[j]
            for k, _ in comps:
                if self.weights[k] < need:
                    raise AxiomViolation(
                        "filtration-multiplicativity",
                        f"b{i}*b{j} has a component of weight {self.weights[k]} < {need}")
        if self.aug[e] != 1:
            raise AxiomViolation("augmentation", "aug(unit) != 1")
        for i in range(d):
            for j in range(d):
                val = sum(c * self.aug[k] for k, c in self.mul_basis(i, j)) % self.p
                if val != (self.aug[i] * self.aug[j]) % self.p:
                    raise AxiomViolation("augmentation", f"aug not multiplicative at ({i},{j})")
        for i in range(d):
            if self.weights[i] >= 1 and self.aug[i] != 0:
                raise AxiomViolation("augmentation", f"aug nonzero on Fil^1 at basis {i}")

    def same_structure(self, other: "FilteredAlgebra") -> bool:
        return (self.p == other.p and self.dim == other.dim
                and self.unit == other.unit and self.aug == other.aug
                and self.weights == other.weights and self.mul == other.mul)

    def __repr__(self):
        return f"{type(self).__name__}(p={self.p}, dim={self.dim})"


class GradedAlgebra(FilteredAlgebra):
    """Filtered algebra whose multiplication is weight-homogeneous."""

    def validate(self):
        super().validate()
        for (i, j), comps in self.mul.items():
            need = self.weights[i] + self.weights[j]
            for k, _ in comps:
                if self.weights[k] != need:
                    raise AxiomViolation(
                        "filtration-multiplicativity",
                        f"product b{i}*b{j} is not degree-additive")

    @property
    def degrees(self) -> tuple[int, ...]:
        return self.weights

    def is_connected(self) -> bool:
        return sum(1 for w in self.weights if w == 0) == 1

    def dim_in_degree(self, d: int) -> int:
        return sum(1 for w in self.weights if w == d)

    def indices_in_degree(self, d: int) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w == d]


def make_filtered_algebra(description: dict) -> FilteredAlgebra:
    """Build and validate a filtered algebra from its JSON-style description.

    An optional 'fil' entry ([[level, [vectors...]], ...]) presents the
    filtration by subspace spans; the basis is then re-adapted.
    """
    p = description["p"]
    basis = list(description["basis"])
    unit = description["unit"]
    mul = {(i, j): tuple((k, c) for k, c in comps)
           for i, j, comps in description["mul"]}
    aug = list(description["aug"])
    if "fil" in description:
        spans = {int(level): [tuple(v) for v in vecs] for level, vecs in description["fil"]}
        return _adapt_and_build(p, basis, unit, mul, aug, spans)
    weights = list(description["weights"])
    return FilteredAlgebra(p, basis, unit, mul, aug, weights)


def _adapt_and_build(p, basis, unit, mul, aug, spans) -> FilteredAlgebra:
    """Re-express an algebra on a basis adapted to subspace filtration spans."""
    dim = len(basis)
    levels = sorted(spans, reverse=True)
    chosen: list[tuple[int, ...]] = []
    chosen_weights: list[int] = []

    def try_add(vec, level):
        cand = FpMatrix.from_columns(p, chosen + [vec], rows=dim)
        if cand.rank() == len(chosen) + 1:
            chosen.append(tuple(x % p for x in vec))
            chosen_weights.append(level)

    for level in levels:
        if level <= 0:
            continue
        gen = FpMatrix.from_columns(p, spans[level], rows=dim)
        for col in gen.column_space_basis().transpose().to_lists():
            try_add(tuple(col), level)
    for i in range(dim):
        vec = tuple(1 if j == i else 0 for j in range(dim))
        try_add(vec, 0)
    if len(chosen) != dim:
        raise ValueError("filtration spans exceed the ambient space")
    order = sorted(range(dim), key=lambda t: (chosen_weights[t], t))
    P = FpMatrix.from_columns(p, [chosen[t] for t in order], rows=dim)
    weights = [chosen_weights[t] for t in order]
    return _change_of_basis(p, basis, unit, mul, aug, P, weights)


def _change_of_basis(p, basis, unit, mul, aug, P: FpMatrix, weights) -> FilteredAlgebra:
    dim = len(basis)
    cols = [P.column(j) for j in range(dim)]

    def old_multiply(u, v):
        out = [0] * dim
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b:
                    continue
                for k, c in mul.get((i, j), ()):
                    out[k] = (out[k] + a * b * c) % p
        return out

    products = [old_multiply(cols[i], cols[j]) for i in range(dim) for j in range(dim)]
    sols = P.solve_batch(products)
    new_mul: dict[tuple[int, int], Components] = {}
    t = 0
    for i in range(dim):
        for j in range(dim):
            x = sols[t]
            t += 1
            if x is None:
                raise ValueError("change of basis is singular")
            comps = tuple((k, c) for k, c in enumerate(x) if c)
            if comps:
                new_mul[(i, j)] = comps
    new_aug = [sum(a * e for a, e in zip(cols[j], aug)) % p for j in range(dim)]
    unit_vec = [1 if i == unit else 0 for i in range(dim)]
    unit_sol = P.solve(unit_vec)
    if unit_sol is None:
        raise ValueError("unit not representable in adapted basis")
    unit_hits = [k for k, c in enumerate(unit_sol) if c]
    new_unit = None
    for k in unit_hits:
        if unit_sol[k] == 1 and len(unit_hits) == 1:
            new_unit = k
    if new_unit is None:
        # force the unit to be an actual basis vector in the weight-0 slot
        zero_slots = [k for k, w in enumerate(weights) if w == 0]
        if len(zero_slots) != 1:
            raise ValueError("weight-0 part is not one-dimensional; cannot place unit")
        k0 = zero_slots[0]
        new_cols = list(cols)
        new_cols[k0] = tuple(unit_vec)
        P2 = FpMatrix.from_columns(p, new_cols, rows=dim)
        if P2.rank() != dim:
            raise ValueError("unit substitution degenerates the basis")
        return _change_of_basis(p, basis, unit, mul, aug, P2, weights)
    labels = [f"b{k}" for k in range(dim)]
    labels[new_unit] = "1"
    out = FilteredAlgebra(p, labels, new_unit, new_mul, new_aug, weights)
    out._adapted_columns = P
    return out


def associated_graded(a: FilteredAlgebra) -> GradedAlgebra:
    """Associated graded algebra: the weight-homogeneous part of the constants."""
    gr_mul: dict[tuple[int, int], Components] = {}
    for (i, j), comps in a.mul.items():
        need = a.weights[i] + a.weights[j]
        kept = tuple((k, c) for k, c in comps if a.weights[k] == need)
        if kept:
            gr_mul[(i, j)] = kept
    return GradedAlgebra(a.p, a.basis, a.unit, gr_mul, a.aug, a.weights)


class FilteredModule:
    """Left module over a FilteredAlgebra with an adapted Z-indexed filtration."""

    def __init__(self, algebra: FilteredAlgebra, basis: Sequence[str],
                 action: dict[tuple[int, int], Components],
                 weights: Sequence[int], check: bool = True):
        self.algebra = algebra
        self.basis = tuple(basis)
        self.action = {ij: _normalize_components(algebra.p, comps)
                       for ij, comps in action.items()
                       if _normalize_components(algebra.p, comps)}
        self.weights = tuple(int(w) for w in weights)
        if check:
            self.validate()

    @property
    def p(self) -> int:
        return self.algebra.p

    @property
    def dim(self) -> int:
        return len(self.basis)

    def act_basis(self, i: int, u: int) -> Components:
        return self.action.get((i, u), ())

    def act(self, a_vec: Sequence[int], m_vec: Sequence[int]) -> tuple[int, ...]:
        out = [0] * self.dim
        for i, a in enumerate(a_vec):
            if not a:
                continue
            for u, b in enumerate(m_vec):
                if not b:
                    continue
                for k, c in self.act_basis(i, u):
                    out[k] = (out[k] + a * b * c) % self.p
        return tuple(out)

    def mu(self) -> int:
        """Smallest i with Fil^i M = 0."""
        return max(self.weights) + 1 if self.weights else 0

    def nu(self) -> int:
        """Largest i with Fil^i M = M."""
        return min(self.weights) if self.weights else 0

    def validate(self):
        A = self.algebra
        if len(self.weights) != self.dim:
            raise ValueError("weights length disagrees with basis size")
        e = A.unit
        for u in range(self.dim):
            if self.act_basis(e, u) != ((u, 1),):
                raise AxiomViolation("associativity", f"unit does not fix module basis {u}")
        for i in range(A.dim):
            for j in range(A.dim):
                for u in range(self.dim):
                    lhs: dict[int, int] = {}
                    for l, c in A.mul_basis(i, j):
                        for k, c2 in self.act_basis(l, u):
                            lhs[k] = (lhs.get(k, 0) + c * c2) % self.p
                    rhs: dict[int, int] = {}
                    for l, c in self.act_basis(j, u):
                        for k, c2 in self.act_basis(i, l):
                            rhs[k] = (rhs.get(k, 0) + c * c2) % self.p
                    lhs = {k: c for k, c in lhs.items() if c}
                    rhs = {k: c for k, c in rhs.items() if c}
                    if lhs != rhs:
                        raise AxiomViolation(
                            "associativity", f"action not associative at ({i},{j},m{u})")
        for (i, u), comps in self.action.items():
            need = A.weights[i] + self.weights[u]
            for k, _ in comps:
                if self.weights[k] < need:
                    raise AxiomViolation(
                        "filtration-multiplicativity",
                        f"Fil^{A.weights[i]}A * Fil^{self.weights[u]}M leaks at b{i}*m{u}")

    def same_structure(self, other: "FilteredModule") -> bool:
        return (self.p == other.p and self.dim == other.dim
                and self.weights == other.weights and self.action == other.action)


class GradedModule(FilteredModule):
    def validate(self):
        super().validate()
        A = self.algebra
        for (i, u), comps in self.action.items():
            need = A.weights[i] + self.weights[u]
            for k, _ in comps:
                if self.weights[k] != need:
                    raise AxiomViolation(
                        "filtration-multiplicativity", "action is not degree-additive")


def amplitude(m: FilteredModule) -> int:
    """Length mu - nu of the module filtration."""
    return m.mu() - m.nu()


def trivial_module(a: FilteredAlgebra, weight: int = 0, graded: bool = False) -> FilteredModule:
    """The augmentation module k placed in a single filtration weight."""
    action = {(i, 0): ((0, a.aug[i]),) for i in range(a.dim) if a.aug[i]}
    cls = GradedModule if graded or isinstance(a, GradedAlgebra) else FilteredModule
    return cls(a, ("m0",), action, (weight,))


def graded_module_of(m: FilteredModule, gr_algebra: Optional[GradedAlgebra] = None) -> GradedModule:
    """Associated graded module over gr(A): weight-homogeneous action components."""
    gr_a = gr_algebra if gr_algebra is not None else associated_graded(m.algebra)
    gr_act: dict[tuple[int, int], Components] = {}
    for (i, u), comps in m.action.items():
        need = m.algebra.weights[i] + m.weights[u]
        kept = tuple((k, c) for k, c in comps if m.weights[k] == need)
        if kept:
            gr_act[(i, u)] = kept
    return GradedModule(gr_a, m.basis, gr_act, m.weights)


def free_module(a: FilteredAlgebra, weight_shift: int = 0) -> FilteredModule:
    """A itself as a left module over A (optionally weight-shifted)."""
    action = dict(a.mul)
    cls = GradedModule if isinstance(a, GradedAlgebra) else FilteredModule
    return cls(a, a.basis, action, tuple(w + weight_shift for w in a.weights))


# -- tensor products ---------------------------------------------------


def tensor_graded(a: GradedAlgebra, b: GradedAlgebra) -> GradedAlgebra:
    """Tensor product of graded algebras on the pair basis (degrees add)."""
    if a.p != b.p:
        raise ValueError("mixed characteristics in tensor product")
    db = b.dim

    def idx(i, j):
        return i * db + j

    basis = [f"{x}*{y}" for x in a.basis for y in b.basis]
    weights = [wa + wb for wa in a.weights for wb in b.weights]
    aug = [(ea * eb) % a.p for ea in a.aug for eb in b.aug]
    mul: dict[tuple[int, int], Components] = {}
    for (i1, i2), ca in a.mul.items():
        for (j1, j2), cb in b.mul.items():
            comps = []
            for k1, c1 in ca:
                for k2, c2 in cb:
                    comps.append((idx(k1, k2), c1 * c2))
            mul[(idx(i1, j1), idx(i2, j2))] = _normalize_components(a.p, comps)
    return GradedAlgebra(a.p, basis, idx(a.unit, b.unit), mul, aug, weights, check=False)


def tensor_graded_modules(t: GradedAlgebra, ma: GradedModule, mb: GradedModule) -> GradedModule:
    """External tensor of graded modules over the prebuilt tensor algebra t."""
    da, dbm = ma.algebra.dim, mb.dim
    db_alg = mb.algebra.dim

    def aidx(i, j):
        return i * db_alg + j

    def midx(u, v):
        return u * dbm + v

    basis = [f"{x}*{y}" for x in ma.basis for y in mb.basis]
    weights = [wa + wb for wa in ma.weights for wb in mb.weights]
    action: dict[tuple[int, int], Components] = {}
    for (i, u), ca in ma.action.items():
        for (j, v), cb in mb.action.items():
            comps = []
            for k1, c1 in ca:
                for k2, c2 in cb:
                    comps.append((midx(k1, k2), c1 * c2))
            action[(aidx(i, j), midx(u, v))] = _normalize_components(t.p, comps)
    return GradedModule(t, basis, action, weights, check=False)


# -- group algebras ----------------------------------------------------


def group_algebra(table: Sequence[Sequence[int]], p: int) -> FilteredAlgebra:
    """F_p[G] for a finite p-group, filtered by augmentation-ideal powers.

    The returned basis is adapted to the filtration (echelonized descending),
    with the group identity as basis vector 0.
    """
    n = len(table)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    m = n
    while m % p == 0:
        m //= p
    if m != 1:
        raise NotAPGroup(f"group order {n} is not a power of {p}")
    ident = None
    for e in range(n):
        if all(table[e][j] == j and table[j][e] == j for j in range(n)):
            ident = e
            break
    if ident is None:
        raise ValueError("multiplication table has no identity")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if table[table[i][j]][k] != table[i][table[j][k]]:
                    raise ValueError("multiplication table is not associative")

    # augmentation-ideal powers in the group-element basis
    aug_gens = []
    for g in range(n):
        if g == ident:
            continue
        v = [0] * n
        v[g] = 1
        v[ident] = -1 % p
        aug_gens.append(tuple(v))
    spans: dict[int, list[tuple[int, ...]]] = {}
    current = [tuple(v) for v in aug_gens]
    level = 1
    while current:
        spans[level] = current
        nxt = []
        cur_mat = FpMatrix.from_columns(p, current, rows=n)
        cur_basis = [tuple(c) for c in cur_mat.column_space_basis().transpose().to_lists()]
        for w in cur_basis:
            for g_vec in aug_gens:
                prod = [0] * n
                for i, a in enumerate(g_vec):
                    if not a:
                        continue
                    for j, b in enumerate(w):
                        if b:
                            k = table[i][j]
                            prod[k] = (prod[k] + a * b) % p
                if any(prod):
                    nxt.append(tuple(prod))
        if nxt:
            nxt_mat = FpMatrix.from_columns(p, nxt, rows=n)
            if nxt_mat.rank() == 0:
                nxt = []
        current = nxt
        level += 1
        if level > n + 1:
            raise ValueError("augmentation ideal fails to be nilpotent")

    mul = {}
    for i in range(n):
        for j in range(n):
            mul[(i, j)] = ((table[i][j], 1),)
    aug = [1] * n
    return _adapt_and_build(p, [f"g{i}" for i in range(n)], ident, mul, aug, spans)


# -- morphisms and subalgebras ------------------------------------------


class MorphismValidationError(ValueError):
    pass


class AlgebraMorphism:
    """Unital augmented filtration-preserving map f: source -> target.

    `matrix` columns are the images of the source basis in target coordinates.
    """

    def __init__(self, source: FilteredAlgebra, target: FilteredAlgebra,
                 matrix: FpMatrix, check: bool = True):
        self.source = source
        self.target = target
        self.matrix = matrix
        if check:
            self.validate()

    def validate(self):
        src, tgt, F = self.source, self.target, self.matrix
        if src.p != tgt.p:
            raise MorphismValidationError("mixed characteristics")
        if F.rows != tgt.dim or F.cols != src.dim:
            raise MorphismValidationError("matrix shape does not match algebras")
        if list(F.column(src.unit)) != list(tgt.unit_vector()):
            raise MorphismValidationError("morphism is not unital")
        for j in range(src.dim):
            col = F.column(j)
            if tgt.augment(col) != src.aug[j]:
                raise MorphismValidationError(f"augmentation not preserved at basis {j}")
            for k, v in enumerate(col):
                if v and tgt.weights[k] < src.weights[j]:
                    raise MorphismValidationError(
                        f"filtration not preserved: image of b{j} leaves Fil^{src.weights[j]}")
        for i in range(src.dim):
            fi = F.column(i)
            for j in range(src.dim):
                fj = F.column(j)
                lhs = tgt.multiply(fi, fj)
                rhs = [0] * tgt.dim
                for k, c in src.mul_basis(i, j):
                    for t, v in enumerate(F.column(k)):
                        rhs[t] = (rhs[t] + c * v) % src.p
                if list(lhs) != rhs:
                    raise MorphismValidationError(f"not multiplicative at ({i},{j})")

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        return self.matrix.mat_vec(vec)

    def compose(self, inner: "AlgebraMorphism") -> "AlgebraMorphism":
        """self o inner (inner.target must be self.source)."""
        if inner.target is not self.source and not inner.target.same_structure(self.source):
            raise MorphismValidationError("composition mismatch")
        return AlgebraMorphism(inner.source, self.target,
                               self.matrix @ inner.matrix, check=False)

    def gr(self) -> "AlgebraMorphism":
        """Induced morphism of associated graded algebras (degree-preserving part)."""
        src_gr = associated_graded(self.source)
        tgt_gr = associated_graded(self.target)
        entries = []
        for j in range(self.source.dim):
            wj = self.source.weights[j]
            for k, v in enumerate(self.matrix.column(j)):
                if v and self.target.weights[k] == wj:
                    entries.append((k, j, v))
        m = FpMatrix.from_entries(self.source.p, self.target.dim, self.source.dim, entries)
        return AlgebraMorphism(src_gr, tgt_gr, m, check=False)

    @classmethod
    def identity(cls, a: FilteredAlgebra) -> "AlgebraMorphism":
        return cls(a, a, FpMatrix.identity(a.p, a.dim), check=False)


def restrict_module(f: AlgebraMorphism, m: FilteredModule) -> FilteredModule:
    """View a module over f's target as a module over f's source."""
    if m.algebra is not f.target and not m.algebra.same_structure(f.target):
        raise MorphismValidationError("module is not over the morphism target")
    action: dict[tuple[int, int], Components] = {}
    for j in range(f.source.dim):
        img = f.matrix.column(j)
        for u in range(m.dim):
            acc: dict[int, int] = {}
            for i, a in enumerate(img):
                if not a:
                    continue
                for k, c in m.act_basis(i, u):
                    acc[k] = (acc.get(k, 0) + a * c) % m.p
            comps = tuple(sorted((k, c) for k, c in acc.items() if c))
            if comps:
                action[(j, u)] = comps
    cls = GradedModule if isinstance(m, GradedModule) and isinstance(f.source, GradedAlgebra) \
        else FilteredModule
    return cls(f.source, m.basis, action, m.weights, check=False)


def filtered_subalgebra(a: FilteredAlgebra,
                        span: Sequence[Sequence[int]]) -> tuple[FilteredAlgebra, AlgebraMorphism]:
    """Subalgebra spanned by the given vectors, carrying the inherited filtration.

    The sub-basis is echelon-adapted to Fil^i A ∩ S (descending), so the
    inherited weights are exact; the returned morphism is the inclusion.
    """
    p, dim = a.p, a.dim
    S = FpMatrix.from_columns(p, [tuple(v) for v in span], rows=dim).column_space_basis()
    unit_vec = a.unit_vector()
    if S.solve(unit_vec) is None:
        S = S.hstack(FpMatrix.from_columns(p, [unit_vec], rows=dim)).column_space_basis()
    chosen: list[tuple[int, ...]] = []
    chosen_weights: list[int] = []
    for level in range(a.max_weight(), 0, -1):
        idx = a.fil_indices(level)
        if not idx:
            continue
        coord = FpMatrix.from_entries(p, dim, len(idx), [(i, t, 1) for t, i in enumerate(idx)])
        inter = subspace_intersection(S, coord)
        for col in inter.transpose().to_lists():
            cand = FpMatrix.from_columns(p, chosen + [tuple(col)], rows=dim)
            if cand.rank() == len(chosen) + 1:
                chosen.append(tuple(col))
                chosen_weights.append(level)
    for col in S.transpose().to_lists():
        cand = FpMatrix.from_columns(p, chosen + [tuple(col)], rows=dim)
        if cand.rank() == len(chosen) + 1:
            chosen.append(tuple(col))
            chosen_weights.append(0)
    order = sorted(range(len(chosen)), key=lambda t: (chosen_weights[t], t))
    cols = [chosen[t] for t in order]
    weights = [chosen_weights[t] for t in order]
    # place the unit as an explicit basis vector in a weight-0 slot
    zero_slots = [k for k, w in enumerate(weights) if w == 0]
    if not zero_slots:
        raise ValueError("subalgebra misses the unit")
    P = FpMatrix.from_columns(p, cols, rows=dim)
    coords = P.solve(unit_vec)
    if coords is None:
        raise ValueError("unit escapes the subalgebra span")
    pivot_slot = None
    for k in zero_slots:
        if coords[k]:
            pivot_slot = k
            break
    if pivot_slot is None:
        raise ValueError("unit lies in Fil^1 of the subalgebra")
    cols[pivot_slot] = tuple(unit_vec)
    P = FpMatrix.from_columns(p, cols, rows=dim)
    if P.rank() != len(cols):
        raise ValueError("unit substitution degenerates the sub-basis")
    sub_dim = len(cols)
    products = [list(a.multiply(cols[i], cols[j])) for i in range(sub_dim) for j in range(sub_dim)]
    sols = P.solve_batch(products)
    mul: dict[tuple[int, int], Components] = {}
    t = 0
    for i in range(sub_dim):
        for j in range(sub_dim):
            x = sols[t]
            t += 1
            if x is None:
                raise ValueError("span is not multiplicatively closed")
            comps = tuple((k, c) for k, c in enumerate(x) if c)
            if comps:
                mul[(i, j)] = comps
    aug = [a.augment(c) for c in cols]
    labels = [f"s{k}" for k in range(sub_dim)]
    labels[pivot_slot] = "1"
    sub = FilteredAlgebra(p, labels, pivot_slot, mul, aug, weights)
    inc = AlgebraMorphism(sub, a, P, check=False)
    return sub, inc


# -- JSON round trip -----------------------------------------------------


def algebra_to_json(a: FilteredAlgebra) -> str:
    doc = {
        "p": a.p,
        "basis": list(a.basis),
        "unit": a.unit,
        "mul": [[i, j, [[k, c] for k, c in comps]]
                for (i, j), comps in sorted(a.mul.items())],
        "aug": list(a.aug),
        "weights": list(a.weights),
        "graded": isinstance(a, GradedAlgebra),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def algebra_from_json(text: str) -> FilteredAlgebra:
    doc = json.loads(text)
    cls = GradedAlgebra if doc.get("graded") else FilteredAlgebra
    mul = {(i, j): tuple((k, c) for k, c in comps) for i, j, comps in doc["mul"]}
    return cls(doc["p"], doc["basis"], doc["unit"], mul, doc["aug"], doc["weights"])


def module_to_json(m: FilteredModule) -> str:
    doc = {
        "basis": list(m.basis),
        "act": [[i, u, [[k, c] for k, c in comps]]
                for (i, u), comps in sorted(m.action.items())],
        "weights": list(m.weights),
        "graded": isinstance(m, GradedModule),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def module_from_json(text: str, algebra: FilteredAlgebra) -> FilteredModule:
    doc = json.loads(text)
    cls = GradedModule if doc.get("graded") else FilteredModule
    act = {(i, u): tuple((k, c) for k, c in comps) for i, u, comps in doc["act"]}
    return cls(algebra, doc["basis"], act, doc["weights"])


# -- stock instances ------------------------------------------------------


def cyclic_group_table(n: int) -> list[list[int]]:
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def product_group_table(ta: Sequence[Sequence[int]], tb: Sequence[Sequence[int]]) -> list[list[int]]:
    na, nb = len(ta), len(tb)

    def idx(i, j):
        return i * nb + j

    out = [[0] * (na * nb) for _ in range(na * nb)]
    for i1 in range(na):
        for j1 in range(nb):
            for i2 in range(na):
                for j2 in range(nb):
                    out[idx(i1, j1)][idx(i2, j2)] = idx(ta[i1][i2], tb[j1][j2])
    return out


def truncated_monomial_algebra(p: int, var_degrees: Sequence[int], d_max: int,
                               extra_relations: Sequence[Sequence[int]] = ()) -> GradedAlgebra:
    """F_p[x_1..x_v]/(monomials of degree > d_max, plus listed exponent cutoffs).

    extra_relations lists per-variable exponent bounds as exponent vectors
    declared zero, e.g. [(3, 0)] kills x_1^3. Degrees of variables may vary.
    """
    v = len(var_degrees)
    killed = [tuple(r) for r in extra_relations]

    def dead(expo):
        if sum(e * d for e, d in zip(expo, var_degrees)) > d_max:
            return True
        return any(all(expo[t] >= r[t] for t in range(v)) for r in killed)

    monomials = []
    bound = d_max + 1
    for expo in itertools.product(range(bound + 1), repeat=v):
        if not dead(expo):
            monomials.append(expo)
    monomials.sort(key=lambda e: (sum(x * d for x, d in zip(e, var_degrees)), e))
    index = {e: t for t, e in enumerate(monomials)}
    mul: dict[tuple[int, int], Components] = {}
    for i, ei in enumerate(monomials):
        for j, ej in enumerate(monomials):
            s = tuple(a + b for a, b in zip(ei, ej))
            if not dead(s) and s in index:
                mul[(i, j)] = ((index[s], 1),)
    weights = [sum(x * d for x, d in zip(e, var_degrees)) for e in monomials]
    aug = [1 if all(x == 0 for x in e) else 0 for e in monomials]

    def label(e):
        if all(x == 0 for x in e):
            return "1"
        return "*".join(f"x{t}^{x}" if x > 1 else f"x{t}"
                        for t, x in enumerate(e) if x)

    return GradedAlgebra(p, [label(e) for e in monomials], index[(0,) * v],
                         mul, aug, weights, check=False)


def truncated_polynomial_algebra(p: int, num_vars: int, d_max: int) -> GradedAlgebra:
    """Nilpotent truncation of the symmetric algebra on num_vars degree-1 variables."""
    return truncated_monomial_algebra(p, [1] * num_vars, d_max)


def group_algebra_chain(table: Sequence[Sequence[int]], p: int,
                        depth: int) -> tuple[list[FilteredAlgebra], list[AlgebraMorphism]]:
    """Chain F_p[G] ⊇ F_p[G^p] ⊇ ... ⊇ F_p[G^{p^depth}] with inherited filtrations.

    Each member carries the filtration cut out of F_p[G]'s augmentation-power
    filtration (Fil^i of a member = member ∩ Fil^i F_p[G]), and the returned
    morphisms are the inclusion maps link by link. Requires an abelian group
    so that p-th powers form subgroups.
    """
    n = len(table)
    for i in range(n):
        for j in range(i):
            if table[i][j] != table[j][i]:
                raise ValueError("power chains need an abelian group")
    ambient, P = _group_algebra_with_basis(table, p)
    ident = next(h for h in range(n) if all(table[h][j] == j and table[j][h] == j
                                            for j in range(n)))

    def power(g: int, e: int) -> int:
        acc = ident
        for _ in range(e):
            acc = table[acc][g]
        return acc
    algebras = [ambient]
    inclusions_into_ambient = [AlgebraMorphism.identity(ambient)]
    sub_cols: list[FpMatrix] = [FpMatrix.identity(p, n)]
    q = 1
    for _ in range(depth):
        q *= p
        elements = sorted({power(g, q) for g in range(n)})
        span_group_coords = []
        for h in elements:
            v = [0] * n
            v[h] = 1
            span_group_coords.append(tuple(v))
        span_adapted = [P.solve(v) for v in span_group_coords]
        if any(s is None for s in span_adapted):
            raise ValueError("adapted basis failed to span the group algebra")
        sub, inc = filtered_subalgebra(ambient, [list(s) for s in span_adapted])
        algebras.append(sub)
        inclusions_into_ambient.append(inc)
        sub_cols.append(inc.matrix)
    links: list[AlgebraMorphism] = []
    for m in range(depth):
        big, small = algebras[m], algebras[m + 1]
        cols_small = [sub_cols[m + 1].column(j) for j in range(small.dim)]
        sols = sub_cols[m].solve_batch(cols_small)
        if any(s is None for s in sols):
            raise ValueError("chain member is not contained in its predecessor")
        mat = FpMatrix.from_columns(p, [list(s) for s in sols], rows=big.dim)
        links.append(AlgebraMorphism(small, big, mat, check=False))
    return algebras, links


def _group_algebra_with_basis(table: Sequence[Sequence[int]], p: int
                              ) -> tuple[FilteredAlgebra, FpMatrix]:
    """group_algebra plus the adapted-basis columns in group-element coordinates."""
    a = group_algebra(table, p)
    return a, a._adapted_columns  # set by _adapt_and_build


def elementary_abelian_table(p: int, rank: int) -> list[list[int]]:
    t = cyclic_group_table(p)
    for _ in range(rank - 1):
        t = product_group_table(t, cyclic_group_table(p))
    return t
