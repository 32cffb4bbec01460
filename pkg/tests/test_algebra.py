"""Filtered/graded algebras: axioms, gr, group algebras, tensor, JSON."""

import pytest

from grext.algebra import (
    AlgebraMorphism,
    AxiomViolation,
    FilteredAlgebra,
    GradedAlgebra,
    NotAPGroup,
    algebra_from_json,
    algebra_to_json,
    amplitude,
    associated_graded,
    cyclic_group_table,
    elementary_abelian_table,
    filtered_subalgebra,
    group_algebra,
    group_algebra_chain,
    make_filtered_algebra,
    module_from_json,
    module_to_json,
    product_group_table,
    restrict_module,
    tensor_graded,
    trivial_module,
    truncated_polynomial_algebra,
    FilteredModule,
    GradedModule,
)


def trunc_poly_description(p, k, aug_x=0):
    """F_p[x]/(x^k) with w(x^i) = i."""
    mul = [[i, j, [[i + j, 1]]] for i in range(k) for j in range(k) if i + j < k]
    return {
        "p": p,
        "basis": ["1"] + [f"x^{i}" for i in range(1, k)],
        "unit": 0,
        "mul": mul,
        "aug": [1] + [aug_x] * (k - 1),
        "weights": list(range(k)),
    }


def test_make_filtered_algebra_accepts_truncated_poly():
    a = make_filtered_algebra(trunc_poly_description(3, 3))
    assert a.dim == 3
    assert a.weights == (0, 1, 2)


def test_make_filtered_algebra_rejects_bad_augmentation():
    with pytest.raises(AxiomViolation) as info:
        make_filtered_algebra(trunc_poly_description(3, 3, aug_x=1))
    assert info.value.which == "augmentation"


def test_group_algebra_z3_adapted_weights():
    a = group_algebra(cyclic_group_table(3), 3)
    assert a.dim == 3
    assert a.weights == (0, 1, 2)
    assert a.unit == 0
    gr = associated_graded(a)
    model = GradedAlgebra(3, ["1", "x", "x^2"], 0,
                          {(0, 0): ((0, 1),), (0, 1): ((1, 1),), (1, 0): ((1, 1),),
                           (0, 2): ((2, 1),), (2, 0): ((2, 1),), (1, 1): ((2, 1),)},
                          [1, 0, 0], [0, 1, 2])
    assert gr.same_structure(model)


def test_group_algebra_z9_weights():
    a = group_algebra(cyclic_group_table(9), 3)
    assert a.dim == 9
    assert a.weights == tuple(range(9))
    gr = associated_graded(a)
    # gr is F_3[x]/(x^9): product of weight-i and weight-j vector is weight i+j
    for (i, j), comps in gr.mul.items():
        for k, _ in comps:
            assert gr.weights[k] == gr.weights[i] + gr.weights[j]
            assert len(comps) == 1


def test_group_algebra_trivial_group():
    a = group_algebra([[0]], 5)
    assert a.dim == 1 and a.weights == (0,)


def test_group_algebra_rejects_non_p_group():
    with pytest.raises(NotAPGroup):
        group_algebra(cyclic_group_table(6), 3)


def test_gr_preserves_dimension_and_weights():
    for table, p in [(cyclic_group_table(9), 3),
                     (product_group_table(cyclic_group_table(3), cyclic_group_table(3)), 3),
                     (cyclic_group_table(4), 2)]:
        a = group_algebra(table, p)
        gr = associated_graded(a)
        assert gr.dim == a.dim
        assert sorted(gr.weights) == sorted(a.weights)


def test_gr_idempotent_on_graded():
    g = truncated_polynomial_algebra(3, 2, 3)
    again = associated_graded(g)
    assert again.same_structure(g)


def test_gr_of_z3xz3_is_tensor_square():
    table = product_group_table(cyclic_group_table(3), cyclic_group_table(3))
    a = group_algebra(table, 3)
    gr = associated_graded(a)
    x = make_filtered_algebra(trunc_poly_description(3, 3))
    t = tensor_graded(associated_graded(x), associated_graded(x))
    assert sorted(gr.weights) == sorted(t.weights)
    # same graded dimension profile and both are commutative monomial-type algebras
    assert gr.dim == t.dim == 9


def test_tensor_with_unit_algebra():
    g = truncated_polynomial_algebra(3, 1, 2)
    k = truncated_polynomial_algebra(3, 1, 0)  # just F_p
    assert k.dim == 1
    t = tensor_graded(g, k)
    assert t.dim == g.dim
    assert sorted(t.weights) == sorted(g.weights)


def test_tensor_dimension_and_degrees():
    a = truncated_polynomial_algebra(5, 1, 1)  # F_5[x]/(x^2)
    t = tensor_graded(a, a)
    assert t.dim == 4
    assert sorted(t.weights) == [0, 1, 1, 2]
    t.validate()


def test_amplitude_examples():
    a = group_algebra(cyclic_group_table(3), 3)
    k = trivial_module(a)
    assert amplitude(k) == 1
    shifted = FilteredModule(a, ("m0",), {(i, 0): ((0, a.aug[i]),) for i in range(a.dim)
                                          if a.aug[i]}, (3,))
    assert amplitude(shifted) == 1
    three = FilteredModule(a, ("m0", "m1", "m2"),
                           {(0, 0): ((0, 1),), (0, 1): ((1, 1),), (0, 2): ((2, 1),),
                            (1, 0): ((1, 1),), (1, 1): ((2, 1),),
                            (2, 0): ((2, 1),)},
                           (0, 1, 2))
    assert amplitude(three) == 3


def test_module_validation_catches_filtration_leak():
    a = group_algebra(cyclic_group_table(3), 3)
    with pytest.raises(AxiomViolation):
        FilteredModule(a, ("m0", "m1"),
                       {(0, 0): ((0, 1),), (0, 1): ((1, 1),),
                        (1, 0): ((1, 1),), (1, 1): ((0, 1),)},  # weight drops
                       (0, 1))


def test_json_round_trip_bit_exact():
    a = group_algebra(cyclic_group_table(9), 3)
    s = algebra_to_json(a)
    b = algebra_from_json(s)
    assert algebra_to_json(b) == s
    assert b.same_structure(a)
    m = trivial_module(a)
    sm = module_to_json(m)
    m2 = module_from_json(sm, a)
    assert module_to_json(m2) == sm


def test_filtered_subalgebra_inherits_weights():
    a = group_algebra(cyclic_group_table(9), 3)
    # span of F_3[3Z/9] inside F_3[Z/9]: powers (g-1)^{3j} live at weights 0,3,6
    chain_algebras, links = group_algebra_chain(cyclic_group_table(9), 3, 1)
    sub = chain_algebras[1]
    assert sub.dim == 3
    assert sub.weights == (0, 3, 6)
    inc = links[0]
    inc.validate()


def test_group_algebra_chain_z27():
    algebras, links = group_algebra_chain(cyclic_group_table(27), 3, 3)
    assert [a.dim for a in algebras] == [27, 9, 3, 1]
    assert algebras[1].weights == (0, 3, 6, 9, 12, 15, 18, 21, 24)
    assert algebras[2].weights == (0, 9, 18)
    for f in links:
        f.validate()
    # gr of the first link kills the positive part in matching degrees only
    grf = links[0].gr()
    assert grf.matrix.column(0) == tuple(1 if i == algebras[0].unit else 0
                                         for i in range(27))


def test_morphism_validation_rejects_nonmultiplicative():
    a = group_algebra(cyclic_group_table(3), 3)
    from grext.linalg import FpMatrix
    bad = FpMatrix.from_entries(3, 3, 3, [(0, 0, 1), (2, 1, 1), (1, 2, 1)])
    with pytest.raises(Exception):
        AlgebraMorphism(a, a, bad)


def test_restrict_module_along_identity():
    a = group_algebra(cyclic_group_table(3), 3)
    k = trivial_module(a)
    f = AlgebraMorphism.identity(a)
    r = restrict_module(f, k)
    assert r.same_structure(k)
