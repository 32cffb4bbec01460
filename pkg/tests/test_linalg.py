"""Kernel linear algebra: ranks, kernels, canonical solves over F_p."""

import random

import pytest

from grext.linalg import (
    DimensionMismatch,
    FpMatrix,
    in_span,
    is_prime,
    subspace_intersection,
    subspace_sum,
)


def random_matrix(rng, p, rows, cols):
    return FpMatrix.from_rows(p, [[rng.randrange(p) for _ in range(cols)] for _ in range(rows)])


def test_prime_validation():
    with pytest.raises(ValueError):
        FpMatrix.zeros(6, 2, 2)
    with pytest.raises(ValueError):
        FpMatrix.zeros(1, 1, 1)
    assert is_prime(2) and is_prime(3) and is_prime(2**31 - 1)
    assert not is_prime(2**31 - 2)


def test_rank_profile_identity():
    m = FpMatrix.identity(5, 3)
    assert m.rank_profile() == (3, [0, 1, 2])


def test_rank_profile_zero():
    m = FpMatrix.zeros(3, 2, 4)
    assert m.rank_profile() == (0, [])


def test_rank_profile_rank_one():
    # row2 - 2*row1 = 0 over F_3
    m = FpMatrix.from_rows(3, [[1, 2], [2, 1]])
    rank, pivots = m.rank_profile()
    assert rank == 1
    assert pivots == [0]


def test_kernel_identity_trivial():
    assert FpMatrix.identity(3, 2).kernel_basis() == []


def test_kernel_zero_full():
    basis = FpMatrix.zeros(3, 1, 3).kernel_basis()
    assert len(basis) == 3


def test_kernel_rank_one():
    m = FpMatrix.from_rows(3, [[1, 2], [2, 1]])
    basis = m.kernel_basis()
    assert len(basis) == 1
    v = basis[0]
    assert m.mat_vec(v) == (0, 0)
    # x + 2y = 0 mod 3 has solution line through (1, 1)
    assert v in ((1, 1), (2, 2))


def test_solve_identity():
    m = FpMatrix.identity(3, 2)
    assert m.solve([1, 2]) == (1, 2)


def test_solve_no_solution():
    m = FpMatrix.zeros(3, 2, 2)
    assert m.solve([1, 0]) is None


def test_solve_homogeneous():
    m = FpMatrix.from_rows(3, [[1, 2], [2, 1]])
    x = m.solve([0, 0])
    assert x is not None
    assert m.mat_vec(x) == (0, 0)


def test_solve_batch_mixed():
    m = FpMatrix.from_rows(5, [[1, 0], [0, 0]])
    sols = m.solve_batch([[2, 0], [0, 3], [4, 0]])
    assert sols[0] == (2, 0)
    assert sols[1] is None
    assert sols[2] == (4, 0)


def test_rank_transpose_property():
    rng = random.Random(11)
    for _ in range(40):
        p = rng.choice([2, 3, 5, 7])
        m = random_matrix(rng, p, rng.randrange(1, 7), rng.randrange(1, 7))
        assert m.rank() == m.transpose().rank()


def test_kernel_dimension_property():
    rng = random.Random(12)
    for _ in range(40):
        p = rng.choice([2, 3, 5])
        m = random_matrix(rng, p, rng.randrange(1, 6), rng.randrange(1, 6))
        basis = m.kernel_basis()
        assert len(basis) == m.cols - m.rank()
        for v in basis:
            assert all(c == 0 for c in m.mat_vec(v))
        if basis:
            gen = FpMatrix.from_columns(m.p, basis, rows=m.cols)
            assert gen.rank() == len(basis)


def test_solve_iff_rank_property():
    rng = random.Random(13)
    for _ in range(40):
        p = rng.choice([2, 3, 5])
        m = random_matrix(rng, p, rng.randrange(1, 6), rng.randrange(1, 6))
        rhs = [rng.randrange(p) for _ in range(m.rows)]
        aug = m.hstack(FpMatrix.from_columns(p, [rhs], rows=m.rows))
        x = m.solve(rhs)
        if aug.rank() == m.rank():
            assert x is not None and m.mat_vec(x) == tuple(v % p for v in rhs)
        else:
            assert x is None


def test_sparse_dense_agree():
    rng = random.Random(14)
    p = 3
    rows = [[rng.randrange(p) for _ in range(520)] for _ in range(8)]
    wide = FpMatrix.from_rows(p, rows)          # sparse backend (cols > 512)
    assert wide._dense is None
    narrow = wide.take_cols(list(range(100)))   # dense backend
    assert narrow._dense is not None
    dense_again = FpMatrix.from_rows(p, [r[:100] for r in rows])
    assert narrow.rank_profile() == dense_again.rank_profile()
    assert narrow.kernel_basis() == dense_again.kernel_basis()
    # rank of the wide matrix agrees with its transpose computed sparse
    assert wide.rank() == wide.transpose().rank()


def test_matmul_and_shapes():
    a = FpMatrix.from_rows(7, [[1, 2], [3, 4]])
    b = FpMatrix.from_rows(7, [[5], [6]])
    assert (a @ b).to_lists() == [[(1 * 5 + 2 * 6) % 7], [(3 * 5 + 4 * 6) % 7]]
    with pytest.raises(DimensionMismatch):
        b @ a


def test_subspace_ops():
    p = 3
    e1 = FpMatrix.from_columns(p, [(1, 0, 0)], rows=3)
    e12 = FpMatrix.from_columns(p, [(1, 0, 0), (0, 1, 0)], rows=3)
    e23 = FpMatrix.from_columns(p, [(0, 1, 0), (0, 0, 1)], rows=3)
    inter = subspace_intersection(e12, e23)
    assert inter.rank() == 1
    assert in_span(inter, (0, 1, 0))
    total = subspace_sum(e12, e23)
    assert total.rank() == 3
    assert in_span(e1, (2, 0, 0))
    assert not in_span(e1, (0, 1, 0))
