"""Exact linear algebra: Smith/Hermite forms, rational elimination."""

import random
from fractions import Fraction

import pytest

from diffchar.exact import (
    RatElim,
    dense_to_rows,
    invariant_factors,
    rat_nullspace,
    rat_rank,
    rat_solve,
    row_hermite_form,
    smith_normal_form,
)


def matmul(A, B):
    return [
        [sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))]
        for i in range(len(A))
    ]


def eye(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def assert_valid_snf(A, s):
    """Full certificate: U A V = D, transforms unimodular, chain divides."""
    U, V, D = s.U(), s.V(), s.D()
    assert matmul(matmul(U, A), V) == D
    assert matmul(U, s.Uinv()) == eye(len(A))
    assert matmul(V, s.Vinv()) == eye(len(A[0]))
    assert all(d > 0 for d in s.diag)
    for a, b in zip(s.diag, s.diag[1:]):
        assert b % a == 0


class TestSmith:
    def test_diag_2_3(self):
        s = smith_normal_form([[2, 0], [0, 3]])
        assert_valid_snf([[2, 0], [0, 3]], s)
        assert s.diag == [1, 6]

    def test_zero_matrix(self):
        s = smith_normal_form([[0, 0], [0, 0], [0, 0]])
        assert s.rank == 0
        assert s.diag == []
        assert len(s.kernel_basis()) == 2

    def test_single_entry(self):
        s = smith_normal_form([[-7]])
        assert s.diag == [7]

    def test_determinant_conservation(self):
        A = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
        s = smith_normal_form(A)
        assert_valid_snf(A, s)
        prod = 1
        for d in s.diag:
            prod *= d
        # |det A| computed by cofactor expansion: 624
        assert prod == 624

    def test_random_matrices(self):
        rng = random.Random(17)
        for _ in range(150):
            n, m = rng.randint(1, 6), rng.randint(1, 6)
            A = [[rng.randint(-7, 7) for _ in range(m)] for _ in range(n)]
            s = smith_normal_form(A)
            assert_valid_snf(A, s)

    def test_kernel_annihilates(self):
        rng = random.Random(5)
        for _ in range(60):
            n, m = rng.randint(1, 5), rng.randint(2, 6)
            A = [[rng.randint(-4, 4) for _ in range(m)] for _ in range(n)]
            s = smith_normal_form(A)
            assert len(s.kernel_basis()) == m - s.rank
            for vec in s.kernel_basis():
                assert all(
                    sum(r[j] * vec[j] for j in range(m)) == 0 for r in A
                )

    def test_int_solve_round_trip(self):
        rng = random.Random(11)
        for _ in range(80):
            n, m = rng.randint(1, 5), rng.randint(1, 5)
            A = [[rng.randint(-5, 5) for _ in range(m)] for _ in range(n)]
            x = [rng.randint(-6, 6) for _ in range(m)]
            b = [sum(r[j] * x[j] for j in range(m)) for r in A]
            sol = smith_normal_form(A).solve_int(b)
            assert sol is not None
            assert [sum(r[j] * sol[j] for j in range(m)) for r in A] == b

    def test_int_solve_detects_non_integral(self):
        # 2x = 1 has no integer solution
        assert smith_normal_form([[2]]).solve_int([1]) is None
        assert smith_normal_form([[2]]).solve_rat([1]) == [Fraction(1, 2)]

    def test_int_solve_detects_inconsistent(self):
        A = [[1, 1], [1, 1]]
        assert smith_normal_form(A).solve_int([0, 1]) is None
        assert smith_normal_form(A).solve_rat([0, 1]) is None

    def test_sparse_input(self):
        s = smith_normal_form([{0: 2}, {1: 3}], ncols=2)
        assert s.diag == [1, 6]


class TestHermite:
    def test_canonical_example(self):
        H, C = row_hermite_form([[2, 4], [4, 2]])
        assert H == [[2, 4], [0, 6]]
        assert matmul(C, [[2, 4], [4, 2]]) == H

    def test_row_lattice_invariance(self):
        # same lattice, generators mixed by [[1,1],[1,2]] (det 1)
        H1, _ = row_hermite_form([[1, 2, 3], [0, 4, 1]])
        H2, _ = row_hermite_form([[1, 6, 4], [1, 10, 5]])
        assert H1 == H2

    def test_transform_unimodular(self):
        rng = random.Random(3)
        for _ in range(50):
            n, m = rng.randint(1, 4), rng.randint(1, 5)
            A = [[rng.randint(-5, 5) for _ in range(m)] for _ in range(n)]
            H, C = row_hermite_form(A)
            assert matmul(C, A) == H
            s = smith_normal_form(C)
            assert s.diag == [1] * n  # unimodular


class TestRatElim:
    def test_solve_and_nullspace_dimensions(self):
        rng = random.Random(23)
        for _ in range(80):
            n, m = rng.randint(1, 5), rng.randint(1, 5)
            A = [[rng.randint(-5, 5) for _ in range(m)] for _ in range(n)]
            rows = dense_to_rows(A)
            assert rat_rank(rows, m) + len(rat_nullspace(rows, m)) == m

    def test_solution_round_trip(self):
        rng = random.Random(29)
        for _ in range(80):
            n, m = rng.randint(1, 5), rng.randint(1, 5)
            A = [[rng.randint(-5, 5) for _ in range(m)] for _ in range(n)]
            x = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(m)]
            b = [sum(r[j] * x[j] for j in range(m)) for r in A]
            sol = rat_solve(dense_to_rows(A), m, b)
            assert sol is not None
            assert [sum(r[j] * sol[j] for j in range(m)) for r in A] == b

    def test_inconsistent_detected(self):
        rows = dense_to_rows([[1, 1], [2, 2]])
        assert rat_solve(rows, 2, [1, 3]) is None

    def test_nullspace_annihilates(self):
        A = [[1, 2, 3], [4, 5, 6]]
        null = rat_nullspace(dense_to_rows(A), 3)
        assert len(null) == 1
        for r in A:
            assert sum(a * x for a, x in zip(r, null[0])) == 0

    def test_multiple_rhs(self):
        A = dense_to_rows([[2, 1], [1, 1]])
        elim = RatElim(A, 2, rhs=[[1, 0], [0, 1]])
        inv_cols = [elim.solution(0), elim.solution(1)]
        assert inv_cols[0] == [Fraction(1), Fraction(-1)]
        assert inv_cols[1] == [Fraction(-1), Fraction(2)]


class TestInvariantFactors:
    def test_coprime_merge(self):
        assert invariant_factors([2, 3]) == [6]

    def test_mixed(self):
        assert invariant_factors([2, 2, 4, 3]) == [2, 2, 12]

    def test_empty(self):
        assert invariant_factors([]) == []

    def test_chain_divides(self):
        rng = random.Random(7)
        for _ in range(40):
            orders = [rng.randint(2, 30) for _ in range(rng.randint(1, 5))]
            chain = invariant_factors(orders)
            for a, b in zip(chain, chain[1:]):
                assert b % a == 0
            prod_in = 1
            for n in orders:
                prod_in *= n
            prod_out = 1
            for d in chain:
                prod_out *= d
            assert prod_in == prod_out


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
