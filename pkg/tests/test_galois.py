import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsscontract.exceptions import InconsistentRowsError, ValidationError
from lsscontract.galois import (
    FieldMatrix,
    PrimeField,
    find_invertible_submatrix,
    in_span,
    inverse,
    is_prime,
    rank,
    rref,
    solve_in_span,
)

from conftest import P160, brute_in_span


def fm(p, rows, ncols=None):
    return FieldMatrix.from_rows(p, rows, ncols)


class TestPrimeField:
    def test_rejects_composite(self):
        with pytest.raises(ValidationError):
            PrimeField(15)

    def test_large_prime_accepted(self):
        f = PrimeField(P160)
        assert f.mul(f.inv(12345), 12345) == 1

    @pytest.mark.parametrize("n,expected", [(2, True), (65521, True), (65535, False), (1, False), (0, False)])
    def test_is_prime(self, n, expected):
        assert is_prime(n) is expected

    @given(st.integers(1, 2**16 - 16), st.integers(0, 2**16 - 16))
    def test_division_inverts_multiplication(self, a, b):
        f = PrimeField(2**16 - 15)
        assert f.mul(f.div(b, a), a) == b

    def test_inverse_of_zero(self):
        with pytest.raises(ZeroDivisionError):
            PrimeField(7).inv(0)


class TestMatrix:
    def test_entries_out_of_range(self):
        with pytest.raises(ValidationError):
            FieldMatrix(5, ((1, 5),), 2)

    def test_from_rows_reduces(self):
        assert fm(5, [[6, -1]]).tolist() == [[1, 4]]

    def test_matmul_against_naive(self):
        a = fm(7, [[1, 2, 3], [4, 5, 6]])
        b = fm(7, [[1, 0], [2, 1], [3, 3]])
        expect = [[sum(x * y for x, y in zip(r, c)) % 7 for c in zip(*b.tolist())] for r in a.tolist()]
        assert (a @ b).tolist() == expect


class TestRank:
    def test_identity(self):
        assert rank(FieldMatrix.identity(5, 3)) == 3

    def test_toy_rows(self):
        assert rank(fm(2, [[0, 1, 1], [0, 1, 1], [0, 1, 0]])) == 2

    def test_zero_matrix(self):
        assert rank(FieldMatrix.zeros(3, 2, 4)) == 0

    def test_empty(self):
        assert rank(FieldMatrix(3, (), 4)) == 0

    @settings(max_examples=60)
    @given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(1, 3), st.data())
    def test_rank_matches_span_enumeration(self, p, r, c, data):
        rows = [data.draw(st.lists(st.integers(0, p - 1), min_size=c, max_size=c)) for _ in range(r)]
        # rank = log_p of the number of distinct combinations
        span = {tuple(sum(a * row[j] for a, row in zip(alpha, rows)) % p for j in range(c))
                for alpha in itertools.product(range(p), repeat=r)}
        assert p ** rank(fm(p, rows)) == len(span)

    @settings(max_examples=40)
    @given(st.integers(0, 10**6))
    def test_rref_preserves_row_span(self, seed):
        rng = random.Random(seed)
        p = rng.choice([3, 5, 7])
        rows = [[rng.randrange(p) for _ in range(4)] for _ in range(rng.randint(1, 4))]
        m = fm(p, rows)
        e, _ = rref(m)
        for row in rows:
            assert in_span(e, row)
        for row in e.rows:
            assert in_span(m, row)


class TestSolve:
    def test_identity(self):
        assert solve_in_span(FieldMatrix.identity(7, 2), (1, 0)) == (1, 0)

    def test_toy_authorized(self):
        assert solve_in_span(fm(2, [[1, 0, 1], [0, 1, 1], [0, 1, 0]]), (1, 0, 0)) == (1, 1, 1)

    def test_not_in_span(self):
        assert solve_in_span(fm(2, [[0, 1, 1]]), (1, 0, 0)) is None

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            solve_in_span(fm(2, [[0, 1, 1]]), (1, 0))

    def test_free_variables_zero(self):
        # duplicate rows: the second copy is free and must get coefficient 0
        assert solve_in_span(fm(5, [[1, 0], [1, 0]]), (1, 0)) == (1, 0)

    @settings(max_examples=80)
    @given(st.sampled_from([2, 3]), st.integers(1, 4), st.integers(1, 3), st.data())
    def test_agrees_with_enumeration(self, p, r, c, data):
        rows = [data.draw(st.lists(st.integers(0, p - 1), min_size=c, max_size=c)) for _ in range(r)]
        target = data.draw(st.lists(st.integers(0, p - 1), min_size=c, max_size=c))
        alpha = solve_in_span(fm(p, rows), target)
        assert (alpha is not None) == brute_in_span(rows, target, p)
        if alpha is not None:
            combo = [sum(a * row[j] for a, row in zip(alpha, rows)) % p for j in range(c)]
            assert combo == list(target)


class TestInverse:
    @settings(max_examples=40)
    @given(st.integers(0, 10**6))
    def test_inverse_roundtrip(self, seed):
        rng = random.Random(seed)
        p = rng.choice([2, 3, 5, 65521])
        n = rng.randint(1, 4)
        m = fm(p, [[rng.randrange(p) for _ in range(n)] for _ in range(n)])
        if rank(m) < n:
            with pytest.raises(ValidationError):
                inverse(m)
        else:
            assert (m @ inverse(m)).tolist() == FieldMatrix.identity(p, n).tolist()

    def test_empty(self):
        assert inverse(FieldMatrix(5, (), 0)).shape == (0, 0)


class TestInvertibleSubmatrix:
    def test_single_row(self):
        sub = find_invertible_submatrix(fm(2, [[0, 1, 0]]), excluded_col=0)
        assert (sub.W, sub.K, sub.U_inverse.tolist()) == ((0,), (1,), [[1]])

    def test_two_rows(self):
        sub = find_invertible_submatrix(fm(2, [[0, 1, 1], [0, 1, 0]]), excluded_col=0)
        assert sub.W == (0, 1) and sub.K == (1, 2)
        assert sub.U.tolist() == [[1, 1], [1, 0]]
        assert sub.U_inverse.tolist() == [[0, 1], [1, 1]]

    def test_target_only_row(self):
        with pytest.raises(InconsistentRowsError, match="row not unauthorized-consistent"):
            find_invertible_submatrix(fm(5, [[1, 0, 0]]), excluded_col=0)

    @settings(max_examples=60)
    @given(st.integers(0, 10**6))
    def test_certificate(self, seed):
        rng = random.Random(seed)
        p = rng.choice([2, 3, 5, 7])
        rows = [[rng.randrange(p) for _ in range(4)] for _ in range(rng.randint(1, 3))]
        m = fm(p, rows)
        rest = m.select(range(m.nrows), (1, 2, 3))
        if rank(rest) < rank(m):
            with pytest.raises(InconsistentRowsError):
                find_invertible_submatrix(m, 0)
            return
        sub = find_invertible_submatrix(m, 0)
        r = rank(m)
        assert len(sub.W) == len(sub.K) == r and 0 not in sub.K
        U = m.select(sub.W, sub.K)
        assert U.tolist() == sub.U.tolist()
        assert (U @ sub.U_inverse).tolist() == FieldMatrix.identity(p, r).tolist()
