import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsscontract import access
from lsscontract.exceptions import AuthorizedSetError, UnauthorizedSetError, ValidationError
from lsscontract.msp import (
    Msp,
    contract,
    contract_multi,
    contract_single,
    dumps,
    loads,
    random_ideal_msp,
    realized_structure,
    reconstruct,
    shamir,
    share,
)

from conftest import P16, authorized_family, closure, contracted_family, lagrange_at_zero, msp_corpus, subsets


class TestShare:
    def test_toy_secret_one(self, toy):
        sv, tail = share(toy, 1, randomness=(0, 0))
        assert sv.values == (1, 0, 0, 0) and tail == (0, 0)

    def test_toy_secret_zero(self, toy):
        sv, _ = share(toy, 0, randomness=(1, 1))
        assert sv.values == (1, 0, 0, 1)

    def test_zero_everything(self):
        m = shamir(3, 5, 7)
        sv, _ = share(m, 0, randomness=(0, 0))
        assert set(sv.values) == {0}

    def test_secret_out_of_range(self, toy):
        with pytest.raises(ValidationError):
            share(toy, 2, randomness=(0, 0))

    def test_seeded_reproducible(self):
        m = shamir(3, 5, P16)
        assert share(m, 9, random.Random(4)) == share(m, 9, random.Random(4))

    def test_grouping_by_participant(self):
        m = Msp.from_rows(5, [[1, 0], [0, 1], [1, 1]], psi=(1, 2, 1))
        sv, _ = share(m, 3, randomness=(2,))
        assert sv.as_dict() == {1: (3, 0), 2: (2,)}

    @given(st.integers(0, P16 - 1), st.integers(0, 10**6))
    def test_shamir_shares_are_polynomial_values(self, secret, seed):
        m = shamir(4, 7, P16)
        sv, tail = share(m, secret, random.Random(seed))
        coeffs = (secret,) + tail
        for x, y in zip(range(1, 8), sv.values):
            assert y == sum(c * pow(x, e, P16) for e, c in enumerate(coeffs)) % P16


class TestReconstruct:
    def test_toy(self, toy):
        sv, _ = share(toy, 1, randomness=(0, 0))
        assert reconstruct(toy, {1, 2, 4}, sv) == 1

    def test_toy_unauthorized(self, toy):
        sv, _ = share(toy, 1, randomness=(0, 0))
        with pytest.raises(UnauthorizedSetError, match="unauthorized set"):
            reconstruct(toy, {2, 3}, sv)

    def test_shamir_small(self):
        # P(x) = 5 + 3x over F_7
        m = shamir(2, 3, 7)
        assert reconstruct(m, {1, 3}, {1: 1, 3: 0}) == 5

    @settings(max_examples=50)
    @given(st.integers(0, 10**6))
    def test_against_lagrange(self, seed):
        rng = random.Random(seed)
        n = rng.randint(2, 10)
        t = rng.randint(1, n)
        m = shamir(t, n, P16)
        secret = rng.randrange(P16)
        sv, _ = share(m, secret, rng)
        a = rng.sample(range(1, n + 1), t)
        assert reconstruct(m, a, sv) == secret == lagrange_at_zero([(x, sv.values[x - 1]) for x in a], P16)

    @settings(max_examples=40)
    @given(st.sampled_from(range(60)), st.integers(0, 10**6))
    def test_correctness_on_corpus(self, idx, seed):
        m = msp_corpus()[idx]
        rng = random.Random(seed)
        secret = rng.randrange(m.p)
        sv, _ = share(m, secret, rng)
        for a in realized_structure(m).authorized_sets():
            assert reconstruct(m, a, sv) == secret


class TestRealizedStructure:
    def test_toy(self, toy):
        assert realized_structure(toy) == access.AccessStructure(4, [{1, 2, 4}, {1, 3, 4}])

    def test_shamir_eight_of_ten(self):
        assert realized_structure(shamir(8, 10, P16)) == access.threshold(8, 10)

    def test_trivial(self):
        assert realized_structure(Msp.from_rows(3, [[1]])).basis == {frozenset({1})}

    def test_shamir_small_brute_force(self):
        m = shamir(2, 3, 7)
        assert closure(realized_structure(m).basis, 3) == authorized_family(m)

    @pytest.mark.parametrize("idx", range(0, 520, 37))
    def test_corpus_against_enumeration(self, idx):
        m = msp_corpus()[idx]
        if m.p ** m.n > 4000:
            pytest.skip("enumeration too large")
        assert closure(realized_structure(m).basis, m.n) == authorized_family(m)


class TestShamir:
    def test_vandermonde(self):
        m = shamir(8, 10, P16)
        assert m.matrix.tolist() == [[pow(i, e, P16) for e in range(8)] for i in range(1, 11)]
        assert m.is_ideal

    def test_one_of_n(self):
        m = shamir(1, 4, 5)
        assert m.matrix.tolist() == [[1]] * 4
        assert all(m.accepts({i}) for i in range(1, 5))

    @pytest.mark.parametrize("kwargs", [dict(t=2, n=7, p=7), dict(t=2, n=3, p=7, xs=(1, 1, 2)), dict(t=2, n=3, p=7, xs=(0, 1, 2))])
    def test_errors(self, kwargs):
        with pytest.raises(ValidationError):
            shamir(**kwargs)


class TestContractSingle:
    def test_toy(self, toy):
        c = contract_single(toy, 4)
        assert c.msp.matrix.tolist() == [[1, 0, 1], [0, 0, 1], [0, 0, 1]]
        assert c.k == 1  # second column
        assert realized_structure(c.msp) == access.AccessStructure(3, [{1, 2}, {1, 3}])

    def test_shamir_small(self):
        c = contract_single(shamir(2, 3, 7), 3)
        assert realized_structure(c.msp) == access.threshold(1, 2)

    def test_authorized_singleton(self):
        m = Msp.from_rows(5, [[1, 0], [0, 1], [1, 1]])
        with pytest.raises(AuthorizedSetError, match="cannot contract at authorized set"):
            contract_single(m, 1)

    def test_non_ideal_rejected(self):
        m = Msp.from_rows(5, [[1, 0], [0, 1], [1, 1]], psi=(1, 2, 2))
        with pytest.raises(ValidationError):
            contract_single(m, 2)

    def test_check_structure(self, toy):
        assert contract_single(toy, 4, check_structure=True).msp == contract_single(toy, 4).msp

    def test_agrees_with_multi(self):
        for m in msp_corpus()[:80]:
            for q in range(1, m.n + 1):
                if m.accepts({q}):
                    continue
                a, b = contract_single(m, q), contract_multi(m, {q})
                assert a.msp == b.msp
                assert b.K == (a.k,)


class TestContractMulti:
    def test_shamir_five_of_seven(self):
        c = contract_multi(shamir(8, 10, P16), {1, 5, 9})
        assert c.msp.ell == 7 and c.reindex == (2, 3, 4, 6, 7, 8, 10)
        assert realized_structure(c.msp) == access.threshold(5, 7)

    def test_authorized(self):
        with pytest.raises(AuthorizedSetError):
            contract_multi(shamir(3, 5, 7), {1, 2, 3})

    def test_certificate(self):
        m = shamir(6, 9, P16)
        c = contract_multi(m, {2, 4, 7})
        U = m.matrix.select(c.W, c.K)
        assert (U @ c.U_inverse).tolist() == [[int(i == j) for j in range(3)] for i in range(3)]

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(range(520)), st.data())
    def test_contracted_msp_realizes_contracted_structure(self, idx, data):
        m = msp_corpus()[idx]
        family = closure(realized_structure(m).basis, m.n)
        q = data.draw(st.frozensets(st.integers(1, m.n), min_size=1))
        if q in family:
            with pytest.raises(AuthorizedSetError):
                contract(m, q)
            return
        c = contract(m, q)
        assert c.msp.is_ideal and c.msp.n == m.n - len(q)
        assert closure(realized_structure(c.msp).basis, c.msp.n) == contracted_family(family, m.n, q)

    def test_two_step_equals_one_step(self):
        m = shamir(6, 9, 11)
        q1, q2 = {2, 7}, {3, 9}
        first = contract_multi(m, q1)
        second = contract_multi(first.msp, {first.reindex.index(i) + 1 for i in q2})
        once = contract_multi(m, q1 | q2)
        assert realized_structure(second.msp) == realized_structure(once.msp)

    def test_preserves_sharing_vector(self):
        # h'_i . v equals the relocated share for the same v
        m = shamir(5, 8, P16)
        rng = random.Random(3)
        v = [rng.randrange(P16) for _ in range(5)]
        c = contract_multi(m, {1, 8})
        rows_q = [m.matrix[w] for w in c.W]
        s = m.matrix.apply(v)
        for new_row, i, coeffs in zip(c.msp.matrix.rows, c.surviving_rows, c.coefficients):
            expect = (s[i] - sum(cw * s[w] for cw, w in zip(coeffs, c.W))) % P16
            assert sum(a * b for a, b in zip(new_row, v)) % P16 == expect
        assert rows_q


class TestPrivacy:
    @pytest.mark.parametrize("idx", range(0, 100, 9))
    def test_unauthorized_share_distribution(self, idx):
        m = [x for x in msp_corpus() if x.p <= 3 and x.d <= 4][idx]
        gamma = realized_structure(m)
        for a in subsets(range(1, m.n + 1)):
            if not a or access.is_authorized(gamma, a):
                continue
            rows = m.rows_of(a)
            dists = set()
            for secret in range(m.p):
                counts = Counter()
                for tail in itertools.product(range(m.p), repeat=m.d - 1):
                    sv, _ = share(m, secret, randomness=tail)
                    counts[tuple(sv.values[i] for i in rows)] += 1
                dists.add(frozenset(counts.items()))
            assert len(dists) == 1


class TestRandomCorpus:
    def test_generator_properties(self):
        rng = random.Random(5)
        for _ in range(30):
            m = random_ideal_msp(3, 5, 3, rng)
            assert m.is_ideal
            assert access.is_connected(realized_structure(m))
            assert all(any(row) for row in m.matrix.rows)


class TestSerialization:
    def test_roundtrip(self, toy):
        assert loads(dumps(toy)) == toy

    @settings(max_examples=30)
    @given(st.sampled_from(range(520)))
    def test_roundtrip_corpus(self, idx):
        m = msp_corpus()[idx]
        assert loads(dumps(m)) == m

    def test_parse_error_location(self):
        with pytest.raises(ValidationError, match="line 2, column"):
            loads('{"modulus": 2,\n "rows": [[1,0]]]')

    def test_missing_key(self):
        with pytest.raises(ValidationError):
            loads('{"modulus": 2, "rows": [[1, 0]]}')
