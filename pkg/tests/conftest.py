"""Shared fixtures and brute-force oracles.

The oracles here deliberately avoid the package's own linear algebra: span
membership is decided by enumerating every coefficient vector, Shamir shares
are checked by Lagrange interpolation, and access structures are compared as
explicit families of authorized sets.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

import pytest

from lsscontract.msp import Msp, random_ideal_msp, shamir

P16 = 2**16 - 15
P160 = 2**159 + 162259276829213363391578010288129

TOY_ROWS = ((1, 0, 1), (0, 1, 1), (0, 1, 1), (0, 1, 0))


@pytest.fixture
def toy() -> Msp:
    return Msp.from_rows(2, TOY_ROWS)


def brute_in_span(rows, target, p) -> bool:
    """Is ``target`` a combination of ``rows``? Tries all p**len(rows) coefficient vectors."""
    d = len(target)
    target = tuple(x % p for x in target)
    for alpha in itertools.product(range(p), repeat=len(rows)):
        comb = tuple(sum(a * r[j] for a, r in zip(alpha, rows)) % p for j in range(d))
        if comb == target:
            return True
    return False


def lagrange_at_zero(points, p) -> int:
    """Interpolate the polynomial through ``points`` and evaluate it at 0."""
    total = 0
    for i, (xi, yi) in enumerate(points):
        num, den = 1, 1
        for j, (xj, _) in enumerate(points):
            if i != j:
                num = num * (-xj) % p
                den = den * (xi - xj) % p
        total += yi * num * pow(den, -1, p)
    return total % p


def subsets(universe):
    universe = sorted(universe)
    for k in range(len(universe) + 1):
        for c in itertools.combinations(universe, k):
            yield frozenset(c)


def authorized_family(msp: Msp) -> frozenset[frozenset[int]]:
    """All authorized participant sets, span tested by exhaustive enumeration."""
    out = set()
    for a in subsets(range(1, msp.n + 1)):
        rows = [msp.matrix[i] for i in msp.rows_of(a)]
        if a and brute_in_span(rows, msp.target, msp.p):
            out.add(a)
    return frozenset(out)


def contracted_family(family, n, q):
    """Definition-level contraction on explicit families: A survives iff A | q was authorized.

    Survivors are renamed 1..n-|q| in ascending order.
    """
    q = frozenset(q)
    survivors = [i for i in range(1, n + 1) if i not in q]
    rename = {old: new for new, old in enumerate(survivors, start=1)}
    out = set()
    for a in subsets(survivors):
        if a and (a | q) in family:
            out.add(frozenset(rename[i] for i in a))
    return frozenset(out)


def closure(basis, n) -> frozenset[frozenset[int]]:
    return frozenset(a for a in subsets(range(1, n + 1)) if a and any(b <= a for b in basis))


@lru_cache(maxsize=None)
def msp_corpus(count: int = 520, seed: int = 2024) -> tuple[Msp, ...]:
    """Random ideal connected MSPs over F_2, F_3, F_5 with 2 <= n <= 6."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        p = rng.choice((2, 3, 5))
        n = rng.randint(2, 6)
        d = rng.randint(2, min(n, 4))
        out.append(random_ideal_msp(p, n, d, rng))
    return tuple(out)


def shamir_corpus(p: int = 11):
    for n in range(2, 11):
        for t in range(1, n + 1):
            yield shamir(t, n, p)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
