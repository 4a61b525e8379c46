"""Monotone access structures stored by their basis of minimal authorized sets.

Participants are labelled ``1..n``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Iterator, Optional

from .exceptions import ValidationError

__all__ = [
    "AccessStructure",
    "Contracted",
    "is_authorized",
    "contract",
    "is_connected",
    "threshold",
    "minimal_sets",
    "from_predicate",
    "parse_structure",
    "format_structure",
]

MAX_ENUMERATION_N = 20


def minimal_sets(sets: Iterable[Iterable[int]]) -> frozenset[frozenset[int]]:
    """The inclusion-minimal members of a family."""
    uniq = sorted({frozenset(s) for s in sets}, key=len)
    kept: list[frozenset[int]] = []
    for s in uniq:
        if not any(k <= s for k in kept):
            kept.append(s)
    return frozenset(kept)


@dataclass(frozen=True)
class AccessStructure:
    n: int
    basis: frozenset[frozenset[int]]

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("participant count must be non-negative")
        basis = frozenset(frozenset(a) for a in self.basis)
        object.__setattr__(self, "basis", basis)
        for a in basis:
            if not a:
                raise ValidationError("basis members must be nonempty")
            if min(a) < 1 or max(a) > self.n:
                raise ValidationError(f"basis member {sorted(a)} outside 1..{self.n}")
        for a in basis:
            for b in basis:
                if a < b:
                    raise ValidationError("basis is not an antichain")

    @classmethod
    def from_sets(cls, n: int, sets: Iterable[Iterable[int]]) -> "AccessStructure":
        """Structure generated by arbitrary authorized sets (minimised here)."""
        return cls(n, minimal_sets(sets))

    @property
    def participants(self) -> frozenset[int]:
        return frozenset(range(1, self.n + 1))

    def sorted_basis(self) -> list[tuple[int, ...]]:
        return sorted((tuple(sorted(a)) for a in self.basis), key=lambda a: (len(a), a))

    def authorized_sets(self) -> Iterator[frozenset[int]]:
        """Every authorized subset, by brute force over 2**n subsets."""
        if self.n > MAX_ENUMERATION_N:
            raise ValidationError(f"enumeration limited to n <= {MAX_ENUMERATION_N}")
        for size in range(1, self.n + 1):
            for combo in itertools.combinations(range(1, self.n + 1), size):
                a = frozenset(combo)
                if is_authorized(self, a):
                    yield a

    def threshold_parameters(self) -> Optional[tuple[int, int]]:
        """``(t, n)`` when this is a t-out-of-n threshold structure, else None."""
        if not self.basis:
            return None
        sizes = {len(a) for a in self.basis}
        if len(sizes) != 1:
            return None
        t = sizes.pop()
        if len(self.basis) == comb(self.n, t):
            return (t, self.n)
        return None

    def __str__(self) -> str:
        return format_structure(self)


@dataclass(frozen=True)
class Contracted:
    """Result of contraction: the structure on re-indexed survivors.

    ``reindex[j - 1]`` is the original label of new participant ``j``.
    """

    structure: AccessStructure
    reindex: tuple[int, ...]

    def to_new(self, original: Iterable[int]) -> frozenset[int]:
        lookup = {old: new for new, old in enumerate(self.reindex, start=1)}
        return frozenset(lookup[i] for i in original)

    def to_original(self, new: Iterable[int]) -> frozenset[int]:
        return frozenset(self.reindex[j - 1] for j in new)


def _check_subset(gamma: AccessStructure, a: Iterable[int]) -> frozenset[int]:
    a = frozenset(a)
    for i in a:
        if not 1 <= i <= gamma.n:
            raise ValidationError(f"participant {i} outside 1..{gamma.n}")
    return a


def is_authorized(gamma: AccessStructure, a: Iterable[int]) -> bool:
    a = _check_subset(gamma, a)
    return any(b <= a for b in gamma.basis)


def contract(gamma: AccessStructure, q: Iterable[int]) -> Contracted:
    """Contraction at ``q``: A is authorized afterwards iff ``A | q`` was before."""
    q = _check_subset(gamma, q)
    survivors = tuple(i for i in range(1, gamma.n + 1) if i not in q)
    lookup = {old: new for new, old in enumerate(survivors, start=1)}
    reduced = [b - q for b in gamma.basis]
    if any(not b for b in reduced):
        basis = frozenset(frozenset([j]) for j in range(1, len(survivors) + 1))
    else:
        basis = frozenset(frozenset(lookup[i] for i in b) for b in minimal_sets(reduced))
    return Contracted(AccessStructure(len(survivors), basis), survivors)


def is_connected(gamma: AccessStructure) -> bool:
    covered = frozenset().union(*gamma.basis) if gamma.basis else frozenset()
    return covered == gamma.participants


def threshold(t: int, n: int) -> AccessStructure:
    if not 1 <= t <= n:
        raise ValidationError(f"threshold needs 1 <= t <= n, got t={t}, n={n}")
    if n > MAX_ENUMERATION_N:
        raise ValidationError(f"threshold basis is materialised only for n <= {MAX_ENUMERATION_N}")
    return AccessStructure(
        n, frozenset(frozenset(c) for c in itertools.combinations(range(1, n + 1), t))
    )


def from_predicate(n: int, authorized: Callable[[frozenset[int]], bool]) -> AccessStructure:
    """Basis of the monotone family decided by ``authorized``.

    Subsets are visited by increasing size and supersets of already-found
    minimal sets are skipped, so the predicate must be monotone.
    """
    if n > MAX_ENUMERATION_N:
        raise ValidationError(f"enumeration limited to n <= {MAX_ENUMERATION_N}")
    found: list[frozenset[int]] = []
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(1, n + 1), size):
            a = frozenset(combo)
            if any(b <= a for b in found):
                continue
            if authorized(a):
                found.append(a)
    return AccessStructure(n, frozenset(found))


_TEXT_RE = re.compile(r"^\s*n\s*=\s*(\d+)\s*;\s*basis\s*=\s*(.*?)\s*$", re.S)
_SET_RE = re.compile(r"\{([^{}]*)\}")


def parse_structure(text: str) -> AccessStructure:
    """Parse ``n=4; basis={1,2,4},{1,3,4}``."""
    m = _TEXT_RE.match(text)
    if not m:
        raise ValidationError(f"cannot parse access structure: {text!r}")
    n = int(m.group(1))
    body = m.group(2)
    sets = []
    for inner in _SET_RE.findall(body):
        items = [x.strip() for x in inner.split(",") if x.strip()]
        try:
            sets.append(frozenset(int(x) for x in items))
        except ValueError as exc:
            raise ValidationError(f"bad participant in {{{inner}}}") from exc
    leftover = _SET_RE.sub("", body).replace(",", "").strip()
    if leftover:
        raise ValidationError(f"unexpected text in basis: {leftover!r}")
    return AccessStructure(n, frozenset(sets))


def format_structure(gamma: AccessStructure) -> str:
    body = ",".join("{" + ",".join(map(str, a)) + "}" for a in gamma.sorted_basis())
    return f"n={gamma.n}; basis={body}"
