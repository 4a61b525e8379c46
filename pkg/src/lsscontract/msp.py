"""Monotone span programs (linear secret sharing schemes) and their contraction.

An :class:`Msp` is a matrix ``H`` over F_p with ``ell`` rows and ``d``
columns, the fixed target vector ``(1, 0, ..., 0)`` and a map ``psi`` from
row index (0-based) to participant label (1-based).  Sharing a secret ``s``
picks ``v = (s, r_2, ..., r_d)`` and hands row ``j``'s holder ``h_j . v``.

Contraction at an unauthorized set Q rewrites every surviving row so the new
ideal scheme realizes the contracted access structure: a single-participant
version that pivots on one column, and a one-step multi-participant version
that clears Q's rows through an invertible submatrix.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import access
from .access import AccessStructure
from .exceptions import (
    AuthorizedSetError,
    InconsistentRowsError,
    UnauthorizedSetError,
    ValidationError,
)
from .galois import (
    FieldMatrix,
    PrimeField,
    Submatrix,
    find_invertible_submatrix,
    in_span,
    solve_in_span,
)

__all__ = [
    "Msp",
    "ShareVector",
    "Contraction",
    "share",
    "reconstruct",
    "realized_structure",
    "shamir",
    "contract_single",
    "contract_multi",
    "contract",
    "random_ideal_msp",
    "msp_to_dict",
    "msp_from_dict",
    "dumps",
    "loads",
]

MSP_FORMAT = "lsscontract.msp/1"


@dataclass(frozen=True)
class Msp:
    matrix: FieldMatrix
    psi: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "psi", tuple(int(x) for x in self.psi))
        PrimeField(self.matrix.p)
        if self.matrix.ncols < 1:
            raise ValidationError("an MSP needs at least one column")
        if len(self.psi) != self.matrix.nrows:
            raise ValidationError("psi must label every row")
        if set(self.psi) != set(range(1, self.n + 1)):
            raise ValidationError(f"psi must be onto participants 1..{self.n}")

    @classmethod
    def from_rows(
        cls, p: int, rows: Sequence[Sequence[int]], psi: Optional[Sequence[int]] = None,
        n: Optional[int] = None,
    ) -> "Msp":
        """Convenience constructor; ``psi`` defaults to row ``j`` -> participant ``j + 1``."""
        matrix = FieldMatrix.from_rows(p, rows)
        if psi is None:
            psi = tuple(range(1, matrix.nrows + 1))
        if n is None:
            n = max(psi) if psi else 0
        return cls(matrix, tuple(psi), n)

    @property
    def p(self) -> int:
        return self.matrix.p

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    @property
    def d(self) -> int:
        return self.matrix.ncols

    @property
    def ell(self) -> int:
        return self.matrix.nrows

    @property
    def target(self) -> tuple[int, ...]:
        return (1,) + (0,) * (self.d - 1)

    @property
    def is_ideal(self) -> bool:
        return self.ell == self.n and len(set(self.psi)) == self.n

    def rows_of(self, participants: Iterable[int]) -> tuple[int, ...]:
        """Row indices assigned to ``participants``, ascending."""
        a = frozenset(participants)
        for i in a:
            if not 1 <= i <= self.n:
                raise ValidationError(f"participant {i} outside 1..{self.n}")
        return tuple(j for j, owner in enumerate(self.psi) if owner in a)

    def submatrix(self, participants: Iterable[int]) -> FieldMatrix:
        return self.matrix.select(self.rows_of(participants))

    def accepts(self, participants: Iterable[int]) -> bool:
        """Span test: does the target lie in the span of the participants' rows?"""
        return in_span(self.submatrix(participants), self.target)


@dataclass(frozen=True)
class ShareVector:
    """Shares indexed by row, with the row-to-participant map alongside."""

    values: tuple[int, ...]
    psi: tuple[int, ...]

    def of(self, participant: int) -> tuple[int, ...]:
        return tuple(v for v, owner in zip(self.values, self.psi) if owner == participant)

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for v, owner in zip(self.values, self.psi):
            out.setdefault(owner, []).append(v)
        return {k: tuple(v) for k, v in sorted(out.items())}

    def restrict(self, participants: Iterable[int]) -> dict[int, tuple[int, ...]]:
        a = frozenset(participants)
        return {k: v for k, v in self.as_dict().items() if k in a}

    def __len__(self) -> int:
        return len(self.values)


SharesLike = Union[ShareVector, Mapping[int, Union[int, Sequence[int]]]]


def share(
    m: Msp,
    secret: int,
    rng: Optional[random.Random] = None,
    randomness: Optional[Sequence[int]] = None,
) -> tuple[ShareVector, tuple[int, ...]]:
    """Share ``secret``; returns the shares and ``(r_2, ..., r_d)``.

    The random tail is drawn from ``rng`` unless given explicitly.
    """
    if not 0 <= secret < m.p:
        raise ValidationError(f"secret must lie in [0, {m.p})")
    if randomness is None:
        if rng is None:
            raise ValidationError("either rng or explicit randomness is required")
        randomness = tuple(rng.randrange(m.p) for _ in range(m.d - 1))
    else:
        randomness = tuple(int(x) % m.p for x in randomness)
        if len(randomness) != m.d - 1:
            raise ValidationError(f"randomness must have length {m.d - 1}")
    v = (secret,) + randomness
    return ShareVector(m.matrix.apply(v), m.psi), randomness


def _gather(m: Msp, a: frozenset[int], shares: SharesLike) -> tuple[tuple[int, ...], list[int]]:
    rows = m.rows_of(a)
    if isinstance(shares, ShareVector):
        if shares.psi != m.psi:
            raise ValidationError("share vector does not match the MSP's row map")
        return rows, [shares.values[j] for j in rows]
    per_participant: dict[int, list[int]] = {}
    for i in sorted(a):
        if i not in shares:
            raise ValidationError(f"missing shares of participant {i}")
        held = shares[i]
        per_participant[i] = [held] if isinstance(held, int) else list(held)
    values = []
    counters = {i: 0 for i in a}
    for j in rows:
        owner = m.psi[j]
        held = per_participant[owner]
        if counters[owner] >= len(held):
            raise ValidationError(f"participant {owner} holds too few shares")
        values.append(held[counters[owner]] % m.p)
        counters[owner] += 1
    return rows, values


def reconstruct(m: Msp, a: Iterable[int], shares: SharesLike) -> int:
    """Recover the secret from the shares of participant set ``a``."""
    a = frozenset(a)
    rows, values = _gather(m, a, shares)
    alpha = solve_in_span(m.matrix.select(rows), m.target)
    if alpha is None:
        raise UnauthorizedSetError()
    return sum(x * y for x, y in zip(alpha, values)) % m.p


def realized_structure(m: Msp) -> AccessStructure:
    """Access structure realized by ``m``, by span tests over all subsets (n <= 20)."""
    return access.from_predicate(m.n, m.accepts)


def shamir(t: int, n: int, p: int, xs: Optional[Sequence[int]] = None) -> Msp:
    """Shamir's (t, n) scheme as an ideal MSP: row i is ``(x_i^0, ..., x_i^{t-1})``."""
    PrimeField(p)
    if not 1 <= t <= n:
        raise ValidationError(f"need 1 <= t <= n, got t={t}, n={n}")
    if p <= n:
        raise ValidationError("modulus must exceed the participant count")
    if xs is None:
        xs = range(1, n + 1)
    xs = [int(x) % p for x in xs]
    if len(xs) != n:
        raise ValidationError("need exactly n evaluation points")
    if len(set(xs)) != n or 0 in xs:
        raise ValidationError("evaluation points must be distinct and nonzero")
    rows = [[pow(x, e, p) for e in range(t)] for x in xs]
    return Msp(FieldMatrix.from_rows(p, rows, t), tuple(range(1, n + 1)), n)


@dataclass(frozen=True)
class Contraction:
    """A contracted MSP plus the certificate used to rewrite shares.

    ``W`` holds row indices of the original MSP, ``K`` column indices, and
    ``U_inverse`` is the inverse of ``H[W][:, K]``.  ``surviving_rows[j]`` is
    the original row behind new row ``j``; ``reindex[j - 1]`` is the original
    label of new participant ``j``.  ``k`` is set for single-participant
    contraction only.
    """

    msp: Msp
    original: Msp
    removed: frozenset[int]
    reindex: tuple[int, ...]
    surviving_rows: tuple[int, ...]
    W: tuple[int, ...]
    K: tuple[int, ...]
    U_inverse: FieldMatrix
    k: Optional[int] = None
    coefficients: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    @property
    def rank(self) -> int:
        return len(self.W)


def _prepare(m: Msp, q: frozenset[int], check_structure: bool) -> None:
    if not m.is_ideal:
        raise ValidationError("contraction is defined here for ideal MSPs only")
    if not q:
        raise ValidationError("contraction set must be nonempty")
    for i in q:
        if not 1 <= i <= m.n:
            raise ValidationError(f"participant {i} outside 1..{m.n}")
    # for ideal MSPs the span test on Q alone is the authorization test
    if m.accepts(q):
        raise AuthorizedSetError()
    if check_structure:
        gamma = realized_structure(m)
        if access.is_authorized(gamma, q):
            raise AuthorizedSetError()


def _finish(
    m: Msp, q: frozenset[int], sub_W: Sequence[int], K: Sequence[int], U_inverse: FieldMatrix,
    k: Optional[int],
) -> Contraction:
    p = m.p
    H = m.matrix
    surviving = tuple(j for j in range(m.ell) if m.psi[j] not in q)
    reindex = tuple(sorted({m.psi[j] for j in surviving}))
    lookup = {old: new for new, old in enumerate(reindex, start=1)}
    HW = H.select(sub_W)
    new_rows = []
    coeffs = []
    for j in surviving:
        h = H.rows[j]
        # c = (h)_K U^{-1}; h' = h - c . H_W
        c = U_inverse.transpose().apply([h[kk] for kk in K]) if K else ()
        delta = HW.combine(c) if c else (0,) * m.d
        new_rows.append(tuple((x - y) % p for x, y in zip(h, delta)))
        coeffs.append(tuple(c))
    new = Msp(
        FieldMatrix(p, tuple(new_rows), m.d),
        tuple(lookup[m.psi[j]] for j in surviving),
        len(reindex),
    )
    return Contraction(
        msp=new,
        original=m,
        removed=q,
        reindex=reindex,
        surviving_rows=surviving,
        W=tuple(sub_W),
        K=tuple(K),
        U_inverse=U_inverse,
        k=k,
        coefficients=tuple(coeffs),
    )


def contract_single(m: Msp, q: Union[int, Iterable[int]], check_structure: bool = False) -> Contraction:
    """Contract an ideal MSP at one unauthorized participant.

    The pivot column ``k`` is the smallest non-target column where q's row is
    nonzero, and every other row becomes ``h_i - (h_ik / h_qk) h_q``.
    """
    qs = frozenset([q]) if isinstance(q, int) else frozenset(q)
    if len(qs) != 1:
        raise ValidationError("contract_single takes exactly one participant")
    _prepare(m, qs, check_structure)
    (row,) = m.rows_of(qs)
    h_q = m.matrix.rows[row]
    k = next((j for j in range(1, m.d) if h_q[j]), None)
    if k is None:
        raise InconsistentRowsError(
            "no nonzero pivot outside the target column; structure is not connected"
        )
    U_inverse = FieldMatrix(m.p, ((pow(h_q[k], -1, m.p),),), 1)
    return _finish(m, qs, (row,), (k,), U_inverse, k)


def contract_multi(m: Msp, q: Iterable[int], check_structure: bool = False) -> Contraction:
    """One-step contraction of an ideal MSP at an unauthorized set ``q``.

    Surviving rows become ``h_i - (h_i)_K U^{-1} H_W`` with ``U = H[W][:, K]``
    the invertible submatrix of Q's rows chosen by
    :func:`~lsscontract.galois.find_invertible_submatrix`.
    """
    qs = frozenset(q)
    _prepare(m, qs, check_structure)
    q_rows = m.rows_of(qs)
    sub: Submatrix = find_invertible_submatrix(m.matrix.select(q_rows), excluded_col=0)
    W = tuple(q_rows[w] for w in sub.W)
    return _finish(m, qs, W, sub.K, sub.U_inverse, sub.K[0] if len(qs) == 1 and sub.K else None)


def contract(m: Msp, q: Iterable[int], check_structure: bool = False) -> Contraction:
    """Dispatch on ``|q|``: single-participant pivoting or the one-step version."""
    qs = frozenset(q)
    if len(qs) == 1:
        return contract_single(m, qs, check_structure)
    return contract_multi(m, qs, check_structure)


def random_ideal_msp(
    p: int, n: int, d: int, rng: random.Random, max_tries: int = 10_000
) -> Msp:
    """Random ideal MSP over F_p with a connected realized structure and no zero row."""
    zero = (0,) * d
    target = (1,) + (0,) * (d - 1)
    for _ in range(max_tries):
        rows = tuple(tuple(rng.randrange(p) for _ in range(d)) for _ in range(n))
        if any(r == zero for r in rows):
            continue
        H = FieldMatrix(p, rows, d)
        if not in_span(H, target):
            continue
        m = Msp(H, tuple(range(1, n + 1)), n)
        if access.is_connected(realized_structure(m)):
            return m
    raise RuntimeError(f"no connected ideal MSP found for p={p}, n={n}, d={d}")


def msp_to_dict(m: Msp) -> dict:
    return {
        "format": MSP_FORMAT,
        "modulus": m.p,
        "n": m.n,
        "rows": m.matrix.tolist(),
        "psi": list(m.psi),
    }


def msp_from_dict(data: Mapping) -> Msp:
    try:
        if data.get("format", MSP_FORMAT) != MSP_FORMAT:
            raise ValidationError(f"unsupported MSP format {data.get('format')!r}")
        p = int(data["modulus"])
        rows = data["rows"]
        if not rows:
            raise ValidationError("MSP has no rows")
        matrix = FieldMatrix(p, tuple(tuple(int(x) for x in r) for r in rows), len(rows[0]))
        return Msp(matrix, tuple(int(x) for x in data["psi"]), int(data["n"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed MSP document: {exc}") from exc


def dumps(m: Msp) -> str:
    return json.dumps(msp_to_dict(m), indent=2)


def loads(text: str) -> Msp:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"MSP parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return msp_from_dict(data)
