"""Share relocation when an unauthorized set Q of servers is unsubscribed.

Four methods move Q's shares onto the surviving servers:

``lc``
    every survivor linearly combines its share with Q's shares, using the
    contracted MSP's certificate; storage per server is unchanged.
``ps``
    Q's shares go to public storage and survivors keep their shares.
``is``
    every survivor keeps its own share plus a full copy of Q's shares.
``cs``
    Q's shares are spread so every authorized set of the contracted
    structure collectively holds one copy of them.

Each method is a linear map from the old share vector to the stored values,
captured by a :class:`RelocationPlan` (topology only) and applied per secret
to give a :class:`RelocationOutcome`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import access
from .access import AccessStructure
from .exceptions import AuthorizedSetError, UnauthorizedSetError, ValidationError
from .galois import FieldMatrix, find_invertible_submatrix, solve_in_span
from .msp import Contraction, Msp, ShareVector, contract, realized_structure

__all__ = [
    "METHODS",
    "RelocationPlan",
    "RelocationOutcome",
    "StorageMetrics",
    "plan",
    "relocate",
    "relocate_lc",
    "relocate_lc_oracle",
    "relocate_ps",
    "relocate_is",
    "relocate_cs",
    "metrics",
    "METRICS_CSV_FIELDS",
]

METHODS = ("lc", "ps", "is", "cs")
METRICS_CSV_FIELDS = ("method", "n", "t", "m", "share_bits", "z", "L_bits", "rho")

_BYTES_PER_MIB = 1 << 20


@dataclass(frozen=True)
class RelocationOutcome:
    """Post-relocation storage for one secret.

    ``scheme`` is an MSP over the survivors, re-indexed ``1..n-m``
    (``reindex[j - 1]`` is the original label of new server ``j``); row ``i``
    of it backs stored value ``values[i]``.  ``public`` rows back
    ``public_values`` and are readable by everybody.
    """

    method: str
    original: Msp
    removed: frozenset[int]
    scheme: Msp
    values: tuple[int, ...]
    public: FieldMatrix
    public_values: tuple[int, ...]
    reindex: tuple[int, ...]
    contraction: Optional[Contraction] = None

    @property
    def shares(self) -> ShareVector:
        return ShareVector(self.values, self.scheme.psi)

    @property
    def servers(self) -> dict[int, tuple[int, ...]]:
        """Stored values keyed by original server label."""
        by_new = self.shares.as_dict()
        return {self.reindex[j - 1]: by_new.get(j, ()) for j in range(1, self.scheme.n + 1)}

    @property
    def new_shares(self) -> dict[int, int]:
        """Single stored value per server (ideal outcomes only)."""
        out = {}
        for label, vals in self.servers.items():
            if len(vals) != 1:
                raise ValidationError(f"server {label} stores {len(vals)} elements")
            out[label] = vals[0]
        return out

    def element_counts(self) -> dict[int, int]:
        counts = Counter(self.scheme.psi)
        return {self.reindex[j - 1]: counts[j] for j in range(1, self.scheme.n + 1)}

    def to_new_labels(self, servers: Iterable[int]) -> frozenset[int]:
        lookup = {old: new for new, old in enumerate(self.reindex, start=1)}
        try:
            return frozenset(lookup[i] for i in servers)
        except KeyError as exc:
            raise ValidationError(f"server {exc.args[0]} is not a survivor") from None

    def rows_for(self, servers: Iterable[int]) -> tuple[FieldMatrix, list[int]]:
        """Rows and values reachable by ``servers`` (original labels), public storage included."""
        rows = self.scheme.rows_of(self.to_new_labels(servers))
        matrix = self.scheme.matrix.select(rows).stack(self.public)
        values = [self.values[j] for j in rows] + list(self.public_values)
        return matrix, values

    def can_reconstruct(self, servers: Iterable[int]) -> bool:
        matrix, _ = self.rows_for(servers)
        return solve_in_span(matrix, self.scheme.target) is not None

    def reconstruct(self, servers: Iterable[int]) -> int:
        matrix, values = self.rows_for(servers)
        alpha = solve_in_span(matrix, self.scheme.target)
        if alpha is None:
            raise UnauthorizedSetError()
        return sum(a * v for a, v in zip(alpha, values)) % self.scheme.p

    def realized_structure(self) -> AccessStructure:
        """Structure over re-indexed survivors realized by the stored rows plus public rows."""

        def accepts(a: frozenset[int]) -> bool:
            rows = self.scheme.rows_of(a)
            matrix = self.scheme.matrix.select(rows).stack(self.public)
            return solve_in_span(matrix, self.scheme.target) is not None

        return access.from_predicate(self.scheme.n, accepts)


@dataclass(frozen=True)
class RelocationPlan:
    """Topology of one relocation: where every stored element comes from.

    ``transfer`` has one row per stored element (scheme rows, then public
    rows) and one column per original share; stored values are
    ``transfer @ old_values``.
    """

    method: str
    original: Msp
    removed: frozenset[int]
    scheme: Msp
    public: FieldMatrix
    transfer: FieldMatrix
    reindex: tuple[int, ...]
    contraction: Optional[Contraction] = None

    def apply(self, shares: ShareVector | Sequence[int]) -> RelocationOutcome:
        values = _share_values(self.original, shares)
        stored = self.transfer.apply(values)
        k = self.scheme.ell
        return RelocationOutcome(
            method=self.method,
            original=self.original,
            removed=self.removed,
            scheme=self.scheme,
            values=stored[:k],
            public=self.public,
            public_values=stored[k:],
            reindex=self.reindex,
            contraction=self.contraction,
        )

    @property
    def stored_elements(self) -> int:
        return self.transfer.nrows

    def element_counts(self) -> dict[int, int]:
        counts = Counter(self.scheme.psi)
        return {self.reindex[j - 1]: counts[j] for j in range(1, self.scheme.n + 1)}

    def moved_elements(self) -> int:
        """Copies of Q's shares that leave Q's servers."""
        q_rows = set(self.original.rows_of(self.removed))
        if self.method == "lc":
            # Q's shares are broadcast to every survivor
            return len(q_rows) * self.scheme.n
        moved = 0
        for row in self.transfer.rows:
            nz = [j for j, x in enumerate(row) if x]
            if len(nz) == 1 and nz[0] in q_rows:
                moved += 1
        return moved


def _share_values(m: Msp, shares: ShareVector | Sequence[int]) -> tuple[int, ...]:
    if isinstance(shares, ShareVector):
        if shares.psi != m.psi:
            raise ValidationError("share vector does not match the MSP's row map")
        values = shares.values
    else:
        values = tuple(shares)
    if len(values) != m.ell:
        raise ValidationError(f"expected {m.ell} shares, got {len(values)}")
    return tuple(int(v) % m.p for v in values)


def _check_q(m: Msp, q: Iterable[int]) -> frozenset[int]:
    qs = frozenset(q)
    for i in qs:
        if not 1 <= i <= m.n:
            raise ValidationError(f"server {i} outside 1..{m.n}")
    if qs and m.accepts(qs):
        raise AuthorizedSetError()
    return qs


def _survivors(m: Msp, qs: frozenset[int]) -> tuple[tuple[int, ...], dict[int, int]]:
    reindex = tuple(i for i in range(1, m.n + 1) if i not in qs)
    return reindex, {old: new for new, old in enumerate(reindex, start=1)}


def _unit(size: int, j: int) -> tuple[int, ...]:
    return tuple(1 if i == j else 0 for i in range(size))


def _copy_plan(
    method: str, m: Msp, qs: frozenset[int], extra: Sequence[tuple[int, int]], public_rows: Sequence[int] = ()
) -> RelocationPlan:
    """Survivors keep their rows; ``extra`` lists (original row, original server) copies."""
    reindex, lookup = _survivors(m, qs)
    keep = [j for j in range(m.ell) if m.psi[j] not in qs]
    rows = [m.matrix.rows[j] for j in keep] + [m.matrix.rows[j] for j, _ in extra]
    psi = [lookup[m.psi[j]] for j in keep] + [lookup[s] for _, s in extra]
    sources = keep + [j for j, _ in extra] + list(public_rows)
    scheme = Msp(FieldMatrix(m.p, tuple(rows), m.d), tuple(psi), len(reindex))
    public = m.matrix.select(public_rows)
    transfer = FieldMatrix(m.p, tuple(_unit(m.ell, j) for j in sources), m.ell)
    return RelocationPlan(method, m, qs, scheme, public, transfer, reindex)


def _identity_plan(method: str, m: Msp) -> RelocationPlan:
    return _copy_plan(method, m, frozenset(), ())


def plan_lc(m: Msp, q: Iterable[int]) -> RelocationPlan:
    qs = _check_q(m, q)
    if not qs:
        return _identity_plan("lc", m)
    c = contract(m, qs)
    p = m.p
    transfer_rows = []
    for i, coeffs in zip(c.surviving_rows, c.coefficients):
        row = [0] * m.ell
        row[i] = 1
        for w, cw in zip(c.W, coeffs):
            row[w] = (row[w] - cw) % p
        transfer_rows.append(tuple(row))
    return RelocationPlan(
        "lc", m, qs, c.msp, FieldMatrix(p, (), m.d),
        FieldMatrix(p, tuple(transfer_rows), m.ell), c.reindex, c,
    )


def plan_ps(m: Msp, q: Iterable[int]) -> RelocationPlan:
    qs = _check_q(m, q)
    return _copy_plan("ps", m, qs, (), public_rows=m.rows_of(qs))


def plan_is(m: Msp, q: Iterable[int]) -> RelocationPlan:
    qs = _check_q(m, q)
    if not qs:
        return _identity_plan("is", m)
    reindex, lookup = _survivors(m, qs)
    q_rows = m.rows_of(qs)
    # Q's own rows stay in place and go to the first survivor; the other
    # survivors get appended copies, so H' = H followed by n-m-1 copies of H_Q.
    rows = list(m.matrix.rows)
    psi = [lookup[m.psi[j]] if m.psi[j] not in qs else 1 for j in range(m.ell)]
    sources = list(range(m.ell))
    for server in reindex[1:]:
        for j in q_rows:
            rows.append(m.matrix.rows[j])
            psi.append(lookup[server])
            sources.append(j)
    scheme = Msp(FieldMatrix(m.p, tuple(rows), m.d), tuple(psi), len(reindex))
    transfer = FieldMatrix(m.p, tuple(_unit(m.ell, j) for j in sources), m.ell)
    return RelocationPlan("is", m, qs, scheme, FieldMatrix(m.p, (), m.d), transfer, reindex)


def _greedy_hitting_set(sets: Sequence[frozenset[int]], universe: Sequence[int]) -> list[int]:
    unhit = list(sets)
    chosen: list[int] = []
    while unhit:
        best = max(universe, key=lambda s: (sum(s in a for a in unhit), -s))
        chosen.append(best)
        unhit = [a for a in unhit if best not in a]
    return sorted(chosen)


def plan_cs(m: Msp, q: Iterable[int], gamma: Optional[AccessStructure] = None) -> RelocationPlan:
    """Collective storage.

    Threshold structures: each of Q's shares is copied onto ``n - t + 1``
    survivors, placed round-robin in ascending server order.  Otherwise
    every server of a greedy hitting set of the contracted basis stores all of
    Q's shares.
    """
    qs = _check_q(m, q)
    if not qs:
        return _identity_plan("cs", m)
    if gamma is None:
        gamma = realized_structure(m)
    if gamma.n != m.n:
        raise ValidationError("access structure and MSP disagree on participant count")
    reindex, _ = _survivors(m, qs)
    q_rows = m.rows_of(qs)
    extra: list[tuple[int, int]] = []
    tn = gamma.threshold_parameters()
    if tn is not None:
        t, n = tn
        copies = n - t + 1
        cursor = 0
        for j in q_rows:
            for c in range(copies):
                extra.append((j, reindex[(cursor + c) % len(reindex)]))
            cursor += copies
    else:
        contracted = access.contract(gamma, qs)
        targets = [contracted.to_original(a) for a in contracted.structure.basis]
        holders = _greedy_hitting_set(targets, reindex)
        for j in q_rows:
            for s in holders:
                extra.append((j, s))
    # group copies by server so each survivor's rows are listed together
    extra.sort(key=lambda js: (js[1], js[0]))
    return _copy_plan("cs", m, qs, extra)


def plan(method: str, m: Msp, q: Iterable[int], gamma: Optional[AccessStructure] = None) -> RelocationPlan:
    if method == "lc":
        return plan_lc(m, q)
    if method == "ps":
        return plan_ps(m, q)
    if method == "is":
        return plan_is(m, q)
    if method == "cs":
        return plan_cs(m, q, gamma)
    raise ValidationError(f"unknown relocation method {method!r}; expected one of {METHODS}")


def relocate(method: str, m: Msp, q: Iterable[int], shares, gamma: Optional[AccessStructure] = None) -> RelocationOutcome:
    return plan(method, m, q, gamma).apply(shares)


def relocate_lc(m: Msp, q: Iterable[int], shares) -> RelocationOutcome:
    """Survivor i stores ``s_i - (h_i)_K U^{-1} s_W``."""
    return plan_lc(m, q).apply(shares)


def relocate_ps(m: Msp, q: Iterable[int], shares) -> RelocationOutcome:
    return plan_ps(m, q).apply(shares)


def relocate_is(m: Msp, q: Iterable[int], shares) -> RelocationOutcome:
    return plan_is(m, q).apply(shares)


def relocate_cs(m: Msp, q: Iterable[int], shares, gamma: Optional[AccessStructure] = None) -> RelocationOutcome:
    return plan_cs(m, q, gamma).apply(shares)


def relocate_lc_oracle(m: Msp, q: Iterable[int], shares) -> RelocationOutcome:
    """Cross-check for :func:`relocate_lc` that never forms the contracted matrix.

    Solves ``H_W v' = s_W`` for ``v' = (0, r'_2, ..., r'_d)`` supported on
    the columns K, then stores ``s_i - h_i . v'`` on each survivor.  Q's
    shares under ``v - v'`` are zero, so the reconstruction recipe is the
    original rows of the survivors plus Q's rows with known value 0.
    """
    values = _share_values(m, shares)
    qs = _check_q(m, q)
    if qs and not m.is_ideal:
        raise ValidationError("contraction is defined here for ideal MSPs only")
    reindex, lookup = _survivors(m, qs)
    q_rows = m.rows_of(qs)
    v_prime = [0] * m.d
    if q_rows:
        sub = find_invertible_submatrix(m.matrix.select(q_rows), excluded_col=0)
        W = [q_rows[w] for w in sub.W]
        # U x = s_W, solved by elimination rather than through U^{-1}
        x = solve_in_span(sub.U.transpose(), [values[w] for w in W])
        if x is None:
            raise AssertionError("invertible U must admit a solution")
        for k, xk in zip(sub.K, x):
            v_prime[k] = xk
    keep = [j for j in range(m.ell) if m.psi[j] not in qs]
    p = m.p
    new_values = tuple(
        (values[j] - sum(a * b for a, b in zip(m.matrix.rows[j], v_prime))) % p for j in keep
    )
    scheme = Msp(
        m.matrix.select(keep), tuple(lookup[m.psi[j]] for j in keep), len(reindex)
    )
    return RelocationOutcome(
        method="lc-oracle",
        original=m,
        removed=qs,
        scheme=scheme,
        values=new_values,
        public=m.matrix.select(q_rows),
        public_values=(0,) * len(q_rows),
        reindex=reindex,
    )


@dataclass(frozen=True)
class StorageMetrics:
    """Storage totals for ``z`` secrets, each element ``share_bits`` wide."""

    total_bits: int
    rho: Fraction
    share_bits: int
    z: int
    elements_per_secret: int
    max_server_elements: int

    @property
    def total_mib(self) -> float:
        return self.total_bits / 8 / _BYTES_PER_MIB

    def csv_row(self, method: str, n: int, t, m: int) -> dict:
        return {
            "method": method,
            "n": n,
            "t": "" if t is None else t,
            "m": m,
            "share_bits": self.share_bits,
            "z": self.z,
            "L_bits": self.total_bits,
            "rho": str(self.rho),
        }


def metrics(outcome: RelocationOutcome | RelocationPlan, share_bits: int, z: int) -> StorageMetrics:
    """Measured storage: every element held by a server or public storage counts once.

    The information rate considers server-held elements only.
    """
    if share_bits <= 0 or z <= 0:
        raise ValidationError("share_bits and z must be positive")
    counts = outcome.element_counts()
    elements = sum(counts.values()) + outcome.public.nrows
    max_held = max(counts.values()) if counts else 0
    return StorageMetrics(
        total_bits=elements * share_bits * z,
        rho=Fraction(1, max_held) if max_held else Fraction(0),
        share_bits=share_bits,
        z=z,
        elements_per_secret=elements,
        max_server_elements=max_held,
    )
