"""Prime-field arithmetic and dense linear algebra over F_p.

Field elements are plain Python ``int`` values in ``[0, p)``; arbitrary
precision integers cover both the 16-bit storage prime and the 160-bit
pairing-group order with the same code path.  Matrices are immutable
row-major tuples.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .exceptions import InconsistentRowsError, ValidationError

__all__ = [
    "PrimeField",
    "FieldMatrix",
    "Submatrix",
    "is_prime",
    "rref",
    "rank",
    "solve_in_span",
    "in_span",
    "inverse",
    "find_invertible_submatrix",
]

_TRIAL_DIVISION_LIMIT = 1 << 32


@functools.lru_cache(maxsize=64)
def is_prime(n: int) -> bool:
    """Trial division for desk-scale moduli, BPSW (via sympy) above 2**32."""
    if n < 2:
        return False
    if n < _TRIAL_DIVISION_LIMIT:
        if n % 2 == 0:
            return n == 2
        f = 3
        while f * f <= n:
            if n % f == 0:
                return False
            f += 2
        return True
    from sympy import isprime

    return bool(isprime(n))


@dataclass(frozen=True)
class PrimeField:
    """The field Z/pZ for a prime p."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise ValidationError(f"modulus {self.p!r} is not prime")

    def __call__(self, value: int) -> int:
        return value % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return (a * self.inv(b)) % self.p

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def contains(self, value: int) -> bool:
        return isinstance(value, int) and 0 <= value < self.p


@dataclass(frozen=True)
class FieldMatrix:
    """Dense matrix over F_p.

    ``ncols`` is stored explicitly so that matrices with zero rows still
    carry their width.
    """

    p: int
    rows: tuple[tuple[int, ...], ...]
    ncols: int

    def __post_init__(self):
        for row in self.rows:
            if len(row) != self.ncols:
                raise ValidationError("ragged matrix rows")
            for x in row:
                if not 0 <= x < self.p:
                    raise ValidationError(f"entry {x} outside [0, {self.p})")

    @classmethod
    def from_rows(
        cls, p: int, rows: Iterable[Sequence[int]], ncols: Optional[int] = None
    ) -> "FieldMatrix":
        """Build a matrix, reducing every entry mod p."""
        reduced = tuple(tuple(int(x) % p for x in row) for row in rows)
        if ncols is None:
            if not reduced:
                raise ValidationError("ncols is required for a matrix with no rows")
            ncols = len(reduced[0])
        return cls(p, reduced, ncols)

    @classmethod
    def identity(cls, p: int, size: int) -> "FieldMatrix":
        return cls(
            p,
            tuple(tuple(1 if i == j else 0 for j in range(size)) for i in range(size)),
            size,
        )

    @classmethod
    def zeros(cls, p: int, nrows: int, ncols: int) -> "FieldMatrix":
        return cls(p, tuple((0,) * ncols for _ in range(nrows)), ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, index: int) -> tuple[int, ...]:
        return self.rows[index]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def select(
        self, rows: Optional[Sequence[int]] = None, cols: Optional[Sequence[int]] = None
    ) -> "FieldMatrix":
        """Submatrix on the given row and column indices (in the given order)."""
        picked = self.rows if rows is None else tuple(self.rows[i] for i in rows)
        if cols is None:
            return FieldMatrix(self.p, tuple(picked), self.ncols)
        return FieldMatrix(
            self.p, tuple(tuple(r[j] for j in cols) for r in picked), len(cols)
        )

    def stack(self, other: "FieldMatrix") -> "FieldMatrix":
        if other.p != self.p or other.ncols != self.ncols:
            raise ValidationError("cannot stack matrices of different shape or field")
        return FieldMatrix(self.p, self.rows + other.rows, self.ncols)

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(
            self.p,
            tuple(tuple(r[j] for r in self.rows) for j in range(self.ncols)),
            self.nrows,
        )

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if other.p != self.p:
            raise ValidationError("matrices over different fields")
        if self.ncols != other.nrows:
            raise ValidationError(f"shape mismatch {self.shape} @ {other.shape}")
        p = self.p
        cols = other.transpose().rows
        return FieldMatrix(
            p,
            tuple(
                tuple(sum(a * b for a, b in zip(r, c)) % p for c in cols)
                for r in self.rows
            ),
            other.ncols,
        )

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Matrix-vector product ``M v``."""
        if len(vector) != self.ncols:
            raise ValidationError("vector length does not match column count")
        p = self.p
        return tuple(sum(a * b for a, b in zip(r, vector)) % p for r in self.rows)

    def combine(self, coefficients: Sequence[int]) -> tuple[int, ...]:
        """Row combination ``alpha^T M``."""
        if len(coefficients) != self.nrows:
            raise ValidationError("coefficient count does not match row count")
        p = self.p
        out = [0] * self.ncols
        for c, row in zip(coefficients, self.rows):
            if c:
                for j, x in enumerate(row):
                    out[j] += c * x
        return tuple(x % p for x in out)


def _rref_rows(rows: list[list[int]], ncols: int, p: int) -> list[int]:
    """Reduce ``rows`` in place to reduced row echelon form; return pivot columns.

    Pivot choice is the first nonzero entry scanning rows top-down within the
    leftmost remaining column.
    """
    pivots: list[int] = []
    nrows = len(rows)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        sel = None
        for i in range(r, nrows):
            if rows[i][c]:
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        piv = rows[r]
        inv = pow(piv[c], -1, p)
        if inv != 1:
            piv[:] = [(x * inv) % p for x in piv]
        for i in range(nrows):
            if i != r:
                row = rows[i]
                f = row[c]
                if f:
                    row[:] = [(x - f * y) % p for x, y in zip(row, piv)]
        pivots.append(c)
        r += 1
    return pivots


def rref(m: FieldMatrix) -> tuple[FieldMatrix, tuple[int, ...]]:
    """Reduced row echelon form and the pivot columns."""
    rows = [list(r) for r in m.rows]
    pivots = _rref_rows(rows, m.ncols, m.p)
    return FieldMatrix(m.p, tuple(tuple(r) for r in rows), m.ncols), tuple(pivots)


def rank(m: FieldMatrix) -> int:
    """Row rank over F_p; 0 for an empty matrix."""
    if m.nrows == 0 or m.ncols == 0:
        return 0
    rows = [list(r) for r in m.rows]
    return len(_rref_rows(rows, m.ncols, m.p))


def solve_in_span(rows: FieldMatrix, target: Sequence[int]) -> Optional[tuple[int, ...]]:
    """Find alpha with ``alpha^T rows = target^T``, or None if target is outside the span.

    Free variables are set to zero, so the answer is deterministic.
    """
    if len(target) != rows.ncols:
        raise ValidationError(
            f"target has length {len(target)}, rows have {rows.ncols} columns"
        )
    p = rows.p
    ell = rows.nrows
    # augmented system rows^T alpha = target: one equation per column of rows
    aug = [[rows.rows[i][j] for i in range(ell)] + [target[j] % p] for j in range(rows.ncols)]
    pivots = _rref_rows(aug, ell + 1, p)
    if pivots and pivots[-1] == ell:
        return None
    alpha = [0] * ell
    for r, c in enumerate(pivots):
        alpha[c] = aug[r][ell]
    return tuple(alpha)


def in_span(rows: FieldMatrix, target: Sequence[int]) -> bool:
    return solve_in_span(rows, target) is not None


def inverse(m: FieldMatrix) -> FieldMatrix:
    """Inverse of a square matrix; ValidationError if singular."""
    n = m.nrows
    if n != m.ncols:
        raise ValidationError("cannot invert a non-square matrix")
    p = m.p
    if n == 0:
        return FieldMatrix(p, (), 0)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(m.rows)]
    pivots = _rref_rows(aug, 2 * n, p)
    if len(pivots) < n or pivots[n - 1] != n - 1:
        raise ValidationError("matrix is singular")
    return FieldMatrix(p, tuple(tuple(r[n:]) for r in aug), n)


@dataclass(frozen=True)
class Submatrix:
    """An invertible square submatrix ``U = rows[W][:, K]`` together with its inverse."""

    W: tuple[int, ...]
    K: tuple[int, ...]
    U: FieldMatrix
    U_inverse: FieldMatrix

    @property
    def order(self) -> int:
        return len(self.W)


def find_invertible_submatrix(rows: FieldMatrix, excluded_col: int = 0) -> Submatrix:
    """Pick rows W and columns K (avoiding ``excluded_col``) with ``rows[W][:, K]`` invertible
    and ``|W| = |K| = rank(rows)``.

    W is chosen greedily: scanning rows top-down, a row joins W when it is
    independent of the rows already chosen once restricted to the allowed
    columns.  K is the pivot-column set of the restricted W-rows.  Indices are
    0-based.

    Raises InconsistentRowsError when the restriction loses rank, i.e. when
    ``rows`` span a vector supported only on ``excluded_col``.
    """
    if not 0 <= excluded_col < rows.ncols:
        raise ValidationError("excluded column out of range")
    p = rows.p
    allowed = [j for j in range(rows.ncols) if j != excluded_col]
    full_rank = rank(rows)

    W: list[int] = []
    basis: list[list[int]] = []
    for i, row in enumerate(rows.rows):
        candidate = basis + [[row[j] for j in allowed]]
        if len(_rref_rows([list(b) for b in candidate], len(allowed), p)) == len(candidate):
            W.append(i)
            basis = candidate
        if len(W) == full_rank:
            break
    if len(W) < full_rank:
        raise InconsistentRowsError()

    restricted = FieldMatrix(p, tuple(tuple(b) for b in basis), len(allowed))
    _, piv = rref(restricted)
    K = tuple(allowed[j] for j in piv)
    U = rows.select(W, K)
    return Submatrix(tuple(W), K, U, inverse(U))
