"""scikit-learn style wrappers for batch sharing and relocation.

Rows of the arrays are secrets, columns are share slots, so a whole batch of
``z`` secrets goes through one linear map::

    from sklearn.pipeline import make_pipeline

    pipe = make_pipeline(MspSharer(m, random_state=7),
                         ShareRelocator(m, removed=(4,), method="lc"))
    stored = pipe.fit_transform(secrets)
"""

from __future__ import annotations

import random
from typing import Iterable, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .access import AccessStructure
from .exceptions import UnauthorizedSetError, ValidationError
from .galois import FieldMatrix, solve_in_span
from .msp import Msp
from .relocate import METHODS, StorageMetrics, metrics, plan

__all__ = ["MspSharer", "ShareRelocator", "check_field_array", "matmul_mod"]


def _dtype_for(p: int, inner: int):
    # int64 is exact while every partial dot product stays below 2**63
    if (p - 1) ** 2 * max(inner, 1) < (1 << 63):
        return np.int64
    return object


def check_field_array(X, p: int, n_columns: Optional[int] = None, *, ensure_2d: bool = True) -> np.ndarray:
    """Validate an integer array of F_p elements and return it in a safe dtype."""
    arr = np.asarray(X)
    if arr.dtype == object:
        if not all(isinstance(x, (int, np.integer)) for x in arr.flat):
            raise ValidationError("field arrays must hold integers")
    elif not np.issubdtype(arr.dtype, np.integer):
        raise ValidationError(f"field arrays must have an integer dtype, got {arr.dtype}")
    if ensure_2d:
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValidationError(f"expected a 2D array, got {arr.ndim} dimensions")
        if n_columns is not None and arr.shape[1] != n_columns:
            raise ValidationError(f"expected {n_columns} columns, got {arr.shape[1]}")
    if arr.size and (min(int(x) for x in arr.flat) < 0 or max(int(x) for x in arr.flat) >= p):
        raise ValidationError(f"entries must lie in [0, {p})")
    target = _dtype_for(p, arr.shape[-1] if arr.ndim else 1)
    if target is object:
        out = np.empty(arr.shape, dtype=object)
        out.flat[:] = [int(x) for x in arr.flat]
        return out
    return arr.astype(np.int64, copy=False)


def matmul_mod(X: np.ndarray, M: FieldMatrix) -> np.ndarray:
    """``X @ M.T mod p`` for a batch ``X`` of vectors."""
    p = M.p
    inner = M.ncols
    if _dtype_for(p, inner) is object:
        Mt = np.array(M.transpose().tolist(), dtype=object).reshape(inner, M.nrows)
        return np.mod(X.astype(object).dot(Mt), p)
    Mt = np.array(M.transpose().tolist(), dtype=np.int64).reshape(inner, M.nrows)
    return np.mod(X.astype(np.int64) @ Mt, p)


class MspSharer(TransformerMixin, BaseEstimator):
    """Turn a column of secrets into rows of shares (and back).

    Parameters
    ----------
    msp : Msp
        The sharing scheme.
    random_state : int or random.Random
        Seed for the sharing randomness; required.
    """

    def __init__(self, msp: Optional[Msp] = None, random_state=None):
        self.msp = msp
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if not isinstance(self.msp, Msp):
            raise ValidationError("MspSharer needs an Msp")
        if self.random_state is None:
            raise ValidationError("random_state is required for reproducible sharing")
        self.n_features_in_ = 1
        self.p_ = self.msp.p
        return self

    def _rng(self) -> random.Random:
        if isinstance(self.random_state, random.Random):
            return self.random_state
        return random.Random(self.random_state)

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "p_")
        secrets = check_field_array(X, self.p_, 1)
        rng = self._rng()
        d = self.msp.d
        V = [[int(s)] + [rng.randrange(self.p_) for _ in range(d - 1)] for s in secrets[:, 0]]
        V = check_field_array(np.array(V, dtype=object), self.p_, d)
        return matmul_mod(V, self.msp.matrix)

    def inverse_transform(self, S, participants: Optional[Iterable[int]] = None) -> np.ndarray:
        """Reconstruct one secret per row from the shares of ``participants`` (default: all)."""
        check_is_fitted(self, "p_")
        m = self.msp
        S = check_field_array(S, self.p_, m.ell)
        a = range(1, m.n + 1) if participants is None else participants
        rows = m.rows_of(a)
        alpha = solve_in_span(m.matrix.select(rows), m.target)
        if alpha is None:
            raise UnauthorizedSetError()
        weights = FieldMatrix(self.p_, (tuple(alpha),), len(rows))
        return matmul_mod(S[:, list(rows)], weights)[:, 0]


class ShareRelocator(TransformerMixin, BaseEstimator):
    """Relocate batches of shares after removing servers ``removed``.

    ``fit`` builds the relocation plan from the parameters; ``transform``
    maps an ``(z, ell)`` share array to the ``(z, stored)`` array of values
    held after relocation (scheme rows first, public storage last).
    """

    def __init__(
        self,
        msp: Optional[Msp] = None,
        removed: tuple = (),
        method: str = "lc",
        structure: Optional[AccessStructure] = None,
    ):
        self.msp = msp
        self.removed = removed
        self.method = method
        self.structure = structure

    def fit(self, X=None, y=None):
        if not isinstance(self.msp, Msp):
            raise ValidationError("ShareRelocator needs an Msp")
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}")
        self.plan_ = plan(self.method, self.msp, self.removed, self.structure)
        self.n_features_in_ = self.msp.ell
        if X is not None:
            check_field_array(X, self.msp.p, self.msp.ell)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "plan_")
        X = check_field_array(X, self.msp.p, self.msp.ell)
        return matmul_mod(X, self.plan_.transfer)

    @property
    def scheme_(self) -> Msp:
        check_is_fitted(self, "plan_")
        return self.plan_.scheme

    def reconstruct(self, stored, servers: Iterable[int]) -> np.ndarray:
        """Secrets recoverable by ``servers`` (original labels) from transformed output."""
        check_is_fitted(self, "plan_")
        plan_ = self.plan_
        stored = check_field_array(stored, self.msp.p, plan_.stored_elements)
        lookup = {old: new for new, old in enumerate(plan_.reindex, start=1)}
        try:
            rows = list(plan_.scheme.rows_of(lookup[s] for s in servers))
        except KeyError as exc:
            raise ValidationError(f"server {exc.args[0]} is not a survivor") from None
        rows += list(range(plan_.scheme.ell, plan_.stored_elements))
        basis = plan_.scheme.matrix.stack(plan_.public).select(rows)
        alpha = solve_in_span(basis, plan_.scheme.target)
        if alpha is None:
            raise UnauthorizedSetError()
        weights = FieldMatrix(self.msp.p, (tuple(alpha),), len(rows))
        return matmul_mod(stored[:, rows], weights)[:, 0]

    def storage_metrics(self, share_bits: int, z: int) -> StorageMetrics:
        check_is_fitted(self, "plan_")
        return metrics(self.plan_, share_bits, z)
