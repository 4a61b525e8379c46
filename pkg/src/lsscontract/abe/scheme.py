"""Ciphertext-policy ABE with contraction of the ciphertext's access structure.

The base scheme is Waters' LSSS-based CP-ABE.  Encryption additionally
returns a contraction key CK holding the per-row randomness ``r_i``; handing
a server the restriction of CK to an unauthorized attribute set Q lets it
rewrite the ciphertext for the contracted structure without touching any
user key.  Three ways to do that are provided:

``contract_sct``
    fold Q's rows into the remaining ``C_i`` using the MSP contraction
    certificate; the ciphertext gets shorter.
``contract_ect``
    append CK_Q so decryptors can unblind Q's rows themselves; the
    ciphertext gets longer.
``contract_re``
    decrypt with an authorized key and re-encrypt under a fresh MSP for the
    contracted structure (the baseline).

Policies map MSP participant labels ``1..n`` to attribute names.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .. import access
from ..access import AccessStructure
from ..exceptions import AuthorizedSetError, UnauthorizedSetError, ValidationError
from ..msp import Msp, contract_multi, contract_single, realized_structure, shamir
from .pairing import PairingBackend

__all__ = [
    "PublicKey",
    "MasterKey",
    "SecretKey",
    "Ciphertext",
    "ContractionKey",
    "RestrictedKey",
    "CiphertextSize",
    "prf_scalar",
    "setup",
    "keygen",
    "encrypt_star",
    "decrypt",
    "contract_sct",
    "contract_ect",
    "contract_re",
    "ciphertext_size",
]

_PRF_DOMAIN = b"lsscontract/ck/v1"


@dataclass(frozen=True)
class PublicKey:
    backend: PairingBackend
    g: object
    g_a: object
    egg_beta: object
    T: Mapping[str, object]

    @property
    def universe(self) -> tuple[str, ...]:
        return tuple(self.T)


@dataclass(frozen=True)
class MasterKey:
    g_beta: object


@dataclass(frozen=True)
class SecretKey:
    backend: PairingBackend
    attributes: frozenset[str]
    K: object
    L: object
    Kx: Mapping[str, object]


@dataclass(frozen=True)
class Ciphertext:
    """Waters ciphertext, possibly contracted.

    ``row_ids[i]`` is the contraction-key index of row ``i`` (rows keep their
    index from the first encryption through any number of contractions).
    ``unblinded`` maps row ids to the ``r`` values appended by
    :func:`contract_ect`.
    """

    backend: PairingBackend
    msp: Msp
    policy: tuple[str, ...]
    C: object
    C_prime: object
    C_rows: tuple
    D_rows: tuple
    row_ids: tuple[int, ...]
    unblinded: Mapping[int, int] = field(default_factory=dict)
    removed: frozenset[str] = frozenset()

    def attribute_of_row(self, i: int) -> str:
        return self.policy[self.msp.psi[i] - 1]

    def labels_of(self, attributes: Iterable[str]) -> frozenset[int]:
        attrs = frozenset(attributes)
        return frozenset(j for j, a in enumerate(self.policy, start=1) if a in attrs)

    def rows_of_attributes(self, attributes: Iterable[str]) -> tuple[int, ...]:
        return self.msp.rows_of(self.labels_of(attributes))


def prf_scalar(seed: bytes, index: int, p: int) -> int:
    """Keyed hash of a row index, mapped uniformly onto Z_p by rejection sampling."""
    nbits = p.bit_length()
    nbytes = (nbits + 7) // 8
    mask = (1 << nbits) - 1
    counter = 0
    while True:
        stream = b""
        block = 0
        while len(stream) < nbytes:
            msg = _PRF_DOMAIN + b"|" + index.to_bytes(8, "big") + counter.to_bytes(4, "big") + block.to_bytes(4, "big")
            stream += hmac.new(seed, msg, hashlib.sha256).digest()
            block += 1
        x = int.from_bytes(stream[:nbytes], "big") & mask
        if x < p:
            return x
        counter += 1


@dataclass(frozen=True)
class ContractionKey:
    """Owner-held randomness ``r_i`` for rows ``0..length-1``: explicit, or derived from a PRF seed."""

    p: int
    length: int
    seed: Optional[bytes] = None
    values: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if (self.seed is None) == (self.values is None):
            raise ValidationError("a contraction key is either a PRF seed or an explicit list")
        if self.values is not None and len(self.values) != self.length:
            raise ValidationError("explicit contraction key has the wrong length")

    @classmethod
    def from_seed(cls, seed: bytes, p: int, length: int) -> "ContractionKey":
        return cls(p, length, seed=bytes(seed))

    def r(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise ValidationError(f"row {i} outside the contraction key")
        if self.values is not None:
            return self.values[i]
        return prf_scalar(self.seed, i, self.p)

    def explicit(self) -> "ContractionKey":
        return ContractionKey(self.p, self.length, values=tuple(self.r(i) for i in range(self.length)))

    def restrict(self, ct: Ciphertext, attributes: Iterable[str]) -> "RestrictedKey":
        """CK_Q: the r values of the rows labelled by ``attributes`` in ``ct``."""
        rows = ct.rows_of_attributes(attributes)
        return RestrictedKey({ct.row_ids[i]: self.r(ct.row_ids[i]) for i in rows})


@dataclass(frozen=True)
class RestrictedKey:
    values: Mapping[int, int]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CiphertextSize:
    """Ciphertext length in abstract units."""

    target: int
    source: int
    matrix_scalars: int
    map_entries: int
    ck_scalars: int

    @property
    def group_elements(self) -> int:
        return self.target + self.source

    @property
    def total(self) -> int:
        return self.target + self.source + self.matrix_scalars + self.map_entries + self.ck_scalars


def setup(backend: PairingBackend, universe: Sequence[str], rng: random.Random) -> tuple[PublicKey, MasterKey]:
    universe = tuple(universe)
    if not universe:
        raise ValidationError("attribute universe must be nonempty")
    if len(set(universe)) != len(universe):
        raise ValidationError("duplicate attribute names")
    g = backend.generator()
    beta = backend.random_scalar(rng)
    a = backend.random_scalar(rng)
    T = {x: backend.random_element(rng) for x in universe}
    pk = PublicKey(backend, g, backend.exp(g, a), backend.pair(g, backend.exp(g, beta)), T)
    return pk, MasterKey(backend.exp(g, beta))


def keygen(pk: PublicKey, msk: MasterKey, attributes: Iterable[str], rng: random.Random) -> SecretKey:
    attrs = frozenset(attributes)
    unknown = attrs - set(pk.T)
    if unknown:
        raise ValidationError(f"attributes outside the universe: {sorted(unknown)}")
    be = pk.backend
    tau = be.random_scalar(rng)
    K = be.mul(msk.g_beta, be.exp(pk.g_a, tau))
    L = be.exp(pk.g, tau)
    Kx = {x: be.exp(pk.T[x], tau) for x in sorted(attrs)}
    return SecretKey(be, attrs, K, L, Kx)


def _check_policy(pk: PublicKey, msp: Msp, policy: Sequence[str]) -> tuple[str, ...]:
    policy = tuple(policy)
    if len(policy) != msp.n:
        raise ValidationError("policy must name one attribute per MSP participant")
    if len(set(policy)) != len(policy):
        raise ValidationError("an attribute may label only one participant")
    unknown = set(policy) - set(pk.T)
    if unknown:
        raise ValidationError(f"policy attributes outside the universe: {sorted(unknown)}")
    if msp.p != pk.backend.order:
        raise ValidationError("MSP field must be Z_p for the pairing group order p")
    return policy


def encrypt_star(
    pk: PublicKey,
    message,
    msp: Msp,
    policy: Sequence[str],
    rng: random.Random,
    *,
    gamma: Optional[AccessStructure] = None,
    ck: Optional[ContractionKey] = None,
    sharing: Optional[Sequence[int]] = None,
) -> tuple[Ciphertext, ContractionKey]:
    """Encrypt ``message`` (a G_T element) under ``msp``; also return the contraction key.

    ``gamma``, when given, is checked against the structure ``msp`` realizes.
    The contraction key defaults to a PRF seed drawn from ``rng``.
    ``sharing`` fixes ``v = (s, v_2, ..., v_d)`` instead of sampling it.
    """
    be = pk.backend
    policy = _check_policy(pk, msp, policy)
    if gamma is not None and realized_structure(msp) != gamma:
        raise ValidationError("msp does not realize the given access structure")
    p = be.order
    if sharing is None:
        v = tuple(be.random_scalar(rng) for _ in range(msp.d))
    else:
        v = tuple(int(x) % p for x in sharing)
        if len(v) != msp.d:
            raise ValidationError(f"sharing vector must have length {msp.d}")
    if ck is None:
        ck = ContractionKey.from_seed(rng.randbytes(32), p, msp.ell)
    elif ck.length != msp.ell or ck.p != p:
        raise ValidationError("contraction key does not fit this MSP")
    s = v[0]
    shares = msp.matrix.apply(v)
    C = be.gt_mul(message, be.gt_exp(pk.egg_beta, s))
    C_prime = be.exp(pk.g, s)
    C_rows, D_rows = [], []
    for i, s_i in enumerate(shares):
        r_i = ck.r(i)
        T = pk.T[policy[msp.psi[i] - 1]]
        C_rows.append(be.mul(be.exp(pk.g_a, s_i), be.inv(be.exp(T, r_i))))
        D_rows.append(be.exp(pk.g, r_i))
    ct = Ciphertext(be, msp, policy, C, C_prime, tuple(C_rows), tuple(D_rows), tuple(range(msp.ell)))
    return ct, ck


def _usable(sk: SecretKey, ct: Ciphertext) -> tuple[int, ...]:
    held = set(ct.rows_of_attributes(sk.attributes))
    held |= {i for i, rid in enumerate(ct.row_ids) if rid in ct.unblinded}
    return tuple(sorted(held))


def decrypt(sk: SecretKey, ct: Ciphertext, pk: Optional[PublicKey] = None):
    """Recover the message; ``pk`` is needed only for ciphertexts extended by :func:`contract_ect`."""
    from ..galois import solve_in_span

    be = ct.backend
    rows = _usable(sk, ct)
    alpha = solve_in_span(ct.msp.matrix.select(rows), ct.msp.target)
    if alpha is None:
        raise UnauthorizedSetError("unauthorized attribute set")
    denom = be.gt_identity()
    for i, a_i in zip(rows, alpha):
        if not a_i:
            continue
        attr = ct.attribute_of_row(i)
        rid = ct.row_ids[i]
        if attr in sk.attributes:
            term = be.gt_mul(be.pair(ct.C_rows[i], sk.L), be.pair(ct.D_rows[i], sk.Kx[attr]))
        else:
            if pk is None:
                raise ValidationError("public key required to use appended contraction key")
            # C_j T^{r_j} = g^{a s_j}, so e(C_j T^{r_j}, L) = e(g,g)^{a s_j tau}
            unblinded = be.mul(ct.C_rows[i], be.exp(pk.T[attr], ct.unblinded[rid]))
            term = be.pair(unblinded, sk.L)
        denom = be.gt_mul(denom, be.gt_exp(term, a_i))
    egg_beta_s = be.gt_div(be.pair(ct.C_prime, sk.K), denom)
    return be.gt_div(ct.C, egg_beta_s)


def _removal_labels(ct: Ciphertext, q: Iterable[str]) -> frozenset[int]:
    qs = frozenset(q)
    if not qs:
        raise ValidationError("attribute set to remove is empty")
    missing = qs - set(ct.policy)
    if missing:
        raise ValidationError(f"attributes not in the ciphertext policy: {sorted(missing)}")
    return ct.labels_of(qs)


def _r_values(ct: Ciphertext, rows: Iterable[int], ck_q: RestrictedKey) -> dict[int, int]:
    out = {}
    for i in rows:
        rid = ct.row_ids[i]
        if rid not in ck_q.values:
            raise ValidationError(f"contraction key lacks r for row {rid}")
        out[i] = int(ck_q.values[rid]) % ct.backend.order
    return out


def contract_sct(pk: PublicKey, ct: Ciphertext, q: Iterable[str], ck_q: RestrictedKey) -> Ciphertext:
    """Shorter contracted ciphertext.

    Each surviving ``C_i`` absorbs the unblinded removed rows::

        C'_i = C_i * prod_w (C_w T_w^{r_w})^{-c_iw},   c_i = (h_i)_K U^{-1}

    which for one removed row is ``C_i (C_l T^{r_l})^{-h_ik/h_lk}``.
    """
    if ct.unblinded:
        raise ValidationError("contract_sct expects a ciphertext without appended key material")
    be = pk.backend
    labels = _removal_labels(ct, q)
    if len(labels) == 1:
        c = contract_single(ct.msp, labels)
    else:
        c = contract_multi(ct.msp, labels)
    r = _r_values(ct, ct.msp.rows_of(labels), ck_q)
    absorbed = {
        w: be.mul(ct.C_rows[w], be.exp(pk.T[ct.attribute_of_row(w)], r[w])) for w in c.W
    }
    p = be.order
    new_C = []
    for i, coeffs in zip(c.surviving_rows, c.coefficients):
        acc = ct.C_rows[i]
        for w, cw in zip(c.W, coeffs):
            if cw:
                acc = be.mul(acc, be.exp(absorbed[w], (-cw) % p))
        new_C.append(acc)
    return Ciphertext(
        backend=be,
        msp=c.msp,
        policy=tuple(ct.policy[old - 1] for old in c.reindex),
        C=ct.C,
        C_prime=ct.C_prime,
        C_rows=tuple(new_C),
        D_rows=tuple(ct.D_rows[i] for i in c.surviving_rows),
        row_ids=tuple(ct.row_ids[i] for i in c.surviving_rows),
        removed=ct.removed | frozenset(q),
    )


def contract_ect(ct: Ciphertext, q: Iterable[str], ck_q: RestrictedKey) -> Ciphertext:
    """Longer contracted ciphertext: append CK_Q so Q's rows become usable by anyone."""
    q = frozenset(q)
    labels = _removal_labels(ct, q)
    already = ct.labels_of(ct.removed)
    if ct.msp.accepts(labels | already):
        raise AuthorizedSetError()
    r = _r_values(ct, ct.msp.rows_of(labels), ck_q)
    unblinded = dict(ct.unblinded)
    unblinded.update({ct.row_ids[i]: v for i, v in r.items()})
    return replace(ct, unblinded=unblinded, removed=ct.removed | q)


def contract_re(
    pk: PublicKey, sk: SecretKey, ct: Ciphertext, q: Iterable[str], rng: random.Random
) -> tuple[Ciphertext, ContractionKey]:
    """Baseline: decrypt, then encrypt afresh under an ideal MSP for the contracted structure.

    Threshold policies get Shamir's ``(t - m, n - m)`` scheme; anything else
    gets the contracted MSP.  Returns the new ciphertext and its new CK.
    """
    if ct.unblinded:
        raise ValidationError("contract_re expects a ciphertext without appended key material")
    q = frozenset(q)
    labels = _removal_labels(ct, q)
    if ct.msp.accepts(labels):
        raise AuthorizedSetError()
    message = decrypt(sk, ct)
    gamma = realized_structure(ct.msp)
    contracted = access.contract(gamma, labels)
    tn = contracted.structure.threshold_parameters()
    if tn is not None:
        new_msp = shamir(tn[0], tn[1], ct.msp.p)
    else:
        new_msp = contract_multi(ct.msp, labels).msp
    policy = tuple(ct.policy[old - 1] for old in contracted.reindex)
    new_ct, ck = encrypt_star(pk, message, new_msp, policy, rng)
    return replace(new_ct, removed=ct.removed | q), ck


def ciphertext_size(ct: Ciphertext) -> CiphertextSize:
    """Counts of G_T elements, G elements, MSP matrix scalars, row-map entries and appended r values."""
    return CiphertextSize(
        target=1,
        source=1 + len(ct.C_rows) + len(ct.D_rows),
        matrix_scalars=ct.msp.ell * ct.msp.d,
        map_entries=ct.msp.ell,
        ck_scalars=len(ct.unblinded),
    )
