"""JSON documents for ABE keys, ciphertexts and contraction keys.

Every document carries a ``format`` tag and, where group elements appear,
the backend description, so :func:`loads` needs no side information.
Large integers are written as decimal strings.
"""

from __future__ import annotations

import json
from typing import Union

from ..exceptions import ValidationError
from ..msp import msp_from_dict, msp_to_dict
from .pairing import backend_from_dict
from .scheme import Ciphertext, ContractionKey, MasterKey, PublicKey, RestrictedKey, SecretKey

__all__ = ["to_dict", "from_dict", "dumps", "loads"]

AbeObject = Union[PublicKey, MasterKey, SecretKey, Ciphertext, ContractionKey, RestrictedKey]

_PK, _MSK, _SK, _CT, _CK, _CKQ = (
    f"lsscontract.abe.{kind}/1" for kind in ("pk", "msk", "sk", "ct", "ck", "ck-restricted")
)


def to_dict(obj: AbeObject, backend=None) -> dict:
    """Serialize; a :class:`MasterKey` needs ``backend`` since it does not carry one."""
    if isinstance(obj, PublicKey):
        be = obj.backend
        return {
            "format": _PK,
            "backend": be.to_dict(),
            "g": be.g_to_json(obj.g),
            "g_a": be.g_to_json(obj.g_a),
            "egg_beta": be.gt_to_json(obj.egg_beta),
            "T": {x: be.g_to_json(t) for x, t in obj.T.items()},
        }
    if isinstance(obj, MasterKey):
        if backend is None:
            raise ValidationError("serializing a master key needs its backend")
        return {"format": _MSK, "backend": backend.to_dict(), "g_beta": backend.g_to_json(obj.g_beta)}
    if isinstance(obj, SecretKey):
        be = obj.backend
        return {
            "format": _SK,
            "backend": be.to_dict(),
            "attributes": sorted(obj.attributes),
            "K": be.g_to_json(obj.K),
            "L": be.g_to_json(obj.L),
            "Kx": {x: be.g_to_json(k) for x, k in sorted(obj.Kx.items())},
        }
    if isinstance(obj, Ciphertext):
        be = obj.backend
        return {
            "format": _CT,
            "backend": be.to_dict(),
            "msp": msp_to_dict(obj.msp),
            "policy": list(obj.policy),
            "C": be.gt_to_json(obj.C),
            "C_prime": be.g_to_json(obj.C_prime),
            "C_rows": [be.g_to_json(c) for c in obj.C_rows],
            "D_rows": [be.g_to_json(d) for d in obj.D_rows],
            "row_ids": list(obj.row_ids),
            "unblinded": {str(k): str(v) for k, v in sorted(obj.unblinded.items())},
            "removed": sorted(obj.removed),
        }
    if isinstance(obj, ContractionKey):
        out = {"format": _CK, "modulus": str(obj.p), "length": obj.length}
        if obj.seed is not None:
            out["seed"] = obj.seed.hex()
        else:
            out["values"] = [str(v) for v in obj.values]
        return out
    if isinstance(obj, RestrictedKey):
        return {"format": _CKQ, "values": {str(k): str(v) for k, v in sorted(obj.values.items())}}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_dict(data: dict) -> AbeObject:
    try:
        fmt = data["format"]
        if fmt == _CK:
            p, length = int(data["modulus"]), int(data["length"])
            if "seed" in data:
                return ContractionKey.from_seed(bytes.fromhex(data["seed"]), p, length)
            return ContractionKey(p, length, values=tuple(int(v) for v in data["values"]))
        if fmt == _CKQ:
            return RestrictedKey({int(k): int(v) for k, v in data["values"].items()})
        be = backend_from_dict(data["backend"])
        if fmt == _PK:
            return PublicKey(
                be,
                be.g_from_json(data["g"]),
                be.g_from_json(data["g_a"]),
                be.gt_from_json(data["egg_beta"]),
                {x: be.g_from_json(t) for x, t in data["T"].items()},
            )
        if fmt == _MSK:
            return MasterKey(be.g_from_json(data["g_beta"]))
        if fmt == _SK:
            return SecretKey(
                be,
                frozenset(data["attributes"]),
                be.g_from_json(data["K"]),
                be.g_from_json(data["L"]),
                {x: be.g_from_json(k) for x, k in data["Kx"].items()},
            )
        if fmt == _CT:
            return Ciphertext(
                backend=be,
                msp=msp_from_dict(data["msp"]),
                policy=tuple(data["policy"]),
                C=be.gt_from_json(data["C"]),
                C_prime=be.g_from_json(data["C_prime"]),
                C_rows=tuple(be.g_from_json(c) for c in data["C_rows"]),
                D_rows=tuple(be.g_from_json(d) for d in data["D_rows"]),
                row_ids=tuple(int(i) for i in data["row_ids"]),
                unblinded={int(k): int(v) for k, v in data.get("unblinded", {}).items()},
                removed=frozenset(data.get("removed", ())),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed ABE document: {exc!r}") from exc
    raise ValidationError(f"unknown ABE document format {fmt!r}")


def dumps(obj: AbeObject, backend=None) -> str:
    return json.dumps(to_dict(obj, backend), indent=2)


def loads(text: str) -> AbeObject:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ValidationError("expected a JSON object")
    return from_dict(data)
