"""Bilinear pairing interface and an exact, insecure instantiation.

:class:`DebugPairing` represents ``g^x`` by ``x mod p`` and
``e(g, g)^y`` by ``y mod p``.  Discrete logarithms are free, so it offers no
security at all; it exists so every pairing identity of the scheme can be
checked bit-exactly.
"""

from __future__ import annotations

import abc
import random
from dataclasses import dataclass
from typing import Any

from ..exceptions import ValidationError
from ..galois import PrimeField

__all__ = ["PairingBackend", "DebugPairing", "DebugG", "DebugGT", "backend_from_dict"]


class PairingBackend(abc.ABC):
    """Source group G = <g> and target group G_T, both of prime order p, with e: G x G -> G_T."""

    name: str
    order: int

    @abc.abstractmethod
    def generator(self) -> Any: ...

    @abc.abstractmethod
    def mul(self, a, b): ...

    @abc.abstractmethod
    def exp(self, a, k: int): ...

    @abc.abstractmethod
    def inv(self, a): ...

    @abc.abstractmethod
    def pair(self, a, b): ...

    @abc.abstractmethod
    def gt_identity(self) -> Any: ...

    @abc.abstractmethod
    def gt_mul(self, a, b): ...

    @abc.abstractmethod
    def gt_exp(self, a, k: int): ...

    @abc.abstractmethod
    def gt_inv(self, a): ...

    @abc.abstractmethod
    def random_element(self, rng: random.Random): ...

    def random_scalar(self, rng: random.Random) -> int:
        return rng.randrange(self.order)

    def gt_div(self, a, b):
        return self.gt_mul(a, self.gt_inv(b))

    # serialization hooks
    @abc.abstractmethod
    def g_to_json(self, a) -> Any: ...

    @abc.abstractmethod
    def g_from_json(self, data) -> Any: ...

    @abc.abstractmethod
    def gt_to_json(self, a) -> Any: ...

    @abc.abstractmethod
    def gt_from_json(self, data) -> Any: ...

    @abc.abstractmethod
    def to_dict(self) -> dict: ...


@dataclass(frozen=True)
class DebugG:
    """``g^exponent``."""

    exponent: int


@dataclass(frozen=True)
class DebugGT:
    """``e(g, g)^exponent``."""

    exponent: int


class DebugPairing(PairingBackend):
    """INSECURE exponent-represented pairing over Z_p."""

    name = "debug-insecure"

    def __init__(self, order: int):
        PrimeField(order)
        self.order = order

    def __repr__(self) -> str:
        return f"DebugPairing(order={self.order})"

    def __eq__(self, other) -> bool:
        return isinstance(other, DebugPairing) and other.order == self.order

    def __hash__(self) -> int:
        return hash((self.name, self.order))

    def _g(self, a) -> int:
        if not isinstance(a, DebugG):
            raise TypeError(f"expected a source-group element, got {type(a).__name__}")
        return a.exponent

    def _gt(self, a) -> int:
        if not isinstance(a, DebugGT):
            raise TypeError(f"expected a target-group element, got {type(a).__name__}")
        return a.exponent

    def generator(self) -> DebugG:
        return DebugG(1)

    def mul(self, a, b) -> DebugG:
        return DebugG((self._g(a) + self._g(b)) % self.order)

    def exp(self, a, k: int) -> DebugG:
        return DebugG((self._g(a) * k) % self.order)

    def inv(self, a) -> DebugG:
        return DebugG((-self._g(a)) % self.order)

    def pair(self, a, b) -> DebugGT:
        return DebugGT((self._g(a) * self._g(b)) % self.order)

    def gt_identity(self) -> DebugGT:
        return DebugGT(0)

    def gt_mul(self, a, b) -> DebugGT:
        return DebugGT((self._gt(a) + self._gt(b)) % self.order)

    def gt_exp(self, a, k: int) -> DebugGT:
        return DebugGT((self._gt(a) * k) % self.order)

    def gt_inv(self, a) -> DebugGT:
        return DebugGT((-self._gt(a)) % self.order)

    def random_element(self, rng: random.Random) -> DebugG:
        return DebugG(rng.randrange(1, self.order))

    def dlog(self, a) -> int:
        """Discrete log of either group element (trivial here, which is why this is insecure)."""
        if isinstance(a, DebugG):
            return a.exponent
        return self._gt(a)

    def message(self, exponent: int) -> DebugGT:
        """Encode an integer as the target-group element ``e(g, g)^exponent``."""
        return DebugGT(exponent % self.order)

    def g_to_json(self, a) -> str:
        return str(self._g(a))

    def g_from_json(self, data) -> DebugG:
        return DebugG(int(data) % self.order)

    def gt_to_json(self, a) -> str:
        return str(self._gt(a))

    def gt_from_json(self, data) -> DebugGT:
        return DebugGT(int(data) % self.order)

    def to_dict(self) -> dict:
        return {"name": self.name, "order": str(self.order)}


def backend_from_dict(data: dict) -> PairingBackend:
    name = data.get("name")
    if name == DebugPairing.name:
        return DebugPairing(int(data["order"]))
    raise ValidationError(f"unknown pairing backend {name!r}")
