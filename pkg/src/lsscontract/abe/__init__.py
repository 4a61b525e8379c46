"""CP-ABE with contraction over an abstract bilinear pairing."""

from .pairing import DebugG, DebugGT, DebugPairing, PairingBackend, backend_from_dict
from .scheme import (
    Ciphertext,
    CiphertextSize,
    ContractionKey,
    MasterKey,
    PublicKey,
    RestrictedKey,
    SecretKey,
    ciphertext_size,
    contract_ect,
    contract_re,
    contract_sct,
    decrypt,
    encrypt_star,
    keygen,
    prf_scalar,
    setup,
)

__all__ = [
    "PairingBackend", "DebugPairing", "DebugG", "DebugGT", "backend_from_dict",
    "PublicKey", "MasterKey", "SecretKey", "Ciphertext", "ContractionKey", "RestrictedKey",
    "CiphertextSize", "prf_scalar", "setup", "keygen", "encrypt_star", "decrypt",
    "contract_sct", "contract_ect", "contract_re", "ciphertext_size",
]
