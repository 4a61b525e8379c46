"""Contraction of access structures for linear secret sharing.

Submodules:

* :mod:`~lsscontract.galois` -- prime fields and matrices over them
* :mod:`~lsscontract.access` -- monotone access structures and their contraction
* :mod:`~lsscontract.msp` -- monotone span programs, sharing, MSP contraction
* :mod:`~lsscontract.relocate` -- share relocation after servers leave
* :mod:`~lsscontract.estimators` -- scikit-learn style batch wrappers
* :mod:`~lsscontract.simcloud` -- deterministic multi-cloud storage simulator
* :mod:`~lsscontract.abe` -- CP-ABE whose ciphertext policies can be contracted
"""

from .access import AccessStructure, contract as contract_structure, parse_structure, threshold
from .exceptions import (
    AuthorizedSetError,
    InconsistentRowsError,
    LssError,
    UnauthorizedSetError,
    ValidationError,
)
from .galois import FieldMatrix, PrimeField
from .msp import Msp, contract, contract_multi, contract_single, reconstruct, realized_structure, shamir, share
from .relocate import metrics, relocate_lc, relocate_lc_oracle

__version__ = "0.1.0"

__all__ = [
    "AccessStructure", "contract_structure", "parse_structure", "threshold",
    "LssError", "ValidationError", "UnauthorizedSetError", "AuthorizedSetError", "InconsistentRowsError",
    "PrimeField", "FieldMatrix",
    "Msp", "share", "reconstruct", "realized_structure", "shamir", "contract", "contract_single", "contract_multi",
    "relocate_lc", "relocate_lc_oracle", "metrics",
]
