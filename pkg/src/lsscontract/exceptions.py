"""Exception hierarchy shared by every module of the package."""


class LssError(Exception):
    """Base class for all errors raised by lsscontract."""


class ValidationError(LssError, ValueError):
    """Malformed input: bad dimensions, out-of-range values, unparsable files."""


class UnauthorizedSetError(LssError):
    """A participant or attribute set cannot recover the secret."""

    def __init__(self, message: str = "unauthorized set"):
        super().__init__(message)


class AuthorizedSetError(LssError):
    """Contraction was requested at a set that is itself authorized."""

    def __init__(self, message: str = "cannot contract at authorized set"):
        super().__init__(message)


class InconsistentRowsError(LssError):
    """No invertible submatrix avoids the target column.

    For an ideal scheme of a connected access structure this only happens when
    the rows belong to an authorized set.
    """

    def __init__(self, message: str = "row not unauthorized-consistent"):
        super().__init__(message)
