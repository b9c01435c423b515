class AdelicError(Exception):
    """Base class for errors raised by the package."""


class InvalidBundle(AdelicError, ValueError):
    pass


class CapExceeded(AdelicError):
    """A configured resource cap would be exceeded; raised instead of hanging."""


class Indeterminate(AdelicError):
    """An ultrametric valuation cannot be certified from the bundle data."""
