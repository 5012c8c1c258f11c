"""Exception types shared across the package.

Input/usage problems raise one of these; failed mathematical assertions
never raise — they come back as reports with ``passed=False`` so callers
(and the CLI) can distinguish a broken invocation from a broken inequality.
"""


class JnplusError(Exception):
    """Base class for all package errors."""


class OutOfDomainError(JnplusError):
    """A cube (or its forward translate) leaves the extended domain."""


class RefinementBelowGridError(JnplusError):
    """Asked for children of a cube already at the grid resolution."""


class NegativeInputError(JnplusError):
    """An operation requiring f >= 0 was handed negative values."""


class InvalidExponentError(JnplusError):
    """Exponent p outside (1, inf)."""


class InvalidParamsError(JnplusError):
    """Lemma/theorem parameters outside their admissible range."""


class InstanceTooLargeError(JnplusError):
    """Brute-force oracle invoked past its enumeration bound."""


class GridFormatError(JnplusError):
    """Malformed grid file or header."""


class InvalidSpecError(JnplusError):
    """Malformed generator specification."""
