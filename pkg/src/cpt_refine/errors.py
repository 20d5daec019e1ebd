"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
ShapeMismatchError -> 3, SearchSpaceError -> 4.
"""


class CptRefineError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CptRefineError, ValueError):
    """Malformed input: bad probabilities, bad specs, bad documents."""


class ShapeMismatchError(CptRefineError, ValueError):
    """Two CPTs (or a CPT and a spec) disagree on shape or row ordering."""


class SearchSpaceError(CptRefineError, ValueError):
    """A search-space guard was exceeded (enumeration would blow up)."""
