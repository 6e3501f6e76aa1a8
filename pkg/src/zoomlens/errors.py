"""Exception taxonomy shared across the package.

FormatError covers malformed or version-mismatched files; DataError covers
inputs that parse fine but are inconsistent with each other (missing ids,
dimension clashes, empty subsets). The CLI maps them to exit codes 3 and 4.
"""


class ZoomlensError(Exception):
    """Base class for all package-specific failures."""


class FormatError(ZoomlensError):
    """A file's magic, version, or structure is wrong."""


class DataError(ZoomlensError):
    """Inputs are individually valid but mutually inconsistent."""
