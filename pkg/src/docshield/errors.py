"""Exception types shared across the package."""


class DocShieldError(Exception):
    """Base class for all docshield errors."""


class InputError(DocShieldError):
    """Invalid user input: a bad manifest, config file, label, or argument."""


class BundleError(DocShieldError):
    """A model bundle file failed format or consistency validation."""


class InternalError(DocShieldError):
    """An internal invariant was violated; indicates a bug, not bad input."""
