"""Exception hierarchy shared by all ozlab modules.

The CLI maps :class:`UsageError` to exit code 2 and every other
:class:`OzlabError` to exit code 1.
"""


class OzlabError(Exception):
    pass


class ContractViolation(OzlabError, ValueError):
    """Mismatched dimensions, parameters or violated preconditions."""


class DomainError(OzlabError, ValueError):
    pass


class DataError(OzlabError):
    """Not enough (or unusable) data for an estimate."""


class ResourceError(OzlabError):
    """A configured enumeration or state-space cap would be exceeded."""


class DivergenceError(OzlabError, ArithmeticError):
    pass


class FitError(OzlabError):
    pass


class UnsupportedModelError(OzlabError, NotImplementedError):
    pass


class UsageError(OzlabError):
    pass
