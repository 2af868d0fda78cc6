"""Exception hierarchy shared by all focklab modules."""


class FockLabError(Exception):
    """Base class for every error raised by focklab."""


class InputError(FockLabError, ValueError):
    """Malformed input: non-finite entries, dimension mismatch, bad parameters."""


class DomainError(FockLabError, ValueError):
    """The request is outside the domain where the operation is defined.

    Raised for symbols that cannot induce a bounded operator, for pairs that are
    not in the same component when a path is requested, and similar cases.
    """


class UnboundedError(DomainError):
    """An operator that must be bounded for the requested (p, q) is not."""


class UnsupportedMethodError(FockLabError, ValueError):
    """A norm method was requested for a function or exponent it cannot handle."""


class BudgetError(FockLabError, ValueError):
    """The requested evaluation budget is not feasible (e.g. tensor grid too large)."""


class NotBoundedCompatibleError(DomainError):
    """The weight does not factor as exp(-<z_[j], b_[j]>) * psi_*(z'_[j]).

    This is the situation where m(psi, phi) is infinite, so no bounded weighted
    composition operator has this symbol.
    """
