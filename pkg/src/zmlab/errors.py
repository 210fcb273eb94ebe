"""Exception hierarchy shared by all compute modules.

The CLI maps these onto process exit codes: usage errors (2), I/O errors (3),
numeric budget errors (4) and tolerance failures (5).
"""


class ZmlabError(Exception):
    """Base class for all library errors."""


class DomainError(ZmlabError, ValueError):
    """Input outside the supported domain (pole of Gamma, divergent series, ...)."""


class PoleError(DomainError):
    """Evaluation requested at a pole of the underlying function."""


class DegenerateShiftError(DomainError):
    """Shift configuration collapses a required nonzero quantity (e.g. Q(0) = 0)."""


class BudgetError(ZmlabError, RuntimeError):
    """Requested accuracy not reachable within the configured work budget."""


class RefinementError(BudgetError):
    """Self-consistency check across grid refinements failed; finer sampling needed."""


class UnsupportedOrderError(ZmlabError, ValueError):
    """Derivative/series order beyond what the implementation supports."""
