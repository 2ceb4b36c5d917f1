class DomainError(ValueError):
    """Invalid input or a request outside the supported domain."""


class BudgetError(DomainError):
    """A configured size or level budget would be exceeded."""


class CornerCompatible(DomainError):
    """A compatibility ray runs into a corner of the prefractal."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; this signals a bug."""
