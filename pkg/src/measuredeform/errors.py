"""Exception types shared across the package."""


class UnsupportedOrderError(ValueError):
    """A derivative of higher order than the object can provide was requested."""


class ConstructionError(RuntimeError):
    """A constructor could not produce an object satisfying its invariants."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class EvaluationError(RuntimeError):
    """A numerical evaluation produced non-finite or otherwise unusable values."""


class SupportViolationError(DomainError):
    """A support-containment requirement between two objects is violated."""


class NoCompactSolutionError(DomainError):
    """The balance condition for a compactly supported solution fails."""
