"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its allowed range."""


class DomainError(ValueError):
    """A density or function was evaluated outside its open domain."""


class StructuralError(ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class ResolutionError(ValueError):
    """The grid is too coarse for the requested quantity."""


class BudgetError(RuntimeError):
    """A simulation ran out of its step budget before its stopping event."""


class DegenerateError(ValueError):
    """An estimator has no information (e.g. zero total weight)."""


class ContractError(ValueError):
    """A callable argument violates its documented contract."""
