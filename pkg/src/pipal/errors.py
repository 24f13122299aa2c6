"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments that break its stated preconditions."""


class InvariantError(RuntimeError):
    """An internal data-structure invariant was found broken (corruption)."""
