"""Exception hierarchy shared across the library."""


class ComposelectError(Exception):
    """Base class for all library errors."""


class DomainError(ComposelectError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class StructuralError(ComposelectError, ValueError):
    """Inconsistent object structure (mismatched measures, lengths, bases)."""


class RankDeficiencyError(StructuralError):
    """A family of functions is linearly dependent on the node set."""

    def __init__(self, index: int, residual: float):
        self.index = index
        self.residual = residual
        super().__init__(
            f"function at index {index} is linearly dependent on its "
            f"predecessors (residual norm {residual:.3e})"
        )


class BudgetError(ComposelectError, RuntimeError):
    """An enumeration or cardinality cap was exceeded."""

    def __init__(self, message: str, count: float, cap: float):
        self.count = count
        self.cap = cap
        super().__init__(f"{message}: {count} exceeds cap {cap}")


class CertificateError(ComposelectError, ValueError):
    """A Kraft / subprobability certificate is missing or violated."""
