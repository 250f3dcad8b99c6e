class GwcacheError(Exception):
    """Base class for every error raised by gwcache."""


class ValidationError(GwcacheError):
    """
    Raised when an input fails validation.

    Carries an optional field -> message dict, the same shape the schema
    validator returns, so the CLI can echo it back unchanged.
    """

    def __init__(self, message: str, errors: dict[str, str] | None = None):
        super().__init__(message)
        self.message = message
        self.errors = errors or {}


class AsymmetricAuxiliaryError(ValidationError):
    """Raised when an auxiliary channel violates p(x1|u) = p(x2|u)."""

    def __init__(self, defect: float, tol: float):
        super().__init__(
            f"Auxiliary channel is not conditionally symmetric: defect {defect:.3e} exceeds {tol:.1e}.",
            {"symmetry_defect": f"{defect:.3e}"},
        )
        self.defect = defect


class InfeasibleOptimizationError(GwcacheError):
    """Raised when no explored auxiliary channel satisfies the constraints."""


class UnsupportedSourceError(GwcacheError):
    """Raised when a source realization has no exactly codable Gray-Wyner structure."""


class SimulationError(GwcacheError):
    """Raised when the caching protocol breaks one of its own guarantees."""
