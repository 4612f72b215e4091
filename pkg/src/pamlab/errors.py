"""Exception types shared across the package."""


class PamlabError(Exception):
    """Base class for all package errors."""


class NonPowerOfTwoError(PamlabError):
    """Lattice size N must be a power of two (FFT contract)."""


class DimensionError(PamlabError):
    """Spatial dimension outside the supported set {2, 3}."""


class LatticeMismatchError(PamlabError):
    """Two fields combined across different lattices."""


class UnresolvedMollifierError(PamlabError):
    """Mollifier width too small for the grid spacing."""


class NonLatticeShiftError(PamlabError):
    """Shift vector is not an integer number of cells."""


class KernelDomainError(PamlabError):
    """Torus too small to hold the compactly supported kernel."""


class NoContractionError(PamlabError):
    """Fixed-point map failed to contract (scale parameter too large)."""


class TooFewScalesError(PamlabError):
    """Grid does not support enough dyadic scales for the estimator."""


class DenseTooLargeError(PamlabError):
    """Dense operator assembly requested beyond the configured cap."""


class BallTooLargeError(PamlabError):
    """Probe ball does not fit in the fundamental domain."""


class StabilityViolationError(PamlabError):
    """Time integration exceeded its a-priori growth envelope."""


class SchemaError(PamlabError):
    """Experiment configuration failed validation."""


class BudgetExceededError(PamlabError):
    """Experiment exceeded its wall-clock budget."""
