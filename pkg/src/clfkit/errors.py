"""Error taxonomy shared across the verification harness."""


class ClfKitError(Exception):
    """Base class for all harness errors."""


class ConfigError(ClfKitError):
    """Malformed or out-of-range configuration value."""


class NonConvexShell(ClfKitError):
    """Defining function fails strong convexity on the working shell."""


class DegenerateGradient(ClfKitError):
    """Holomorphic gradient vanishes where a frame or normal is needed."""


class RootNotBracketed(ClfKitError):
    """A one-dimensional boundary root has no sign change in the search range."""


class NoConvergence(ClfKitError):
    """An iterative solver exhausted its iteration budget."""


class SingularPairing(ClfKitError):
    """The Cauchy-Leray pairing fell below the singularity floor."""


class TooCloseToBoundary(ClfKitError):
    """Evaluation point violates the configured boundary separation."""


class ResolutionTooCoarse(ClfKitError):
    """Too few quadrature nodes support the requested statistic."""


class ResolutionBudgetExceeded(ClfKitError):
    """A refinement request would exceed the configured node budget."""


class EmptyRegion(ClfKitError):
    """An approach-region grid or sample came out empty."""


class InsufficientSeparation(ClfKitError):
    """A probe pair/triple violates its required quasimetric separation."""


class ZeroDenominator(ClfKitError):
    """A reported ratio has a vanishing denominator."""


class CacheCorruption(ClfKitError):
    """On-disk grid cache failed its checksum or schema check."""
