"""Exception hierarchy shared by the package."""


class WeakstabError(Exception):
    """Base class for all package errors."""


class CatalogError(WeakstabError, ValueError):
    """Unknown system name or parameters invalid for the family."""


class DimensionError(WeakstabError, ValueError):
    """A state or matrix has the wrong dimension."""


class NumericalFailure(WeakstabError, RuntimeError):
    """A numerical kernel (root finder, corrector, return-map) did not converge."""


class RootFindingError(NumericalFailure):
    pass


class OscillationRangeError(WeakstabError, ValueError):
    """Amplitude does not lie on a closed orbit around the centre."""


class DomainError(WeakstabError, ValueError):
    """Time outside the domain of a closed-form motion."""
