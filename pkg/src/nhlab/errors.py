"""Exception types shared across the package."""


class NHLabError(Exception):
    """Base class for all package errors."""


class SingularPhase(NHLabError):
    """A tangent-potential phase landed within the pole exclusion window."""

    def __init__(self, sites, distance):
        self.sites = sites
        self.distance = distance
        super().__init__(
            f"tangent pole within {distance:.3e} rad at site(s) {sites}; shift theta"
        )


class IncommensurateSize(NHLabError):
    """Vector length does not match the rational denominator q."""


class Resonance(NHLabError):
    """A momentum-product term hit an (almost) exact resonance."""

    def __init__(self, k, value):
        self.k = k
        self.value = value
        super().__init__(f"resonant term |E - 2cos| = {value:.3e} at k = {k}")


class DivisionNearZero(NHLabError):
    """Dual-recursion denominator below threshold."""


class SingularQuadrature(NHLabError):
    """A quadrature abscissa fell on a logarithmic singularity."""


class NoConvergence(NHLabError):
    """QR iteration failed to deflate within the sweep budget."""

    def __init__(self, index):
        self.index = index
        super().__init__(f"QR failed to deflate eigenvalue index {index}")


class ZeroState(NHLabError):
    """Operation on a zero-norm state."""


class InsufficientSupport(NHLabError):
    """Too few usable sites for a decay fit."""


class EmptySet(NHLabError):
    """Spectral distance of an empty point set."""


class DegenerateDistance(NHLabError):
    """Probe energy (numerically) coincides with a spectrum point."""

    def __init__(self, terms):
        self.terms = terms
        super().__init__(f"probe within 1e-12 of spectrum point(s) {terms}")


class IllConditionedBasis(NHLabError):
    """Eigenvector matrix too ill-conditioned for dynamics."""

    def __init__(self, cond):
        self.cond = cond
        super().__init__(f"eigenvector basis condition estimate {cond:.3e} > 1e12")


class FitFailure(NHLabError):
    """Piecewise-linear fit residual exceeded tolerance."""


class SchemaMismatch(NHLabError):
    """Result file does not match any known CSV schema."""
