"""Exception types shared across the package."""


class DiracLabError(Exception):
    """Base class for all package-specific errors."""


class ConstraintViolation(DiracLabError):
    """A boundary-condition parameter constraint fails."""

    def __init__(self, which, residual):
        self.which = which
        self.residual = residual
        super().__init__(f"constraint {which} violated (residual {residual:.3e})")


class DegenerateBC(DiracLabError):
    """ad = 0: the boundary-condition family degenerates."""


class GridTooCoarse(DiracLabError):
    """Sample grid cannot resolve the requested coefficient range."""


class BadParams(DiracLabError):
    """Invalid parameters for a potential generator or weight."""


class TooFewPoints(DiracLabError):
    """Not enough usable data points for a fit."""


class TruncationTooSmall(DiracLabError):
    """Galerkin cutoff too small for the potential's coefficient support."""


class ZeroOnContour(DiracLabError):
    """Characteristic function vanishes (numerically) on an integration contour."""


class NonIntegerWinding(DiracLabError):
    """Argument-principle winding fails to round cleanly to an integer."""


class ContourHitsSpectrum(DiracLabError):
    """Resolvent contour passes too close to an eigenvalue."""


class ComplementSingular(DiracLabError):
    """Complementary block in a Schur reduction is numerically singular."""


class WrongRootCount(DiracLabError):
    """A localization disc encloses an unexpected number of roots."""

    def __init__(self, expected, found, center, radius):
        self.expected = expected
        self.found = found
        self.center = center
        self.radius = radius
        super().__init__(
            f"expected {expected} roots in disc(center={center}, radius={radius}), found {found}"
        )


class RankDeficientProjection(DiracLabError):
    """Numerical Riesz projection does not have the expected rank."""


class ConfigError(DiracLabError):
    """Run configuration is invalid."""


class PartialFailure(DiracLabError):
    """Some table rows failed; results carry error markers."""


class TruncationWarning(UserWarning):
    """Diagnostics indicate the truncation window is too small."""
