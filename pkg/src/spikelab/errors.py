"""Exception types shared across the package."""


class SpikelabError(Exception):
    """Base class for all package-specific failures."""


class IntegrationError(SpikelabError):
    """Radial integration produced a non-finite state."""

    def __init__(self, radius: float):
        self.radius = radius
        super().__init__(f"non-finite state at r = {radius:.6g}")


class BracketNotFound(SpikelabError):
    """Shooting never produced the classification needed to bracket."""


class WindowTooNoisy(SpikelabError):
    """Decay-fit window contains underflowed profile values."""


class PointNotOnBoundary(SpikelabError):
    """Query point is not on the analytic boundary within tolerance."""


class MeshQualityFailure(SpikelabError):
    """Generated mesh contains a cell with excessive aspect ratio."""


class ZeroField(SpikelabError):
    """Operation requires a nonzero field."""


class NoRoot(SpikelabError):
    """Nehari scaling has no positive root (no positive part)."""


class CollapseToZero(SpikelabError):
    """Descent iterate lost its positive part entirely."""


class MeshTooCoarse(SpikelabError):
    """Mesh does not resolve the requested epsilon (h > eps/3)."""


class InsufficientCases(SpikelabError):
    """Not enough converged sweep cases for the requested fit."""


class WindowEmpty(SpikelabError):
    """Decay-fit window contains no mesh vertices."""
