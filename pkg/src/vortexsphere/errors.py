"""Exception taxonomy shared across the library."""


class VortexSphereError(Exception):
    """Base class for all library-specific failures."""


class ChartSingular(VortexSphereError):
    """A sphere point is too close to the projection pole for the chart."""


class CollisionError(VortexSphereError):
    """Two vortices are closer than the collision threshold."""


class CollisionApproach(VortexSphereError):
    """Integration or continuation drove a vortex pair below the safe distance."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class DegenerateAt(VortexSphereError):
    """A mode block is singular at the requested frequency."""


class NoBifurcation(VortexSphereError):
    """The mode inequality fails; no critical frequency exists for this mode."""


class Degenerate(VortexSphereError):
    """Degenerate seed data (equatorial ring, zero frequency)."""


class NoConvergence(VortexSphereError):
    """Newton iteration failed to reach tolerance."""


class ChartEscape(VortexSphereError):
    """A loop or trajectory left the safe chart region."""


class StepUnderflow(VortexSphereError):
    """Adaptive integrator step size underflowed."""


class FrequencyMismatch(VortexSphereError):
    """Branch point frequency is too far from the rational target."""


class NotCoprime(VortexSphereError):
    """Modular inverse requested for non-coprime arguments."""


class ResonanceWarning(UserWarning):
    """Seed frequency is resonant; branch output is exploratory."""
